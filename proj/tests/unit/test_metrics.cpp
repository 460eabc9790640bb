#include <doctest.h>

#include <cmath>
#include <vector>

#include "hafcp/error.hpp"
#include "hafcp/metrics.hpp"
#include "hafcp/rng.hpp"

using namespace hafcp;

namespace {

// O(n^2) pair count with ties worth one half.
double pairwise_auc(const std::vector<std::uint8_t>& y, const std::vector<double>& p) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[i] != 1 || y[j] != 0) continue;
      den += 1.0;
      num += p[i] > p[j] ? 1.0 : p[i] == p[j] ? 0.5 : 0.0;
    }
  }
  return num / den;
}

}  // namespace

TEST_CASE("perfect ranking") {
  const std::vector<std::uint8_t> y = {0, 1};
  const std::vector<double> p = {0.1, 0.9};
  const auto m = evaluate(y, p);
  CHECK(m.auc == 1.0);
  CHECK(m.accuracy == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.precision == 1.0);
  CHECK(m.f1 == 1.0);
}

TEST_CASE("tied scores give AUC one half") {
  const std::vector<std::uint8_t> y = {0, 1};
  const std::vector<double> p = {0.5, 0.5};
  const auto m = evaluate(y, p);
  CHECK(m.auc == 0.5);
  // 0.5 is not above the threshold, so nothing is predicted positive.
  CHECK(m.precision == 0.0);
  CHECK(m.f1 == 0.0);
  CHECK(m.accuracy == 0.5);
}

TEST_CASE("five point case") {
  const std::vector<std::uint8_t> y = {1, 1, 0, 0, 1};
  const std::vector<double> p = {0.9, 0.4, 0.6, 0.2, 0.8};
  const auto c = confusion(y, p, 0.5);
  CHECK(c.tp == 2);
  CHECK(c.fn == 1);
  CHECK(c.fp == 1);
  CHECK(c.tn == 1);
  const auto m = evaluate(y, p);
  CHECK(m.auc == 5.0 / 6.0);
  CHECK(m.precision == 2.0 / 3.0);
  CHECK(m.recall == 2.0 / 3.0);
  CHECK(m.f1 == 2.0 / 3.0);
  CHECK(m.accuracy == 3.0 / 5.0);
}

TEST_CASE("errors") {
  const std::vector<std::uint8_t> y = {1, 1};
  const std::vector<double> p = {0.2, 0.3};
  const std::vector<double> short_p = {0.2};
  CHECK_THROWS_AS(evaluate(y, short_p), Error);
  try {
    evaluate(y, p);
    FAIL("expected DegenerateAUC");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateAUC);
  }
  const auto m = evaluate(y, p, 0.25, SingleClass::mark_undefined);
  CHECK_FALSE(m.auc_defined);
  CHECK(m.recall == 0.5);
}

TEST_CASE("midrank AUC matches pair counting") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(40);
    std::vector<std::uint8_t> y(n);
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<std::uint8_t>(rng.below(2));
      p[i] = static_cast<double>(rng.below(6)) / 5.0;  // coarse grid forces ties
    }
    y[0] = 0;
    y[1] = 1;
    CHECK(roc_auc(y, p) == doctest::Approx(pairwise_auc(y, p)).epsilon(1e-12));
  }
}

TEST_CASE("AUC is invariant under increasing transforms") {
  SplitMix64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + rng.below(100);
    std::vector<std::uint8_t> y(n);
    std::vector<double> p(n), q(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<std::uint8_t>(rng.below(2));
      p[i] = rng.uniform();
      q[i] = std::log(p[i]) * 3.0 + 7.0;
    }
    y[0] = 0;
    y[1] = 1;
    CHECK(roc_auc(y, p) == roc_auc(y, q));
  }
}
