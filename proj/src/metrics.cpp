#include "hafcp/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "hafcp/error.hpp"

namespace hafcp {

namespace {

void check_lengths(std::span<const std::uint8_t> y_true, std::span<const double> y_prob) {
  if (y_true.size() != y_prob.size()) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(y_true.size()) + " labels vs " + std::to_string(y_prob.size()) + " scores");
  }
  if (y_true.empty()) throw Error(ErrorCode::LengthMismatch, "no samples");
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Confusion confusion(std::span<const std::uint8_t> y_true, std::span<const double> y_prob, double threshold) {
  check_lengths(y_true, y_prob);
  Confusion c;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool predicted = y_prob[i] > threshold;
    if (y_true[i]) {
      predicted ? ++c.tp : ++c.fn;
    } else {
      predicted ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

double roc_auc(std::span<const std::uint8_t> y_true, std::span<const double> y_prob) {
  check_lengths(y_true, y_prob);
  const std::size_t n = y_true.size();
  const auto n_pos = static_cast<std::size_t>(std::count(y_true.begin(), y_true.end(), std::uint8_t{1}));
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error(ErrorCode::DegenerateAUC, "only one class present");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y_prob[a] < y_prob[b]; });

  // Sum of 1-based midranks over positives.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && y_prob[order[j]] == y_prob[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (y_true[order[k]]) rank_sum += midrank;
    }
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double u = rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

Metrics evaluate(std::span<const std::uint8_t> y_true, std::span<const double> y_prob, double threshold,
                 SingleClass single_class) {
  const Confusion c = confusion(y_true, y_prob, threshold);
  Metrics m;
  const bool one_class = (c.tp + c.fn == 0) || (c.tn + c.fp == 0);
  if (one_class && single_class == SingleClass::mark_undefined) {
    m.auc_defined = false;
  } else {
    m.auc = roc_auc(y_true, y_prob);
  }
  m.accuracy = ratio(c.tp + c.tn, y_true.size());
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.f1 = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
  return m;
}

}  // namespace hafcp
