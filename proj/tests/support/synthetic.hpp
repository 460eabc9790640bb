#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "hafcp/miner.hpp"
#include "hafcp/rng.hpp"

namespace hafcp::testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(HAFCP_TEST_DATA) / name;
}

/// A, B, C, D ~ U(0, 100); churn iff A < 25 and 25 < B < 75, with each label
/// flipped with probability `noise`.
inline std::string planted_rule_csv(std::size_t n_rows, std::uint64_t seed, double noise = 0.05) {
  SplitMix64 rng(seed);
  std::string out = "A,B,C,D,Churn\n";
  char buf[128];
  for (std::size_t i = 0; i < n_rows; ++i) {
    double v[4];
    for (double& x : v) x = std::round(100.0 * rng.uniform() * 100.0) / 100.0;
    bool churn = v[0] < 25.0 && v[1] > 25.0 && v[1] < 75.0;
    if (rng.uniform() <= noise) churn = !churn;
    std::snprintf(buf, sizeof buf, "%.2f,%.2f,%.2f,%.2f,%d\n", v[0], v[1], v[2], v[3], churn ? 1 : 0);
    out += buf;
  }
  return out;
}

struct RandomInstance {
  TransactionDB db;
  ProfitTable profits;
};

/// Items named i00, i01, ...; each transaction holds each item with
/// probability `density`; quantities are 1 (binary) or in (0, 1].
inline RandomInstance random_instance(SplitMix64& rng, std::size_t n_items, std::size_t n_tx, UtilityMode mode,
                                      double density = 0.4) {
  RandomInstance inst;
  inst.db.mode = mode;
  for (std::size_t i = 0; i < n_items; ++i) {
    char name[24];
    std::snprintf(name, sizeof name, "i%02zu", i);
    inst.db.items.emplace_back(name);
    inst.profits[name] = rng.uniform();
  }
  for (std::size_t t = 0; t < n_tx; ++t) {
    std::vector<std::pair<std::uint32_t, double>> tx;
    for (std::uint32_t i = 0; i < n_items; ++i) {
      if (rng.uniform() <= density) tx.emplace_back(i, mode == UtilityMode::binary ? 1.0 : rng.uniform());
    }
    if (!tx.empty()) inst.db.transactions.push_back(std::move(tx));
  }
  return inst;
}

/// Same draws as tests/oracle/shapiro_reference.py.
inline std::vector<double> shapiro_family(const std::string& family, std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (family == "normal") {
      out.push_back(rng.normal());
    } else if (family == "uniform") {
      out.push_back(10.0 * rng.uniform());
    } else if (family == "exponential") {
      out.push_back(-std::log(rng.uniform()));
    } else if (family == "lognormal") {
      out.push_back(std::exp(0.5 * rng.normal()));
    } else {
      const double z = rng.normal();
      double chi = 0.0;
      for (int j = 0; j < 3; ++j) {
        const double g = rng.normal();
        chi += g * g;
      }
      out.push_back(z / std::sqrt(chi / 3.0));
    }
  }
  return out;
}

}  // namespace hafcp::testing
