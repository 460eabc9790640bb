#pragma once

#include <span>

namespace hafcp {

struct NormalityResult {
  double w_statistic = 1.0;
  double p_value = 1.0;
  double alpha = 0.05;
  bool is_gaussian = true;
};

/// Shapiro-Wilk W and its p-value via Royston's AS R94 approximation.
/// Valid for 3 <= n <= 5000; input need not be sorted.
NormalityResult shapiro_wilk(std::span<const double> x, double alpha = 0.05);

/// Standard normal quantile (Wichura AS 241, PPND16).
double normal_quantile(double p);

/// Upper-tail standard normal probability.
double normal_upper_tail(double z);

}  // namespace hafcp
