#pragma once

#include <cstdint>
#include <span>

namespace hafcp {

struct Metrics {
  double auc = 0.0;
  double accuracy = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  /// False when the labels held a single class and AUC was not computed.
  bool auc_defined = true;

  bool operator==(const Metrics&) const = default;
};

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

/// Confusion matrix with the positive prediction rule p > threshold.
Confusion confusion(std::span<const std::uint8_t> y_true, std::span<const double> y_prob, double threshold);

/// ROC AUC as the Mann-Whitney U statistic over midranks, U / (n_pos * n_neg).
double roc_auc(std::span<const std::uint8_t> y_true, std::span<const double> y_prob);

enum class SingleClass { reject, mark_undefined };

/// Precision, recall and F1 are 0 when their denominators are 0. With a single
/// class present, `reject` throws DegenerateAUC and `mark_undefined` returns the
/// other metrics with auc_defined = false.
Metrics evaluate(std::span<const std::uint8_t> y_true, std::span<const double> y_prob, double threshold = 0.5,
                 SingleClass single_class = SingleClass::reject);

}  // namespace hafcp
