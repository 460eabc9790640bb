#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hafcp/dataset.hpp"
#include "hafcp/fuzzify.hpp"
#include "hafcp/gbdt.hpp"
#include "hafcp/metrics.hpp"
#include "hafcp/miner.hpp"

namespace hafcp {

struct PatternFeature {
  Pattern pattern;
  std::string column_name;
  std::vector<std::uint8_t> values;
};

/// 1 where every pattern item is present in the row. Item names may use the
/// long term suffixes (_Low, _Medium, _High) for _L, _M, _H.
PatternFeature pattern_feature(const Pattern& pattern, const BinaryFrame& frame, std::string column_name = "HAFCP_1");

/// Fuzzifies `ds` with `specs` (fitted on the training split) and then applies
/// the frame overload; train and test rows therefore use the same boundaries.
PatternFeature pattern_feature(const Pattern& pattern, const ColumnarDataset& ds, std::span<const MembershipSpec> specs,
                               std::string column_name = "HAFCP_1");

Metrics evaluate_baseline(const ColumnarDataset& train, const ColumnarDataset& test, const BoostParams& params,
                          SingleClass single_class = SingleClass::reject);

/// Appends one indicator column per pattern to both splits (after all
/// original columns), retrains with `params` and evaluates on `test`.
/// `specs` must have been fitted on `train`.
Metrics evaluate_with_patterns(const ColumnarDataset& train, const ColumnarDataset& test,
                               std::span<const MembershipSpec> specs, std::span<const Pattern> patterns,
                               const BoostParams& params, SingleClass single_class = SingleClass::reject);

Metrics evaluate_with_pattern(const ColumnarDataset& train, const ColumnarDataset& test,
                              std::span<const MembershipSpec> specs, const Pattern& pattern, const BoostParams& params,
                              SingleClass single_class = SingleClass::reject);

enum class Change { worse, equal, improved };
std::string_view to_string(Change c);

inline constexpr std::array<std::string_view, 5> kMetricNames = {"AUC", "Accuracy", "Recall", "Precision", "F1"};
std::array<double, 5> metric_values(const Metrics& m);

struct ReportRow {
  std::size_t index = 0;  // i of Top-i
  Metrics metrics;
  std::array<Change, 5> flags{};  // in kMetricNames order
};

struct ComparisonReport {
  Metrics baseline;
  std::vector<ReportRow> per_pattern;
  Metrics average;
  std::array<Change, 5> average_flags{};
  /// Reference columns supplied from outside (e.g. results of other models).
  std::vector<std::pair<std::string, Metrics>> external;
  std::string config_fingerprint;
};

/// Flags compare values rounded to 4 decimals; AVG is the per-metric mean of
/// the augmented rows. An undefined AUC compares equal and makes the AVG AUC
/// undefined.
ComparisonReport build_report(const Metrics& baseline, std::span<const std::pair<std::size_t, Metrics>> augmented,
                              std::string config_fingerprint = {});

std::string report_to_markdown(const ComparisonReport& report);
std::string report_to_json(const ComparisonReport& report, std::span<const Pattern> patterns);

}  // namespace hafcp
