#include "hafcp/augment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "hafcp/error.hpp"
#include "hafcp/parallel.hpp"

namespace hafcp {

using json = nlohmann::json;

namespace {

std::string canonical_item_name(const std::string& name) {
  static constexpr std::pair<std::string_view, std::string_view> kLong[] = {
      {"_Low", "_L"}, {"_Medium", "_M"}, {"_High", "_H"}};
  for (const auto& [from, to] : kLong) {
    if (name.size() > from.size() && name.compare(name.size() - from.size(), from.size(), from) == 0) {
      return name.substr(0, name.size() - from.size()) + std::string(to);
    }
  }
  return name;
}

void check_specs_fitted_on(std::span<const MembershipSpec> specs, const ColumnarDataset& train) {
  for (const auto& s : specs) {
    if (s.source_fingerprint != train.fingerprint()) {
      throw Error(ErrorCode::LineageMismatch,
                  "membership spec for '" + s.column + "' was not fitted on this training split");
    }
  }
}

}  // namespace

PatternFeature pattern_feature(const Pattern& pattern, const BinaryFrame& frame, std::string column_name) {
  std::vector<std::size_t> cols;
  for (const auto& item : pattern.items) {
    const auto idx = frame.item_index(item) ? frame.item_index(item) : frame.item_index(canonical_item_name(item));
    if (!idx) throw Error(ErrorCode::UnresolvableItem, "item '" + item + "' has no source column in the frame");
    cols.push_back(*idx);
  }
  PatternFeature out{pattern, std::move(column_name), std::vector<std::uint8_t>(frame.n_rows, 0)};
  for (std::size_t r = 0; r < frame.n_rows; ++r) {
    bool all = true;
    for (std::size_t c : cols) all = all && frame.at(r, c);
    out.values[r] = all ? 1 : 0;
  }
  return out;
}

PatternFeature pattern_feature(const Pattern& pattern, const ColumnarDataset& ds, std::span<const MembershipSpec> specs,
                               std::string column_name) {
  return pattern_feature(pattern, to_binary_frame(ds, specs), std::move(column_name));
}

Metrics evaluate_baseline(const ColumnarDataset& train, const ColumnarDataset& test, const BoostParams& params,
                          SingleClass single_class) {
  const auto model = hafcp::train(train, params);
  const auto prob = predict_proba(model, test);
  return evaluate(test.labels(), prob, 0.5, single_class);
}

Metrics evaluate_with_patterns(const ColumnarDataset& train, const ColumnarDataset& test,
                               std::span<const MembershipSpec> specs, std::span<const Pattern> patterns,
                               const BoostParams& params, SingleClass single_class) {
  check_specs_fitted_on(specs, train);
  ColumnarDataset aug_train = train;
  ColumnarDataset aug_test = test;
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    const std::string name = "HAFCP_" + std::to_string(i + 1);
    const auto ftr = pattern_feature(patterns[i], train, specs, name);
    const auto fte = pattern_feature(patterns[i], test, specs, name);
    aug_train = aug_train.with_numeric_column(name, {ftr.values.begin(), ftr.values.end()});
    aug_test = aug_test.with_numeric_column(name, {fte.values.begin(), fte.values.end()});
  }
  return evaluate_baseline(aug_train, aug_test, params, single_class);
}

Metrics evaluate_with_pattern(const ColumnarDataset& train, const ColumnarDataset& test,
                              std::span<const MembershipSpec> specs, const Pattern& pattern, const BoostParams& params,
                              SingleClass single_class) {
  return evaluate_with_patterns(train, test, specs, std::span<const Pattern>(&pattern, 1), params, single_class);
}

std::string_view to_string(Change c) {
  switch (c) {
    case Change::worse: return "worse";
    case Change::equal: return "equal";
    case Change::improved: return "improved";
  }
  return "?";
}

std::array<double, 5> metric_values(const Metrics& m) { return {m.auc, m.accuracy, m.recall, m.precision, m.f1}; }

namespace {

Change compare_rounded(double value, double baseline) {
  const double a = std::round(value * 1e4);
  const double b = std::round(baseline * 1e4);
  if (a > b) return Change::improved;
  if (a < b) return Change::worse;
  return Change::equal;
}

std::array<Change, 5> flags_for(const Metrics& m, const Metrics& baseline) {
  const auto v = metric_values(m);
  const auto b = metric_values(baseline);
  std::array<Change, 5> out{};
  for (std::size_t i = 0; i < 5; ++i) out[i] = compare_rounded(v[i], b[i]);
  if (!m.auc_defined || !baseline.auc_defined) out[0] = Change::equal;
  return out;
}

}  // namespace

ComparisonReport build_report(const Metrics& baseline, std::span<const std::pair<std::size_t, Metrics>> augmented,
                              std::string config_fingerprint) {
  ComparisonReport report;
  report.baseline = baseline;
  report.config_fingerprint = std::move(config_fingerprint);
  std::array<double, 5> sums{};
  bool auc_defined = true;
  for (const auto& [index, m] : augmented) {
    auc_defined = auc_defined && m.auc_defined;
    report.per_pattern.push_back({index, m, flags_for(m, baseline)});
    const auto v = metric_values(m);
    for (std::size_t i = 0; i < 5; ++i) sums[i] += v[i];
  }
  if (!augmented.empty()) {
    const double n = static_cast<double>(augmented.size());
    report.average = {sums[0] / n, sums[1] / n, sums[2] / n, sums[3] / n, sums[4] / n};
    if (!auc_defined) report.average.auc = 0.0;
    report.average.auc_defined = auc_defined;
  } else {
    report.average = baseline;
  }
  report.average_flags = flags_for(report.average, baseline);
  return report;
}

std::string report_to_markdown(const ComparisonReport& report) {
  std::ostringstream out;
  out << "<!-- config " << report.config_fingerprint << " -->\n";
  out << "| Metric |";
  for (const auto& [name, m] : report.external) out << ' ' << name << " |";
  out << " Baseline |";
  for (const auto& row : report.per_pattern) out << " Top-" << row.index << " |";
  out << " AVG |\n|---|";
  for (std::size_t i = 0; i < report.external.size() + report.per_pattern.size() + 2; ++i) out << "---:|";
  out << '\n';
  auto cell = [](const Metrics& m, std::size_t k, Change c) {
    if (k == 0 && !m.auc_defined) return std::string("n/a");
    const double v = metric_values(m)[k];
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return c == Change::improved ? "**" + std::string(buf) + "**" : std::string(buf);
  };
  for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
    out << "| " << kMetricNames[k] << " |";
    for (const auto& [name, m] : report.external) out << ' ' << cell(m, k, Change::equal) << " |";
    out << ' ' << cell(report.baseline, k, Change::equal) << " |";
    for (const auto& row : report.per_pattern) out << ' ' << cell(row.metrics, k, row.flags[k]) << " |";
    out << ' ' << cell(report.average, k, report.average_flags[k]) << " |\n";
  }
  out << "\nBold cells improve on the baseline at 4-decimal precision.\n";
  return out.str();
}

namespace {

json metrics_json(const Metrics& m) {
  return {{"auc", m.auc_defined ? json(m.auc) : json(nullptr)}, {"accuracy", m.accuracy}, {"recall", m.recall}, {"precision", m.precision}, {"f1", m.f1}};
}

json flags_json(const std::array<Change, 5>& f) {
  json j = json::object();
  static constexpr std::array<const char*, 5> keys = {"auc", "accuracy", "recall", "precision", "f1"};
  for (std::size_t i = 0; i < 5; ++i) j[keys[i]] = to_string(f[i]);
  return j;
}

}  // namespace

std::string report_to_json(const ComparisonReport& report, std::span<const Pattern> patterns) {
  json rows = json::array();
  for (const auto& row : report.per_pattern) {
    json r{{"top", row.index}, {"metrics", metrics_json(row.metrics)}, {"flags", flags_json(row.flags)}};
    if (row.index >= 1 && row.index <= patterns.size()) {
      const auto& p = patterns[row.index - 1];
      r["pattern"] = {{"items", p.items}, {"utility", p.utility}, {"support", p.support}};
    }
    rows.push_back(std::move(r));
  }
  json external = json::array();
  for (const auto& [name, m] : report.external) external.push_back({{"name", name}, {"metrics", metrics_json(m)}});
  json doc{{"format", "hafcp-report"},
           {"version", 1},
           {"config_fingerprint", report.config_fingerprint},
           {"baseline", metrics_json(report.baseline)},
           {"per_pattern", std::move(rows)},
           {"average", metrics_json(report.average)},
           {"average_flags", flags_json(report.average_flags)},
           {"external", std::move(external)}};
  return doc.dump(1);
}

}  // namespace hafcp
