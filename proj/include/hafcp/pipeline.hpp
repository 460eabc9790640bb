#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hafcp/error.hpp"
#include "hafcp/gbdt.hpp"
#include "hafcp/miner.hpp"

namespace hafcp {

struct PipelineConfig {
  std::string input;
  std::string label_column = "Churn";
  std::string positive_label = "1";
  std::vector<std::string> drop_columns;
  double train_fraction = 0.8;
  std::uint64_t seed = 42;
  BoostParams boost;
  std::string importance_method = "gain";  // gain | path_attribution | external
  std::string importance_path;             // used when importance_method == external
  double alpha = 0.05;
  std::size_t k = 5;
  std::size_t min_length = 2;
  std::size_t max_length = 0;  // 0 = unbounded
  std::string mode = "binary";    // binary | membership
  std::string search = "exact";   // exact | beam
  bool cumulative = false;        // Top-i uses patterns 1..i instead of pattern i alone
  std::string output_dir = "hafcp_out";

  void validate() const;
  MiningConfig mining() const;
  /// Hash of every field except output_dir.
  std::string fingerprint() const;
  std::string to_json() const;
  static PipelineConfig from_json(const std::string& text);
  /// Applies a `--key value` override; keys are the JSON field names.
  void set(std::string_view key, const std::string& value);
  static std::vector<std::string> keys();
};

namespace artifact {
inline constexpr std::string_view kConfig = "config.json";
inline constexpr std::string_view kModel = "model.json";
inline constexpr std::string_view kImportance = "importance.csv";
inline constexpr std::string_view kContributions = "contributions.csv";
inline constexpr std::string_view kBaseline = "baseline_metrics.json";
inline constexpr std::string_view kSpecs = "membership_specs.json";
inline constexpr std::string_view kFrame = "frame.json";
inline constexpr std::string_view kPatterns = "patterns.jsonl";
inline constexpr std::string_view kPatternTable = "patterns.txt";
inline constexpr std::string_view kReportJson = "report.json";
inline constexpr std::string_view kReportMarkdown = "report.md";
}  // namespace artifact

void cmd_train(const PipelineConfig& cfg, std::ostream& log);
void cmd_fuzzify(const PipelineConfig& cfg, std::ostream& log);
void cmd_mine(const PipelineConfig& cfg, std::ostream& log);
void cmd_report(const PipelineConfig& cfg, std::ostream& log);
void cmd_pipeline(const PipelineConfig& cfg, std::ostream& log);

/// 2 for input/config errors, 3 for missing artifacts, 1 otherwise.
int exit_code_for(ErrorCode code);

}  // namespace hafcp
