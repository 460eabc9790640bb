// hafcp: train -> fuzzify -> mine -> report, one subcommand per step.

#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hafcp/io.hpp"
#include "hafcp/pipeline.hpp"

namespace {

struct Step {
  const char* name;
  const char* help;
  void (*run)(const hafcp::PipelineConfig&, std::ostream&);
};

constexpr Step kSteps[] = {
    {"train", "Train the baseline model; write model, importance and baseline metrics", hafcp::cmd_train},
    {"fuzzify", "Fit membership functions on the training split and write the binary frame", hafcp::cmd_fuzzify},
    {"mine", "Mine the top-k high-utility churn patterns", hafcp::cmd_mine},
    {"report", "Retrain with each pattern as a feature and write the comparison report", hafcp::cmd_report},
    {"pipeline", "Run train, fuzzify, mine and report in sequence", hafcp::cmd_pipeline},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Highly associated fuzzy churn pattern mining"};
  app.require_subcommand(1);

  std::string config_path;
  std::map<std::string, std::string> overrides;
  const auto keys = hafcp::PipelineConfig::keys();

  const Step* chosen = nullptr;
  for (const auto& step : kSteps) {
    auto* sub = app.add_subcommand(step.name, step.help);
    sub->add_option("-c,--config", config_path, "JSON config file");
    for (const auto& key : keys) {
      sub->add_option_function<std::string>(
          "--" + key, [&overrides, key](const std::string& v) { overrides[key] = v; }, "override config '" + key + "'");
    }
    sub->callback([&chosen, &step] { chosen = &step; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    hafcp::PipelineConfig cfg;
    if (!config_path.empty()) {
      if (!std::filesystem::exists(config_path)) {
        throw hafcp::Error(hafcp::ErrorCode::InvalidConfig, "config file not found: " + config_path);
      }
      cfg = hafcp::PipelineConfig::from_json(hafcp::read_file(config_path));
    }
    for (const auto& [key, value] : overrides) cfg.set(key, value);
    chosen->run(cfg, std::cerr);
  } catch (const hafcp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hafcp::exit_code_for(e.code());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed artifact: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
