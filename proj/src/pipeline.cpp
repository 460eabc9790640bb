#include "hafcp/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "hafcp/augment.hpp"
#include "hafcp/dataset.hpp"
#include "hafcp/fingerprint.hpp"
#include "hafcp/fuzzify.hpp"
#include "hafcp/io.hpp"
#include "hafcp/parallel.hpp"

namespace hafcp {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

json config_json(const PipelineConfig& c) {
  return {{"input", c.input},
          {"label_column", c.label_column},
          {"positive_label", c.positive_label},
          {"drop_columns", c.drop_columns},
          {"train_fraction", c.train_fraction},
          {"seed", c.seed},
          {"max_depth", c.boost.max_depth},
          {"learning_rate", c.boost.learning_rate},
          {"n_estimators", c.boost.n_estimators},
          {"min_child_weight", c.boost.min_child_weight},
          {"lambda_l2", c.boost.lambda_l2},
          {"importance_method", c.importance_method},
          {"importance_path", c.importance_path},
          {"alpha", c.alpha},
          {"k", c.k},
          {"min_length", c.min_length},
          {"max_length", c.max_length},
          {"mode", c.mode},
          {"search", c.search},
          {"cumulative", c.cumulative},
          {"output_dir", c.output_dir}};
}

void load_field(PipelineConfig& c, const std::string& key, const json& v) {
  if (key == "input") c.input = v.get<std::string>();
  else if (key == "label_column") c.label_column = v.get<std::string>();
  else if (key == "positive_label") c.positive_label = v.get<std::string>();
  else if (key == "drop_columns") c.drop_columns = v.get<std::vector<std::string>>();
  else if (key == "train_fraction") c.train_fraction = v.get<double>();
  else if (key == "seed") c.seed = v.get<std::uint64_t>();
  else if (key == "max_depth") c.boost.max_depth = v.get<int>();
  else if (key == "learning_rate") c.boost.learning_rate = v.get<double>();
  else if (key == "n_estimators") c.boost.n_estimators = v.get<int>();
  else if (key == "min_child_weight") c.boost.min_child_weight = v.get<double>();
  else if (key == "lambda_l2") c.boost.lambda_l2 = v.get<double>();
  else if (key == "importance_method") c.importance_method = v.get<std::string>();
  else if (key == "importance_path") c.importance_path = v.get<std::string>();
  else if (key == "alpha") c.alpha = v.get<double>();
  else if (key == "k") c.k = v.get<std::size_t>();
  else if (key == "min_length") c.min_length = v.get<std::size_t>();
  else if (key == "max_length") c.max_length = v.get<std::size_t>();
  else if (key == "mode") c.mode = v.get<std::string>();
  else if (key == "search") c.search = v.get<std::string>();
  else if (key == "cumulative") c.cumulative = v.get<bool>();
  else if (key == "output_dir") c.output_dir = v.get<std::string>();
  else throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
}

}  // namespace

std::vector<std::string> PipelineConfig::keys() {
  std::vector<std::string> out;
  const json defaults = config_json(PipelineConfig{});
  for (const auto& [k, v] : defaults.items()) out.push_back(k);
  return out;
}

void PipelineConfig::validate() const {
  if (input.empty()) throw Error(ErrorCode::InvalidConfig, "input is required");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw Error(ErrorCode::InvalidConfig, "train_fraction in (0,1)");
  boost.validate();
  const auto method = importance_method_from_string(importance_method);
  if (method == ImportanceMethod::external && importance_path.empty()) {
    throw Error(ErrorCode::InvalidConfig, "importance_method external needs importance_path");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidConfig, "alpha in (0,1)");
  mining().validate();
  utility_mode_from_string(mode);
  if (search != "exact" && search != "beam") throw Error(ErrorCode::InvalidConfig, "search must be exact or beam");
  if (output_dir.empty()) throw Error(ErrorCode::InvalidConfig, "output_dir is required");
}

MiningConfig PipelineConfig::mining() const {
  MiningConfig m;
  m.k = k;
  m.min_length = min_length;
  if (max_length > 0) m.max_length = max_length;
  return m;
}

std::string PipelineConfig::fingerprint() const {
  json j = config_json(*this);
  j.erase("output_dir");
  return fingerprint_of(j.dump());
}

std::string PipelineConfig::to_json() const { return config_json(*this).dump(1) + "\n"; }

PipelineConfig PipelineConfig::from_json(const std::string& text) {
  PipelineConfig c;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
    for (const auto& [key, value] : j.items()) load_field(c, key, value);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  return c;
}

void PipelineConfig::set(std::string_view key, const std::string& value) {
  const json current = config_json(*this);
  const std::string k(key);
  if (!current.contains(k)) throw Error(ErrorCode::InvalidConfig, "unknown config key '" + k + "'");
  const json& slot = current.at(k);
  json parsed;
  try {
    if (slot.is_string()) {
      parsed = value;
    } else if (slot.is_array()) {
      std::vector<std::string> parts;
      std::string cur;
      std::istringstream ss(value);
      while (std::getline(ss, cur, ',')) {
        if (!cur.empty()) parts.push_back(cur);
      }
      parsed = parts;
    } else if (slot.is_boolean()) {
      if (value != "true" && value != "false") throw Error(ErrorCode::InvalidConfig, k + " expects true or false");
      parsed = value == "true";
    } else {
      parsed = json::parse(value);
      if (!parsed.is_number()) throw Error(ErrorCode::InvalidConfig, k + " expects a number");
      if (slot.is_number_unsigned() && !parsed.is_number_unsigned()) {
        throw Error(ErrorCode::InvalidConfig, k + " expects a nonnegative integer");
      }
      if (slot.is_number_integer() && !parsed.is_number_integer()) {
        throw Error(ErrorCode::InvalidConfig, k + " expects an integer");
      }
    }
    load_field(*this, k, parsed);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, k + ": " + e.what());
  }
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingArtifact: return 3;
    case ErrorCode::IoError: return 1;
    default: return 2;
  }
}

namespace {

struct Splits {
  ColumnarDataset train;
  ColumnarDataset test;
};

Splits prepare(const PipelineConfig& cfg) {
  auto ds = load_csv(cfg.input, cfg.label_column, cfg.positive_label);
  ds = drop_columns(ds, cfg.drop_columns);
  auto [train, test] = split(ds, SplitSpec{cfg.train_fraction, cfg.seed});
  return {std::move(train), std::move(test)};
}

fs::path out_path(const PipelineConfig& cfg, std::string_view name) { return fs::path(cfg.output_dir) / name; }

std::string read_artifact(const PipelineConfig& cfg, std::string_view name) {
  const auto p = out_path(cfg, name);
  if (!fs::exists(p)) throw Error(ErrorCode::MissingArtifact, p.string() + " (run the earlier pipeline step first)");
  return read_file(p);
}

json read_json_artifact(const PipelineConfig& cfg, std::string_view name) {
  try {
    return json::parse(read_artifact(cfg, name));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string(name) + ": " + e.what());
  }
}

void write(const PipelineConfig& cfg, std::string_view name, const std::string& contents) {
  write_file_atomic(out_path(cfg, name), contents);
}

json metrics_json(const Metrics& m) {
  return {{"auc", m.auc_defined ? json(m.auc) : json(nullptr)}, {"accuracy", m.accuracy}, {"recall", m.recall}, {"precision", m.precision}, {"f1", m.f1}};
}

Metrics metrics_from_json(const json& j) {
  const json& auc = j.at("auc");
  Metrics m{auc.is_null() ? 0.0 : auc.get<double>(), j.at("accuracy"), j.at("recall"), j.at("precision"), j.at("f1")};
  m.auc_defined = !auc.is_null();
  return m;
}

std::string with_lineage(const std::string& doc_text, const json& lineage) {
  json doc = json::parse(doc_text);
  doc["lineage"] = lineage;
  return doc.dump(1) + "\n";
}

void require_lineage(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::LineageMismatch, what + " (re-run the earlier steps with this config)");
}

std::string importance_comment(const std::string& config_fp, const std::string& dataset_fp) {
  return "lineage config=" + config_fp + " dataset=" + dataset_fp;
}

void require_importance_lineage(const std::string& importance_text, const std::string& config_fp,
                                const std::string& train_fp) {
  const std::string expected = "# " + importance_comment(config_fp, train_fp) + "\n";
  require_lineage(importance_text.starts_with(expected), "importance.csv was produced with a different config");
}

ImportanceTable resolve_importance(const PipelineConfig& cfg, const BoostedModel& model,
                                   const ColumnarDataset& train) {
  const auto method = importance_method_from_string(cfg.importance_method);
  if (method != ImportanceMethod::external) return importance(model, train, method);
  auto table = load_importance(cfg.importance_path);
  const auto features = train.feature_names();
  for (const auto& [name, s] : table.scores) {
    if (std::find(features.begin(), features.end(), name) == features.end()) {
      throw Error(ErrorCode::UnknownColumn, "importance file names '" + name + "', not a training feature");
    }
  }
  return table;
}

std::string contributions_csv(const BoostedModel& model, const ColumnarDataset& train) {
  const auto contrib = path_contributions(model, train);
  const auto features = train.feature_indices();
  std::ostringstream out;
  out << "row_id,feature,value,contribution\n";
  char buf[64];
  for (std::size_t r = 0; r < train.n_rows(); ++r) {
    for (std::size_t f = 0; f < features.size(); ++f) {
      const std::size_t c = features[f];
      const auto& col = train.schema()[c];
      out << train.row_ids()[r] << ',' << csv_escape(col.name) << ',';
      if (col.kind == ColumnKind::categorical) {
        out << csv_escape(train.decode(c, r));
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", train.column(c)[r]);
        out << buf;
      }
      std::snprintf(buf, sizeof buf, "%.17g", contrib[r][f]);
      out << ',' << buf << '\n';
    }
  }
  return out.str();
}

}  // namespace

void cmd_train(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto [train, test] = prepare(cfg);
  const std::string cfg_fp = cfg.fingerprint();
  log << "train: " << train.n_rows() << " rows, test: " << test.n_rows() << " rows, "
      << train.feature_names().size() << " features\n";

  const auto model = hafcp::train(train, cfg.boost);
  const auto metrics = evaluate(test.labels(), predict_proba(model, test), 0.5, SingleClass::mark_undefined);
  if (!metrics.auc_defined) log << "warning: the test split holds a single class; AUC is undefined\n";
  const auto table = resolve_importance(cfg, model, train);
  if (!table.has_positive()) {
    log << "warning: every importance score is zero (the model never split); "
           "mining needs an external importance table\n";
  }

  const json lineage{{"config", cfg_fp}, {"train", train.fingerprint()}, {"test", test.fingerprint()}};
  write(cfg, artifact::kConfig, cfg.to_json());
  write(cfg, artifact::kModel, with_lineage(model_to_json(model), lineage));
  write(cfg, artifact::kImportance, importance_to_csv(table, importance_comment(cfg_fp, train.fingerprint())));
  write(cfg, artifact::kContributions, contributions_csv(model, train));
  json baseline{{"format", "hafcp-metrics"},
                {"metrics", metrics_json(metrics)},
                {"n_train", train.n_rows()},
                {"n_test", test.n_rows()},
                {"importance_method", to_string(table.method)},
                {"lineage", lineage}};
  write(cfg, artifact::kBaseline, baseline.dump(1) + "\n");
  if (metrics.auc_defined) log << "baseline AUC " << metrics.auc << ", ";
  log << "baseline recall " << metrics.recall << "\n";
}

void cmd_fuzzify(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate();
  const std::string importance_text = read_artifact(cfg, artifact::kImportance);
  const auto [train, test] = prepare(cfg);
  const std::string cfg_fp = cfg.fingerprint();

  require_importance_lineage(importance_text, cfg_fp, train.fingerprint());

  const auto specs = fit_specs(train, FitOptions{cfg.alpha, cfg.seed});
  if (specs.empty()) log << "warning: no numeric columns to fuzzify\n";
  for (const auto& s : specs) {
    log << "fuzzify: " << s.column << " W=" << s.normality.w_statistic << " p=" << s.normality.p_value << " -> "
        << to_string(s.family) << "\n";
  }
  const std::string specs_text =
      with_lineage(specs_to_json(specs, cfg.alpha), {{"config", cfg_fp}, {"train", train.fingerprint()}});
  const auto frame = to_binary_frame(train, specs);
  const std::string frame_text = with_lineage(
      frame_to_json(frame),
      {{"config", cfg_fp}, {"specs", fingerprint_of(specs_text)}, {"importance", fingerprint_of(importance_text)}});
  write(cfg, artifact::kSpecs, specs_text);
  write(cfg, artifact::kFrame, frame_text);
  log << "frame: " << frame.n_rows << " rows x " << frame.items.size() << " items\n";
}

void cmd_mine(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate();
  const std::string frame_text = read_artifact(cfg, artifact::kFrame);
  const std::string importance_text = read_artifact(cfg, artifact::kImportance);
  const std::string cfg_fp = cfg.fingerprint();

  const auto frame = frame_from_json(frame_text);
  const auto lineage = json::parse(frame_text).value("lineage", json::object());
  require_lineage(lineage.value("config", "") == cfg_fp, "frame.json was produced with a different config");
  const auto [train, test] = prepare(cfg);
  require_lineage(frame.source_fingerprint == train.fingerprint() && frame.spec_fingerprint == train.fingerprint(),
                  "frame.json does not come from this config's training split");
  require_importance_lineage(importance_text, cfg_fp, train.fingerprint());

  const auto table = parse_importance(importance_text);
  const auto mode = utility_mode_from_string(cfg.mode);
  const auto [db, profits] = build_transactions(frame, table, mode);
  log << "mine: " << db.transactions.size() << " churned transactions, " << db.items.size() << " items, mode "
      << cfg.mode << ", search " << cfg.search << "\n";
  const auto patterns =
      cfg.search == "beam" ? beam_topk(db, profits, cfg.mining()) : mine_topk(db, profits, cfg.mining());

  const json pattern_lineage{{"config", cfg_fp},
                             {"train", db.source_fingerprint},
                             {"frame", fingerprint_of(frame_text)},
                             {"importance", fingerprint_of(importance_text)}};
  std::string lines;
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    json line = json::parse(pattern_to_json_line(patterns[i], i + 1));
    line["lineage"] = pattern_lineage;
    lines += line.dump() + "\n";
  }
  write(cfg, artifact::kPatterns, lines);
  std::string title = "Top-" + std::to_string(cfg.k) + " highly associated fuzzy churn patterns (" + cfg.mode +
                      " utility; config " + cfg_fp + ")";
  write(cfg, artifact::kPatternTable, render_pattern_table(patterns, title));
  log << "mine: " << patterns.size() << " patterns written\n";
}

void cmd_report(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate();
  const std::string patterns_text = read_artifact(cfg, artifact::kPatterns);
  const std::string frame_text = read_artifact(cfg, artifact::kFrame);
  const std::string specs_text = read_artifact(cfg, artifact::kSpecs);
  const std::string importance_text = read_artifact(cfg, artifact::kImportance);
  const json baseline_doc = read_json_artifact(cfg, artifact::kBaseline);
  const std::string cfg_fp = cfg.fingerprint();

  const auto [train, test] = prepare(cfg);
  std::vector<Pattern> patterns;
  std::istringstream lines(patterns_text);
  for (std::string line; std::getline(lines, line);) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const auto& lin = j.at("lineage");
    require_lineage(lin.value("config", "") == cfg_fp, "patterns were mined with a different config");
    require_lineage(lin.value("train", "") == train.fingerprint(), "patterns were not mined from this training split");
    require_lineage(lin.value("frame", "") == fingerprint_of(frame_text), "frame.json changed after mining");
    require_lineage(lin.value("importance", "") == fingerprint_of(importance_text), "importance.csv changed after mining");
    patterns.push_back(pattern_from_json_line(line));
  }
  const auto frame_lineage = json::parse(frame_text).value("lineage", json::object());
  require_lineage(frame_lineage.value("specs", "") == fingerprint_of(specs_text), "membership specs changed after fuzzify");
  require_lineage(baseline_doc.at("lineage").value("config", "") == cfg_fp, "baseline metrics use a different config");
  if (patterns.empty()) throw Error(ErrorCode::InvalidConfig, "no patterns to evaluate");

  const auto specs = specs_from_json(specs_text);
  const Metrics baseline = metrics_from_json(baseline_doc.at("metrics"));

  std::vector<std::pair<std::size_t, Metrics>> rows(patterns.size());
  parallel_for(patterns.size(), [&](std::size_t i) {
    const std::span<const Pattern> all(patterns);
    const auto used = cfg.cumulative ? all.first(i + 1) : all.subspan(i, 1);
    rows[i] = {i + 1, evaluate_with_patterns(train, test, specs, used, cfg.boost, SingleClass::mark_undefined)};
  });
  const auto report = build_report(baseline, rows, cfg_fp);
  write(cfg, artifact::kReportJson, report_to_json(report, patterns));
  write(cfg, artifact::kReportMarkdown, report_to_markdown(report));
  log << "report: baseline recall " << baseline.recall << ", average recall " << report.average.recall << "\n";
}

void cmd_pipeline(const PipelineConfig& cfg, std::ostream& log) {
  cmd_train(cfg, log);
  cmd_fuzzify(cfg, log);
  cmd_mine(cfg, log);
  cmd_report(cfg, log);
}

}  // namespace hafcp
