#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "hafcp/io.hpp"
#include "hafcp/pipeline.hpp"
#include "synthetic.hpp"

using namespace hafcp;
using testing::run_cli;
using testing::scratch_dir;
using testing::slurp;

namespace {

const std::string kAppendix = testing::data_path("appendix.csv").string();
const std::string kAppendixImportance = testing::data_path("appendix_importance.csv").string();

std::vector<std::string> appendix_args(const std::string& cmd, const std::filesystem::path& out) {
  return {cmd, "--input", kAppendix, "--drop_columns", "ID", "--importance_method", "external", "--importance_path",
          kAppendixImportance, "--output_dir", out.string()};
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("config round trip and overrides") {
  PipelineConfig cfg;
  cfg.set("k", "7");
  cfg.set("drop_columns", "ID,STATE");
  cfg.set("learning_rate", "0.1");
  cfg.set("cumulative", "true");
  CHECK(cfg.k == 7);
  CHECK(cfg.drop_columns == std::vector<std::string>{"ID", "STATE"});
  CHECK(cfg.boost.learning_rate == 0.1);
  CHECK(cfg.cumulative);
  const auto back = PipelineConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  CHECK(back.fingerprint() == cfg.fingerprint());

  auto moved = cfg;
  moved.output_dir = "elsewhere";
  CHECK(moved.fingerprint() == cfg.fingerprint());
  moved.seed = 1;
  CHECK(moved.fingerprint() != cfg.fingerprint());
  CHECK_THROWS_AS(cfg.set("nonexistent", "1"), Error);
  CHECK_THROWS_AS(cfg.set("k", "many"), Error);
  for (const auto& key : PipelineConfig::keys()) CHECK(key.find('-') == std::string::npos);
}

TEST_CASE("exit code classes") {
  CHECK(exit_code_for(ErrorCode::MissingArtifact) == 3);
  CHECK(exit_code_for(ErrorCode::MissingLabelColumn) == 2);
  CHECK(exit_code_for(ErrorCode::InvalidConfig) == 2);
  CHECK(exit_code_for(ErrorCode::IoError) == 1);
}

TEST_CASE("train on the appendix with defaults") {
  const auto out = scratch_dir("train_defaults");
  const auto r = run_cli({"train", "--input", kAppendix, "--output_dir", out.string()});
  CHECK(r.exit_code == 0);
  for (auto name : {artifact::kModel, artifact::kImportance, artifact::kBaseline, artifact::kConfig}) {
    CHECK(std::filesystem::exists(out / name));
  }
  const auto first = slurp(out / artifact::kModel);
  CHECK(run_cli({"train", "--input", kAppendix, "--output_dir", out.string()}).exit_code == 0);
  CHECK(slurp(out / artifact::kModel) == first);
}

TEST_CASE("bad label column exits with code 2") {
  const auto out = scratch_dir("bad_label");
  const auto r = run_cli({"train", "--input", kAppendix, "--label_column", "Exited", "--output_dir", out.string()});
  CHECK(r.exit_code == 2);
  CHECK(r.stderr_text.find("MissingLabelColumn") != std::string::npos);
}

TEST_CASE("unknown flag and missing config exit with code 2") {
  CHECK(run_cli({"train", "--bogus", "1"}).exit_code == 2);
  CHECK(run_cli({"train", "-c", "/nonexistent/config.json"}).exit_code == 2);
  CHECK(run_cli({"train", "--input", "/nonexistent/data.csv"}).exit_code == 3);
}

TEST_CASE("fuzzify the appendix") {
  const auto out = scratch_dir("fuzzify");
  REQUIRE(run_cli(appendix_args("train", out)).exit_code == 0);
  REQUIRE(run_cli(appendix_args("fuzzify", out)).exit_code == 0);
  const auto doc = nlohmann::json::parse(slurp(out / artifact::kSpecs));
  REQUIRE(doc.at("specs").size() == 2);
  CHECK(doc.at("specs")[0].at("column") == "Age");
  CHECK(doc.at("specs")[1].at("column") == "Spending");
}

TEST_CASE("fuzzify without numeric columns warns") {
  const auto out = scratch_dir("fuzzify_none");
  auto args = appendix_args("train", out);
  args[4] = "ID,Age,Spending";
  args[6] = "gain";
  REQUIRE(run_cli(args).exit_code == 0);
  args[0] = "fuzzify";
  const auto r = run_cli(args);
  CHECK(r.exit_code == 0);
  CHECK(r.stderr_text.find("warning") != std::string::npos);
  CHECK(nlohmann::json::parse(slurp(out / artifact::kSpecs)).at("specs").empty());
}

TEST_CASE("zero-variance column names the column") {
  const auto dir = scratch_dir("zero_var");
  write_file_atomic(dir / "flat.csv", "x,Flat,Churn\n1,5,0\n2,5,1\n3,5,0\n4,5,1\n5,5,0\n6,5,1\n7,5,0\n8,5,1\n9,5,1\n10,5,0\n");
  const std::vector<std::string> base = {"--input", (dir / "flat.csv").string(), "--output_dir", (dir / "out").string()};
  auto args = base;
  args.insert(args.begin(), "train");
  REQUIRE(run_cli(args).exit_code == 0);
  args[0] = "fuzzify";
  const auto r = run_cli(args);
  CHECK(r.exit_code == 2);
  CHECK(r.stderr_text.find("DegenerateColumn") != std::string::npos);
  CHECK(r.stderr_text.find("Flat") != std::string::npos);
}

TEST_CASE("mine the appendix") {
  const auto out = scratch_dir("mine");
  for (auto step : {"train", "fuzzify", "mine"}) REQUIRE(run_cli(appendix_args(step, out)).exit_code == 0);
  const auto lines = slurp(out / artifact::kPatterns);
  CHECK(count_lines(lines) == 5);
  CHECK(slurp(out / artifact::kPatternTable).find("Rank") != std::string::npos);

  auto zero = appendix_args("mine", out);
  zero.insert(zero.end(), {"--k", "0"});
  const auto r = run_cli(zero);
  CHECK(r.exit_code == 2);
  CHECK(r.stderr_text.find("InvalidConfig") != std::string::npos);
}

TEST_CASE("membership utilities stay below binary ones") {
  const auto bin = scratch_dir("mode_binary");
  const auto mem = scratch_dir("mode_membership");
  REQUIRE(run_cli(appendix_args("pipeline", bin)).exit_code == 0);
  auto args = appendix_args("pipeline", mem);
  args.insert(args.end(), {"--mode", "membership"});
  REQUIRE(run_cli(args).exit_code == 0);

  auto read_patterns = [](const std::filesystem::path& p) {
    std::vector<Pattern> out;
    std::istringstream in(slurp(p));
    for (std::string line; std::getline(in, line);) out.push_back(pattern_from_json_line(line));
    return out;
  };
  const auto b = read_patterns(bin / artifact::kPatterns);
  const auto m = read_patterns(mem / artifact::kPatterns);
  REQUIRE(!m.empty());
  for (const auto& p : m) {
    // every membership pattern scores at most its binary utility (support x unit profit)
    double unit = 0;
    for (const auto& item : p.items) unit += item.starts_with("Age") ? 0.5 : item.starts_with("Spending") ? 0.3 : 0.2;
    CHECK(p.utility <= p.support * unit + 1e-12);
  }
  for (std::size_t i = 0; i < std::min(b.size(), m.size()); ++i) CHECK(m[i].utility <= b[i].utility + 1e-12);
}

TEST_CASE("report needs the patterns file") {
  const auto out = scratch_dir("report_missing");
  REQUIRE(run_cli(appendix_args("train", out)).exit_code == 0);
  REQUIRE(run_cli(appendix_args("fuzzify", out)).exit_code == 0);
  const auto r = run_cli(appendix_args("report", out));
  CHECK(r.exit_code == 3);
  CHECK(r.stderr_text.find("MissingArtifact") != std::string::npos);
}

TEST_CASE("pipeline equals the four steps") {
  const auto a = scratch_dir("chain_pipeline");
  const auto b = scratch_dir("chain_steps");
  REQUIRE(run_cli(appendix_args("pipeline", a)).exit_code == 0);
  for (auto step : {"train", "fuzzify", "mine", "report"}) REQUIRE(run_cli(appendix_args(step, b)).exit_code == 0);
  std::size_t n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(a)) {
    ++n;
    // config.json records output_dir, which differs here by construction
    if (entry.path().filename() == artifact::kConfig) continue;
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
  }
  CHECK(n == 11);
  const auto md = slurp(a / artifact::kReportMarkdown);
  CHECK(md.find("| Metric | Baseline | Top-1 | Top-2 | Top-3 | Top-4 | Top-5 | AVG |") != std::string::npos);
}

TEST_CASE("mismatched lineage is refused") {
  const auto out = scratch_dir("lineage");
  REQUIRE(run_cli(appendix_args("pipeline", out)).exit_code == 0);
  auto args = appendix_args("report", out);
  args.insert(args.end(), {"--seed", "7"});
  auto r = run_cli(args);
  CHECK(r.exit_code == 2);
  CHECK(r.stderr_text.find("LineageMismatch") != std::string::npos);

  args[0] = "fuzzify";
  r = run_cli(args);
  CHECK(r.exit_code == 2);
  CHECK(r.stderr_text.find("LineageMismatch") != std::string::npos);

  // tampering with the frame after mining
  std::string frame = slurp(out / artifact::kFrame);
  write_file_atomic(out / artifact::kFrame, frame + " ");
  r = run_cli(appendix_args("report", out));
  CHECK(r.exit_code == 2);
  CHECK(r.stderr_text.find("LineageMismatch") != std::string::npos);
}

TEST_CASE("config file with command line override") {
  const auto out = scratch_dir("config_file");
  PipelineConfig cfg;
  cfg.input = kAppendix;
  cfg.drop_columns = {"ID"};
  cfg.importance_method = "external";
  cfg.importance_path = kAppendixImportance;
  cfg.output_dir = (out / "run").string();
  cfg.k = 3;
  write_file_atomic(out / "cfg.json", cfg.to_json());
  REQUIRE(run_cli({"pipeline", "-c", (out / "cfg.json").string(), "--k", "2"}).exit_code == 0);
  CHECK(count_lines(slurp(out / "run" / artifact::kPatterns)) == 2);
  const auto written = PipelineConfig::from_json(slurp(out / "run" / artifact::kConfig));
  CHECK(written.k == 2);
}

TEST_CASE("cumulative and beam options run") {
  const auto out = scratch_dir("options");
  auto args = appendix_args("pipeline", out);
  args.insert(args.end(), {"--cumulative", "true", "--search", "beam"});
  CHECK(run_cli(args).exit_code == 0);
  CHECK(std::filesystem::exists(out / artifact::kReportJson));
}
