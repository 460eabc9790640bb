#include "hafcp/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "hafcp/error.hpp"
#include "hafcp/io.hpp"
#include "hafcp/parallel.hpp"

namespace hafcp {

using json = nlohmann::json;

void BoostParams::validate() const {
  if (max_depth < 1) throw Error(ErrorCode::InvalidConfig, "max_depth must be positive");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw Error(ErrorCode::InvalidConfig, "learning_rate in (0,1]");
  if (n_estimators < 1) throw Error(ErrorCode::InvalidConfig, "n_estimators must be positive");
  if (!(min_child_weight >= 0.0)) throw Error(ErrorCode::InvalidConfig, "min_child_weight must be nonnegative");
  if (!(lambda_l2 >= 0.0)) throw Error(ErrorCode::InvalidConfig, "lambda_l2 must be nonnegative");
}

namespace {

double sigmoid(double m) { return 1.0 / (1.0 + std::exp(-m)); }

struct SplitCandidate {
  double gain = 0.0;
  std::int32_t feature = -1;
  double threshold = 0.0;
};

// Column-major feature view in model feature order.
struct FeatureMatrix {
  std::vector<const std::vector<double>*> cols;

  double at(std::size_t row, std::size_t f) const { return (*cols[f])[row]; }
  std::size_t n_features() const { return cols.size(); }
};

FeatureMatrix feature_matrix(const ColumnarDataset& ds, const std::vector<std::string>& expected) {
  FeatureMatrix fm;
  const auto names = ds.feature_names();
  if (names != expected) {
    throw Error(ErrorCode::SchemaMismatch, "dataset features do not match the model's feature list");
  }
  for (std::size_t c : ds.feature_indices()) fm.cols.push_back(&ds.column(c));
  return fm;
}

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, std::span<const double> grad, std::span<const double> hess,
              const BoostParams& params, std::vector<double>& row_output)
      : x_(x), grad_(grad), hess_(hess), params_(params), row_output_(row_output), goes_left_(grad.size()) {}

  RegressionTree build(const std::vector<std::vector<std::uint32_t>>& presorted) {
    std::vector<std::uint32_t> rows(grad_.size());
    std::iota(rows.begin(), rows.end(), 0u);
    tree_ = RegressionTree{};
    new_node();
    grow(0, 0, std::move(rows), presorted);
    fill_expectations(0);
    return std::move(tree_);
  }

 private:
  std::size_t new_node() {
    tree_.left.push_back(-1);
    tree_.right.push_back(-1);
    tree_.feature.push_back(-1);
    tree_.threshold.push_back(0.0);
    tree_.value.push_back(0.0);
    tree_.gain.push_back(0.0);
    tree_.cover.push_back(0.0);
    return tree_.size() - 1;
  }

  double score(double g, double h) const { return g * g / (h + params_.lambda_l2); }

  SplitCandidate best_for_feature(std::size_t f, const std::vector<std::uint32_t>& sorted, double g_total,
                                  double h_total) const {
    SplitCandidate best;
    best.feature = static_cast<std::int32_t>(f);
    const double parent = score(g_total, h_total);
    double gl = 0.0, hl = 0.0;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      gl += grad_[sorted[i]];
      hl += hess_[sorted[i]];
      const double here = x_.at(sorted[i], f);
      const double next = x_.at(sorted[i + 1], f);
      if (!(next > here)) continue;
      const double gr = g_total - gl;
      const double hr = h_total - hl;
      if (hl < params_.min_child_weight || hr < params_.min_child_weight) continue;
      const double gain = 0.5 * (score(gl, hl) + score(gr, hr) - parent);
      if (gain > best.gain) {
        best.gain = gain;
        best.threshold = next;
      }
    }
    return best;
  }

  void grow(std::size_t node, int depth, std::vector<std::uint32_t> rows,
            const std::vector<std::vector<std::uint32_t>>& sorted) {
    double g = 0.0, h = 0.0;
    for (std::uint32_t r : rows) {
      g += grad_[r];
      h += hess_[r];
    }
    tree_.cover[node] = h;

    SplitCandidate best;
    if (depth < params_.max_depth && rows.size() >= 2) {
      const std::size_t nf = x_.n_features();
      std::vector<SplitCandidate> per_feature(nf);
      auto search = [&](std::size_t f) { per_feature[f] = best_for_feature(f, sorted[f], g, h); };
      if (rows.size() * nf >= kParallelWork) {
        parallel_for(nf, search);
      } else {
        for (std::size_t f = 0; f < nf; ++f) search(f);
      }
      for (const auto& cand : per_feature) {
        if (cand.gain > best.gain) best = cand;
      }
    }

    if (best.feature < 0) {
      const double w = -g / (h + params_.lambda_l2) * params_.learning_rate;
      tree_.value[node] = w;
      for (std::uint32_t r : rows) row_output_[r] = w;
      return;
    }

    const auto f = static_cast<std::size_t>(best.feature);
    tree_.feature[node] = best.feature;
    tree_.threshold[node] = best.threshold;
    tree_.gain[node] = best.gain;

    for (std::uint32_t r : rows) goes_left_[r] = x_.at(r, f) < best.threshold;
    auto partition = [&](const std::vector<std::uint32_t>& in, std::vector<std::uint32_t>& l,
                         std::vector<std::uint32_t>& r) {
      for (std::uint32_t row : in) (goes_left_[row] ? l : r).push_back(row);
    };
    std::vector<std::uint32_t> rows_l, rows_r;
    partition(rows, rows_l, rows_r);
    rows.clear();
    rows.shrink_to_fit();

    const std::size_t nf = x_.n_features();
    std::vector<std::vector<std::uint32_t>> sorted_l(nf), sorted_r(nf);
    for (std::size_t k = 0; k < nf; ++k) {
      sorted_l[k].reserve(rows_l.size());
      sorted_r[k].reserve(rows_r.size());
      partition(sorted[k], sorted_l[k], sorted_r[k]);
    }

    const std::size_t l = new_node();
    const std::size_t r = new_node();
    tree_.left[node] = static_cast<std::int32_t>(l);
    tree_.right[node] = static_cast<std::int32_t>(r);
    grow(l, depth + 1, std::move(rows_l), sorted_l);
    sorted_l.clear();
    grow(r, depth + 1, std::move(rows_r), sorted_r);
  }

  // Expected output of internal nodes, weighting children by hessian cover.
  double fill_expectations(std::size_t node) {
    if (tree_.is_leaf(node)) return tree_.value[node];
    const auto l = static_cast<std::size_t>(tree_.left[node]);
    const auto r = static_cast<std::size_t>(tree_.right[node]);
    const double vl = fill_expectations(l);
    const double vr = fill_expectations(r);
    const double cl = tree_.cover[l];
    const double cr = tree_.cover[r];
    tree_.value[node] = (cl + cr) > 0.0 ? (cl * vl + cr * vr) / (cl + cr) : 0.5 * (vl + vr);
    return tree_.value[node];
  }

  static constexpr std::size_t kParallelWork = 1 << 15;

  const FeatureMatrix& x_;
  std::span<const double> grad_;
  std::span<const double> hess_;
  const BoostParams& params_;
  std::vector<double>& row_output_;
  std::vector<std::uint8_t> goes_left_;
  RegressionTree tree_;
};

}  // namespace

double log_loss(std::span<const std::uint8_t> y, std::span<const double> margin) {
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    // log(1 + exp(-s)) with s = +-margin, evaluated stably
    const double s = y[i] ? margin[i] : -margin[i];
    total += s > 0 ? std::log1p(std::exp(-s)) : -s + std::log1p(std::exp(s));
  }
  return total / static_cast<double>(y.size());
}

BoostedModel train(const ColumnarDataset& train_set, const BoostParams& params, TrainTrace* trace) {
  params.validate();
  const std::size_t n = train_set.n_rows();
  if (n == 0) throw Error(ErrorCode::EmptyTrainingSet, "no rows");
  const auto y = train_set.labels();
  const auto n_pos = static_cast<std::size_t>(std::count(y.begin(), y.end(), std::uint8_t{1}));
  if (n < 2 || n_pos == 0 || n_pos == n) {
    throw Error(ErrorCode::SingleClassTraining, "training labels need both classes");
  }

  BoostedModel model;
  model.params = params;
  model.feature_names = train_set.feature_names();
  const double prior = static_cast<double>(n_pos) / static_cast<double>(n);
  model.base_score = std::log(prior / (1.0 - prior));

  const FeatureMatrix x = feature_matrix(train_set, model.feature_names);
  const std::size_t nf = x.n_features();
  std::vector<std::vector<std::uint32_t>> presorted(nf);
  parallel_for(nf, [&](std::size_t f) {
    auto& idx = presorted[f];
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), 0u);
    std::stable_sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) { return x.at(a, f) < x.at(b, f); });
  });

  std::vector<double> margin(n, model.base_score);
  std::vector<double> grad(n), hess(n), tree_out(n);
  if (trace) trace->log_loss = {log_loss(y, margin)};

  for (int round = 0; round < params.n_estimators; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margin[i]);
      grad[i] = p - static_cast<double>(y[i]);
      hess[i] = p * (1.0 - p);
    }
    TreeBuilder builder(x, grad, hess, params, tree_out);
    model.trees.push_back(builder.build(presorted));
    for (std::size_t i = 0; i < n; ++i) margin[i] += tree_out[i];
    if (trace) trace->log_loss.push_back(log_loss(y, margin));
  }
  return model;
}

std::vector<double> predict_margin(const BoostedModel& model, const ColumnarDataset& ds) {
  const FeatureMatrix x = feature_matrix(ds, model.feature_names);
  std::vector<double> out(ds.n_rows(), model.base_score);
  for (const auto& tree : model.trees) {
    for (std::size_t r = 0; r < out.size(); ++r) {
      out[r] += tree.value[tree.leaf_for([&](std::size_t f) { return x.at(r, f); })];
    }
  }
  return out;
}

std::vector<double> predict_proba(const BoostedModel& model, const ColumnarDataset& ds) {
  auto out = predict_margin(model, ds);
  for (double& m : out) m = sigmoid(m);
  return out;
}

std::vector<std::vector<double>> path_contributions(const BoostedModel& model, const ColumnarDataset& ds) {
  const FeatureMatrix x = feature_matrix(ds, model.feature_names);
  const std::size_t nf = x.n_features();
  double bias = model.base_score;
  for (const auto& tree : model.trees) bias += tree.value[0];
  std::vector<std::vector<double>> out(ds.n_rows(), std::vector<double>(nf + 1, 0.0));
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    auto& row = out[r];
    for (const auto& tree : model.trees) {
      std::size_t node = 0;
      while (!tree.is_leaf(node)) {
        const auto f = static_cast<std::size_t>(tree.feature[node]);
        const auto child = static_cast<std::size_t>(x.at(r, f) < tree.threshold[node] ? tree.left[node]
                                                                                         : tree.right[node]);
        row[f] += tree.value[child] - tree.value[node];
        node = child;
      }
    }
    row[nf] = bias;
  }
  return out;
}

std::string_view to_string(ImportanceMethod method) {
  switch (method) {
    case ImportanceMethod::gain: return "gain";
    case ImportanceMethod::path_attribution: return "path_attribution";
    case ImportanceMethod::external: return "external";
  }
  return "?";
}

ImportanceMethod importance_method_from_string(std::string_view name) {
  if (name == "gain") return ImportanceMethod::gain;
  if (name == "path_attribution") return ImportanceMethod::path_attribution;
  if (name == "external") return ImportanceMethod::external;
  throw Error(ErrorCode::InvalidConfig, "unknown importance method '" + std::string(name) + "'");
}

std::optional<double> ImportanceTable::score(std::string_view feature) const {
  for (const auto& [name, s] : scores) {
    if (name == feature) return s;
  }
  return std::nullopt;
}

bool ImportanceTable::has_positive() const {
  return std::any_of(scores.begin(), scores.end(), [](const auto& kv) { return kv.second > 0.0; });
}

ImportanceTable importance(const BoostedModel& model, const ColumnarDataset& train_set, ImportanceMethod method) {
  if (model.trees.empty()) throw Error(ErrorCode::EmptyModel, "model has no trees");
  const std::size_t nf = model.feature_names.size();
  std::vector<double> totals(nf, 0.0);
  switch (method) {
    case ImportanceMethod::gain:
      for (const auto& tree : model.trees) {
        for (std::size_t i = 0; i < tree.size(); ++i) {
          if (!tree.is_leaf(i)) totals[static_cast<std::size_t>(tree.feature[i])] += tree.gain[i];
        }
      }
      break;
    case ImportanceMethod::path_attribution: {
      const auto contrib = path_contributions(model, train_set);
      for (const auto& row : contrib) {
        for (std::size_t f = 0; f < nf; ++f) totals[f] += std::abs(row[f]);
      }
      if (!contrib.empty()) {
        for (double& t : totals) t /= static_cast<double>(contrib.size());
      }
      break;
    }
    case ImportanceMethod::external:
      throw Error(ErrorCode::InvalidConfig, "external importance is loaded from a file, not computed");
  }
  ImportanceTable table;
  table.method = method;
  for (std::size_t f = 0; f < nf; ++f) table.scores.emplace_back(model.feature_names[f], totals[f]);
  return table;
}

ImportanceTable parse_importance(const std::string& csv_text) {
  ImportanceTable table;
  table.method = ImportanceMethod::external;
  bool first = true;
  for (auto& rec : parse_csv(csv_text)) {
    if (rec.empty() || (rec.size() == 1 && rec[0].empty())) continue;
    if (!rec[0].empty() && rec[0][0] == '#') continue;
    if (rec.size() != 2) throw Error(ErrorCode::ParseError, "expected two fields per line");
    if (first && rec[0] == "feature" && rec[1] == "score") {
      first = false;
      continue;
    }
    first = false;
    double v = 0.0;
    std::size_t used = 0;
    try {
      v = std::stod(rec[1], &used);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "bad score '" + rec[1] + "' for '" + rec[0] + "'");
    }
    if (used != rec[1].size() || !std::isfinite(v)) {
      throw Error(ErrorCode::ParseError, "bad score '" + rec[1] + "' for '" + rec[0] + "'");
    }
    if (v < 0.0) throw Error(ErrorCode::NegativeScore, rec[0] + " = " + rec[1]);
    if (table.score(rec[0])) throw Error(ErrorCode::ParseError, "duplicate feature '" + rec[0] + "'");
    table.scores.emplace_back(rec[0], v);
  }
  if (table.scores.empty()) throw Error(ErrorCode::ParseError, "no scores");
  return table;
}

ImportanceTable load_importance(const std::filesystem::path& path) { return parse_importance(read_file(path)); }

std::string importance_to_csv(const ImportanceTable& table, const std::string& comment) {
  std::ostringstream out;
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "feature,score\n";
  for (const auto& [name, s] : table.scores) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", s);
    out << csv_escape(name) << ',' << buf << '\n';
  }
  return out.str();
}

std::string model_to_json(const BoostedModel& model) {
  json doc;
  doc["format"] = "hafcp-gbdt";
  doc["version"] = 1;
  doc["params"] = {{"max_depth", model.params.max_depth},
                   {"learning_rate", model.params.learning_rate},
                   {"n_estimators", model.params.n_estimators},
                   {"min_child_weight", model.params.min_child_weight},
                   {"lambda_l2", model.params.lambda_l2},
                   {"seed", model.params.seed}};
  doc["base_score"] = model.base_score;
  doc["features"] = model.feature_names;
  json trees = json::array();
  for (const auto& t : model.trees) {
    trees.push_back({{"left", t.left},
                     {"right", t.right},
                     {"feature", t.feature},
                     {"threshold", t.threshold},
                     {"value", t.value},
                     {"gain", t.gain},
                     {"cover", t.cover}});
  }
  doc["trees"] = std::move(trees);
  return doc.dump(1);
}

BoostedModel model_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format") != "hafcp-gbdt" || doc.at("version") != 1) {
      throw Error(ErrorCode::ParseError, "not a version-1 hafcp-gbdt document");
    }
    BoostedModel m;
    const auto& p = doc.at("params");
    m.params.max_depth = p.at("max_depth");
    m.params.learning_rate = p.at("learning_rate");
    m.params.n_estimators = p.at("n_estimators");
    m.params.min_child_weight = p.at("min_child_weight");
    m.params.lambda_l2 = p.at("lambda_l2");
    m.params.seed = p.at("seed");
    m.base_score = doc.at("base_score");
    m.feature_names = doc.at("features").get<std::vector<std::string>>();
    for (const auto& t : doc.at("trees")) {
      RegressionTree tree;
      tree.left = t.at("left").get<std::vector<std::int32_t>>();
      tree.right = t.at("right").get<std::vector<std::int32_t>>();
      tree.feature = t.at("feature").get<std::vector<std::int32_t>>();
      tree.threshold = t.at("threshold").get<std::vector<double>>();
      tree.value = t.at("value").get<std::vector<double>>();
      tree.gain = t.at("gain").get<std::vector<double>>();
      tree.cover = t.at("cover").get<std::vector<double>>();
      const std::size_t n = tree.left.size();
      if (n == 0 || tree.right.size() != n || tree.feature.size() != n || tree.threshold.size() != n ||
          tree.value.size() != n || tree.gain.size() != n || tree.cover.size() != n) {
        throw Error(ErrorCode::ParseError, "inconsistent node arrays");
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (tree.left[i] < 0) continue;
        if (tree.feature[i] < 0 || static_cast<std::size_t>(tree.feature[i]) >= m.feature_names.size() ||
            static_cast<std::size_t>(tree.left[i]) >= n || tree.right[i] < 0 ||
            static_cast<std::size_t>(tree.right[i]) >= n) {
          throw Error(ErrorCode::ParseError, "node index out of range");
        }
      }
      m.trees.push_back(std::move(tree));
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

}  // namespace hafcp
