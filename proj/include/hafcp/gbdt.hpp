#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hafcp/dataset.hpp"

namespace hafcp {

struct BoostParams {
  int max_depth = 6;
  double learning_rate = 0.3;
  int n_estimators = 100;
  double min_child_weight = 1.0;
  double lambda_l2 = 1.0;
  // Training has no stochastic step; the seed is carried for provenance.
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const BoostParams&) const = default;
};

/// Flat node arrays. Node 0 is the root; a node is a leaf iff left[i] < 0.
/// Rows with x[feature] < threshold go left.
struct RegressionTree {
  std::vector<std::int32_t> left;
  std::vector<std::int32_t> right;
  std::vector<std::int32_t> feature;
  std::vector<double> threshold;
  /// Leaf: output weight (learning rate applied). Internal: hessian-weighted
  /// mean of the leaves below, i.e. the node's expected output.
  std::vector<double> value;
  std::vector<double> gain;
  std::vector<double> cover;

  std::size_t size() const noexcept { return left.size(); }
  bool is_leaf(std::size_t node) const noexcept { return left[node] < 0; }

  template <typename FeatureAt>
  std::size_t leaf_for(FeatureAt&& x) const {
    std::size_t node = 0;
    while (!is_leaf(node)) {
      node = static_cast<std::size_t>(x(static_cast<std::size_t>(feature[node])) < threshold[node] ? left[node]
                                                                                                   : right[node]);
    }
    return node;
  }

  bool operator==(const RegressionTree&) const = default;
};

struct BoostedModel {
  BoostParams params;
  double base_score = 0.0;
  std::vector<std::string> feature_names;
  std::vector<RegressionTree> trees;

  bool operator==(const BoostedModel&) const = default;
};

/// Mean training log-loss; entry 0 is the prior, entry r the loss after r trees.
struct TrainTrace {
  std::vector<double> log_loss;
};

/// Second-order logistic boosting with exact greedy splits. Split search is
/// parallel across features with an ordered reduction, so results do not
/// depend on the thread count. Equal gains resolve to the lowest feature
/// index, then the lowest threshold.
BoostedModel train(const ColumnarDataset& train, const BoostParams& params, TrainTrace* trace = nullptr);

std::vector<double> predict_margin(const BoostedModel& model, const ColumnarDataset& ds);
std::vector<double> predict_proba(const BoostedModel& model, const ColumnarDataset& ds);

/// Saabas path attribution. Row-major n_rows x (n_features + 1); the last
/// column is the bias (base_score plus every tree's root expectation), so each
/// row sums to the raw margin.
std::vector<std::vector<double>> path_contributions(const BoostedModel& model, const ColumnarDataset& ds);

enum class ImportanceMethod { gain, path_attribution, external };

std::string_view to_string(ImportanceMethod method);
ImportanceMethod importance_method_from_string(std::string_view name);

struct ImportanceTable {
  ImportanceMethod method = ImportanceMethod::gain;
  std::vector<std::pair<std::string, double>> scores;

  std::optional<double> score(std::string_view feature) const;
  bool has_positive() const;
};

/// Unnormalized per-feature importance. gain: summed split gains;
/// path_attribution: mean absolute Saabas contribution over `train` rows.
ImportanceTable importance(const BoostedModel& model, const ColumnarDataset& train, ImportanceMethod method);

/// Two-column CSV (feature,score). Lines starting with '#' and a leading
/// "feature,score" header are skipped.
ImportanceTable parse_importance(const std::string& csv_text);
ImportanceTable load_importance(const std::filesystem::path& path);
std::string importance_to_csv(const ImportanceTable& table, const std::string& comment = {});

std::string model_to_json(const BoostedModel& model);
BoostedModel model_from_json(const std::string& text);

double log_loss(std::span<const std::uint8_t> y, std::span<const double> margin);

}  // namespace hafcp
