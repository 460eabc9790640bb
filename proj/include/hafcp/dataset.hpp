#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hafcp {

enum class ColumnKind { numeric, categorical, label };

std::string_view to_string(ColumnKind kind);

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  /// Code i decodes to categories[i]; codes follow first appearance in the file.
  /// Empty for numeric columns.
  std::vector<std::string> categories;

  std::optional<std::size_t> code_of(std::string_view value) const;

  bool operator==(const ColumnSchema&) const = default;
};

/// Immutable column-major table. Every column (the label included) is stored as
/// doubles: reals for numeric columns, integer codes for categorical ones and
/// 0/1 for the label. `row_ids` are positions in the originally loaded file.
class ColumnarDataset {
 public:
  ColumnarDataset(std::vector<ColumnSchema> schema, std::vector<std::vector<double>> columns,
                  std::vector<std::size_t> row_ids, std::string fingerprint);

  const std::vector<ColumnSchema>& schema() const noexcept { return schema_; }
  std::size_t n_rows() const noexcept { return row_ids_.size(); }
  std::size_t n_columns() const noexcept { return schema_.size(); }

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t label_index() const noexcept { return label_index_; }
  const std::vector<double>& column(std::size_t i) const { return columns_.at(i); }
  const std::vector<double>& column(std::string_view name) const;
  std::span<const std::uint8_t> labels() const noexcept { return labels_; }
  const std::vector<std::size_t>& row_ids() const noexcept { return row_ids_; }

  /// Non-label column indices in schema order; this is the model feature order.
  std::vector<std::size_t> feature_indices() const;
  std::vector<std::string> feature_names() const;

  /// Original string for a categorical cell.
  const std::string& decode(std::size_t column, std::size_t row) const;

  /// Content-derived identity used for artifact lineage and leakage checks.
  const std::string& fingerprint() const noexcept { return fingerprint_; }

  ColumnarDataset take_rows(std::span<const std::size_t> rows, std::string fingerprint) const;

  /// Appends a numeric column after all existing columns.
  ColumnarDataset with_numeric_column(std::string name, std::vector<double> values) const;

 private:
  std::vector<ColumnSchema> schema_;
  std::vector<std::vector<double>> columns_;
  std::vector<std::uint8_t> labels_;
  std::vector<std::size_t> row_ids_;
  std::size_t label_index_ = 0;
  std::string fingerprint_;
};

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

ColumnarDataset parse_dataset(const std::string& csv_text, std::string_view label_column,
                              std::string_view positive_label);

ColumnarDataset load_csv(const std::filesystem::path& path, std::string_view label_column,
                         std::string_view positive_label);

/// Seeded Fisher-Yates split; the first floor(train_fraction * n) shuffled rows
/// form the training side.
std::pair<ColumnarDataset, ColumnarDataset> split(const ColumnarDataset& ds, const SplitSpec& spec);

ColumnarDataset drop_columns(const ColumnarDataset& ds, std::span<const std::string> names);

}  // namespace hafcp
