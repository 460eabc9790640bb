#include "hafcp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <unordered_map>

#include "hafcp/error.hpp"
#include "hafcp/fingerprint.hpp"
#include "hafcp/io.hpp"
#include "hafcp/rng.hpp"

namespace hafcp {

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::label: return "label";
  }
  return "?";
}

std::optional<std::size_t> ColumnSchema::code_of(std::string_view value) const {
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i] == value) return i;
  }
  return std::nullopt;
}

ColumnarDataset::ColumnarDataset(std::vector<ColumnSchema> schema, std::vector<std::vector<double>> columns,
                                 std::vector<std::size_t> row_ids, std::string fingerprint)
    : schema_(std::move(schema)),
      columns_(std::move(columns)),
      row_ids_(std::move(row_ids)),
      fingerprint_(std::move(fingerprint)) {
  if (schema_.size() != columns_.size()) {
    throw Error(ErrorCode::SchemaMismatch, "schema and column counts differ");
  }
  const auto n_labels = std::count_if(schema_.begin(), schema_.end(),
                                      [](const ColumnSchema& c) { return c.kind == ColumnKind::label; });
  if (n_labels != 1) throw Error(ErrorCode::SchemaMismatch, "exactly one label column required");
  for (std::size_t c = 0; c < schema_.size(); ++c) {
    if (columns_[c].size() != row_ids_.size()) {
      throw Error(ErrorCode::SchemaMismatch, "column '" + schema_[c].name + "' has wrong length");
    }
    if (schema_[c].kind == ColumnKind::label) label_index_ = c;
  }
  labels_.reserve(row_ids_.size());
  for (double v : columns_[label_index_]) {
    if (v != 0.0 && v != 1.0) throw Error(ErrorCode::SchemaMismatch, "label values must be 0 or 1");
    labels_.push_back(static_cast<std::uint8_t>(v));
  }
}

std::optional<std::size_t> ColumnarDataset::find(std::string_view name) const {
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    if (schema_[i].name == name) return i;
  }
  return std::nullopt;
}

const std::vector<double>& ColumnarDataset::column(std::string_view name) const {
  const auto idx = find(name);
  if (!idx) throw Error(ErrorCode::UnknownColumn, std::string(name));
  return columns_[*idx];
}

std::vector<std::size_t> ColumnarDataset::feature_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    if (i != label_index_) out.push_back(i);
  }
  return out;
}

std::vector<std::string> ColumnarDataset::feature_names() const {
  std::vector<std::string> out;
  for (std::size_t i : feature_indices()) out.push_back(schema_[i].name);
  return out;
}

const std::string& ColumnarDataset::decode(std::size_t column, std::size_t row) const {
  const auto& cats = schema_.at(column).categories;
  return cats.at(static_cast<std::size_t>(columns_.at(column).at(row)));
}

ColumnarDataset ColumnarDataset::take_rows(std::span<const std::size_t> rows, std::string fingerprint) const {
  std::vector<std::vector<double>> cols(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    cols[c].reserve(rows.size());
    for (std::size_t r : rows) cols[c].push_back(columns_[c].at(r));
  }
  std::vector<std::size_t> ids;
  ids.reserve(rows.size());
  for (std::size_t r : rows) ids.push_back(row_ids_.at(r));
  return ColumnarDataset(schema_, std::move(cols), std::move(ids), std::move(fingerprint));
}

ColumnarDataset ColumnarDataset::with_numeric_column(std::string name, std::vector<double> values) const {
  if (values.size() != n_rows()) throw Error(ErrorCode::LengthMismatch, "new column '" + name + "'");
  if (find(name)) throw Error(ErrorCode::SchemaMismatch, "duplicate column '" + name + "'");
  Fingerprint fp;
  fp.add(fingerprint_).add(std::string_view("with_column")).add(name).add_all(std::span<const double>(values));
  auto schema = schema_;
  schema.push_back(ColumnSchema{std::move(name), ColumnKind::numeric, {}});
  auto cols = columns_;
  cols.push_back(std::move(values));
  return ColumnarDataset(std::move(schema), std::move(cols), row_ids_, fp.hex());
}

namespace {

std::optional<double> parse_real(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool is_missing(const std::string& cell) {
  return cell.find_first_not_of(" \t") == std::string::npos;
}

}  // namespace

ColumnarDataset parse_dataset(const std::string& csv_text, std::string_view label_column,
                              std::string_view positive_label) {
  auto records = parse_csv(csv_text);
  if (records.empty()) throw Error(ErrorCode::EmptyDataset, "no header row");
  const auto& header = records.front();
  const std::size_t n_cols = header.size();
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) {
    throw Error(ErrorCode::MissingLabelColumn, "column '" + std::string(label_column) + "' not in header");
  }
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());
  const std::size_t n_rows = records.size() - 1;
  if (n_rows == 0) throw Error(ErrorCode::EmptyDataset, "header only");
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != n_cols) {
      throw Error(ErrorCode::ParseError, "row " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                                             " fields, header has " + std::to_string(n_cols));
    }
  }

  std::vector<ColumnSchema> schema(n_cols);
  std::vector<std::vector<double>> columns(n_cols, std::vector<double>(n_rows));
  for (std::size_t c = 0; c < n_cols; ++c) {
    auto& col = schema[c];
    col.name = header[c];
    // Rows are reported 1-based, counting data rows only.
    for (std::size_t r = 0; r < n_rows; ++r) {
      if (is_missing(records[r + 1][c])) {
        throw Error(ErrorCode::MissingValue, "row " + std::to_string(r + 1) + ", column '" + col.name + "'");
      }
    }
    if (c == label_col) {
      col.kind = ColumnKind::label;
      for (std::size_t r = 0; r < n_rows; ++r) {
        const auto& cell = records[r + 1][c];
        if (!col.code_of(cell)) col.categories.push_back(cell);
        columns[c][r] = cell == positive_label ? 1.0 : 0.0;
      }
      continue;
    }

    // Numeric iff the majority of leading cells parse; a later unparseable cell in
    // an otherwise numeric column is reported rather than silently turning the
    // column categorical.
    std::size_t parsed = 0;
    std::optional<std::size_t> first_bad;
    for (std::size_t r = 0; r < n_rows; ++r) {
      if (auto v = parse_real(records[r + 1][c])) {
        columns[c][r] = *v;
        ++parsed;
      } else if (!first_bad) {
        first_bad = r;
      }
    }
    if (!first_bad) {
      col.kind = ColumnKind::numeric;
      continue;
    }
    if (parsed * 2 > n_rows) {
      throw Error(ErrorCode::UnparseableCell, "row " + std::to_string(*first_bad + 1) + ", column '" + col.name +
                                                  "': '" + records[*first_bad + 1][c] + "'");
    }
    col.kind = ColumnKind::categorical;
    std::unordered_map<std::string, std::size_t> codes;
    for (std::size_t r = 0; r < n_rows; ++r) {
      const auto& cell = records[r + 1][c];
      auto [it, inserted] = codes.try_emplace(cell, col.categories.size());
      if (inserted) col.categories.push_back(cell);
      columns[c][r] = static_cast<double>(it->second);
    }
  }

  std::vector<std::size_t> ids(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) ids[r] = r;
  Fingerprint fp;
  fp.add(csv_text).add(label_column).add(positive_label);
  return ColumnarDataset(std::move(schema), std::move(columns), std::move(ids), fp.hex());
}

ColumnarDataset load_csv(const std::filesystem::path& path, std::string_view label_column,
                         std::string_view positive_label) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::MissingArtifact, "no such file: " + path.string());
  return parse_dataset(read_file(path), label_column, positive_label);
}

std::pair<ColumnarDataset, ColumnarDataset> split(const ColumnarDataset& ds, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "train_fraction must lie in (0, 1)");
  }
  const std::size_t n = ds.n_rows();
  if (n < 2) throw Error(ErrorCode::DatasetTooSmall, std::to_string(n) + " rows");
  const auto n_train = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) {
    throw Error(ErrorCode::DatasetTooSmall, "split leaves one side empty");
  }
  const auto order = shuffled_indices(n, spec.seed);
  const std::span<const std::size_t> all(order);
  auto side_fp = [&](std::string_view side) {
    return Fingerprint{}
        .add(ds.fingerprint())
        .add(SplitMix64::kName)
        .add(side)
        .add(spec.train_fraction)
        .add(spec.seed)
        .hex();
  };
  return {ds.take_rows(all.first(n_train), side_fp("train")), ds.take_rows(all.subspan(n_train), side_fp("test"))};
}

ColumnarDataset drop_columns(const ColumnarDataset& ds, std::span<const std::string> names) {
  for (const auto& name : names) {
    const auto idx = ds.find(name);
    if (!idx) throw Error(ErrorCode::UnknownColumn, name);
    if (*idx == ds.label_index()) throw Error(ErrorCode::CannotDropLabel, name);
  }
  if (names.empty()) return ds;
  std::vector<ColumnSchema> schema;
  std::vector<std::vector<double>> cols;
  Fingerprint fp;
  fp.add(ds.fingerprint()).add(std::string_view("drop"));
  for (const auto& name : names) fp.add(name);
  for (std::size_t c = 0; c < ds.n_columns(); ++c) {
    if (std::find(names.begin(), names.end(), ds.schema()[c].name) != names.end()) continue;
    schema.push_back(ds.schema()[c]);
    cols.push_back(ds.column(c));
  }
  return ColumnarDataset(std::move(schema), std::move(cols), ds.row_ids(), fp.hex());
}

}  // namespace hafcp
