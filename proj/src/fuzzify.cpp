#include "hafcp/fuzzify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "hafcp/error.hpp"
#include "hafcp/fingerprint.hpp"
#include "hafcp/parallel.hpp"
#include "hafcp/rng.hpp"

namespace hafcp {

using json = nlohmann::json;

std::string_view suffix(Term t) {
  switch (t) {
    case Term::L: return "L";
    case Term::M: return "M";
    case Term::H: return "H";
  }
  return "?";
}

std::string_view to_string(MembershipFamily f) {
  return f == MembershipFamily::gaussian ? "gaussian" : "triangular";
}

double triangular_mu(double x, double a, double b, double c) {
  if (!(a <= b && b <= c)) throw Error(ErrorCode::InvalidVertices, "require a <= b <= c");
  if (a == b && x <= b) return 1.0;
  if (b == c && x >= b) return 1.0;
  if (x <= a || x >= c) return 0.0;
  if (x <= b) return (x - a) / (b - a);
  return (c - x) / (c - b);
}

double gaussian_mu(double x, double center, double width) {
  if (!(width > 0.0)) throw Error(ErrorCode::NonpositiveWidth, "width must be positive");
  const double d = x - center;
  return std::exp(-(d * d) / (2.0 * width * width));
}

std::array<double, 3> MembershipSpec::memberships(double x) const {
  std::array<double, 3> mu{};
  for (std::size_t t = 0; t < 3; ++t) {
    mu[t] = family == MembershipFamily::gaussian
                ? gaussian_mu(x, gaussian[t].center, gaussian[t].width)
                : triangular_mu(x, triangular[t].a, triangular[t].b, triangular[t].c);
  }
  return mu;
}

FuzzyAssignment assign_term(double x, const MembershipSpec& spec) {
  const auto mu = spec.memberships(x);
  std::size_t best = 0;
  for (std::size_t t = 1; t < 3; ++t) {
    if (mu[t] > mu[best]) best = t;
  }
  return {kTerms[best], mu[best]};
}

namespace {

ColumnStats column_stats(std::span<const double> values) {
  ColumnStats s;
  s.n = values.size();
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  const std::size_t mid = s.n / 2;
  s.median = s.n % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  return s;
}

}  // namespace

MembershipSpec fit_membership(std::span<const double> values, const NormalityResult& normality, std::string column,
                              std::string source_fingerprint) {
  if (values.size() < 3) throw Error(ErrorCode::SampleTooSmall, "column '" + column + "' needs at least 3 values");
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::UnparseableCell, "non-finite value in '" + column + "'");
  }
  MembershipSpec spec;
  spec.column = std::move(column);
  spec.source_fingerprint = std::move(source_fingerprint);
  spec.normality = normality;
  spec.fitted_on = column_stats(values);
  const auto& s = spec.fitted_on;
  if (s.min == s.max) throw Error(ErrorCode::DegenerateColumn, "column '" + spec.column + "' is constant");

  if (normality.is_gaussian) {
    spec.family = MembershipFamily::gaussian;
    const double width = s.std / 2.0;
    spec.gaussian = {GaussianTerm{s.mean - s.std, width}, GaussianTerm{s.mean, width},
                     GaussianTerm{s.mean + s.std, width}};
  } else {
    spec.family = MembershipFamily::triangular;
    spec.triangular = {Triangle{s.min, s.min, s.median}, Triangle{s.min, s.median, s.max},
                       Triangle{s.median, s.max, s.max}};
  }
  return spec;
}

std::vector<MembershipSpec> fit_specs(const ColumnarDataset& train, const FitOptions& options) {
  std::vector<std::size_t> numeric;
  for (std::size_t c = 0; c < train.n_columns(); ++c) {
    if (train.schema()[c].kind == ColumnKind::numeric) numeric.push_back(c);
  }
  std::vector<MembershipSpec> specs(numeric.size());
  parallel_for(numeric.size(), [&](std::size_t k) {
    const std::size_t c = numeric[k];
    const auto& name = train.schema()[c].name;
    const auto& values = train.column(c);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (values.empty() || *lo == *hi) throw Error(ErrorCode::DegenerateColumn, "column '" + name + "' is constant");

    NormalityResult normality;
    constexpr std::size_t kMaxShapiro = 5000;
    if (values.size() > kMaxShapiro) {
      const std::uint64_t seed = Fingerprint{}.add(options.seed).add(name).value();
      const auto order = shuffled_indices(values.size(), seed);
      std::vector<double> sample;
      sample.reserve(kMaxShapiro);
      for (std::size_t i = 0; i < kMaxShapiro; ++i) sample.push_back(values[order[i]]);
      normality = shapiro_wilk(sample, options.alpha);
    } else {
      normality = shapiro_wilk(values, options.alpha);
    }
    specs[k] = fit_membership(values, normality, name, train.fingerprint());
  });
  return specs;
}

std::optional<std::size_t> BinaryFrame::item_index(std::string_view name) const {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].name == name) return i;
  }
  return std::nullopt;
}

BinaryFrame to_binary_frame(const ColumnarDataset& ds, std::span<const MembershipSpec> specs) {
  BinaryFrame frame;
  frame.n_rows = ds.n_rows();
  frame.labels.assign(ds.labels().begin(), ds.labels().end());
  frame.source_fingerprint = ds.fingerprint();

  struct Block {
    std::size_t column;
    const MembershipSpec* spec;  // null for categorical
    std::size_t first_item;
  };
  std::vector<Block> blocks;
  for (std::size_t c = 0; c < ds.n_columns(); ++c) {
    const auto& col = ds.schema()[c];
    if (col.kind != ColumnKind::categorical) continue;
    blocks.push_back({c, nullptr, frame.items.size()});
    for (const auto& value : col.categories) {
      frame.items.push_back({col.name + "=" + value, col.name, ItemKind::categorical});
    }
  }
  for (std::size_t c = 0; c < ds.n_columns(); ++c) {
    const auto& col = ds.schema()[c];
    if (col.kind != ColumnKind::numeric) continue;
    const auto it = std::find_if(specs.begin(), specs.end(), [&](const MembershipSpec& s) { return s.column == col.name; });
    if (it == specs.end()) throw Error(ErrorCode::MissingSpec, "no membership spec for column '" + col.name + "'");
    if (frame.spec_fingerprint.empty()) {
      frame.spec_fingerprint = it->source_fingerprint;
    } else if (frame.spec_fingerprint != it->source_fingerprint) {
      throw Error(ErrorCode::LineageMismatch, "membership specs were fitted on different splits");
    }
    blocks.push_back({c, &*it, frame.items.size()});
    for (Term t : kTerms) frame.items.push_back({col.name + "_" + std::string(suffix(t)), col.name, ItemKind::fuzzy});
  }

  const std::size_t width = frame.items.size();
  frame.present.assign(frame.n_rows * width, 0);
  frame.membership.assign(frame.n_rows * width, 0.0);
  for (const auto& block : blocks) {
    const auto& values = ds.column(block.column);
    for (std::size_t r = 0; r < frame.n_rows; ++r) {
      std::size_t item;
      double mu = 1.0;
      if (block.spec == nullptr) {
        item = block.first_item + static_cast<std::size_t>(values[r]);
      } else {
        const auto a = assign_term(values[r], *block.spec);
        item = block.first_item + static_cast<std::size_t>(a.term);
        mu = a.membership;
      }
      frame.present[r * width + item] = 1;
      frame.membership[r * width + item] = mu;
    }
  }
  return frame;
}

namespace {

json stats_json(const ColumnStats& s) {
  return {{"n", s.n}, {"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"median", s.median}, {"max", s.max}};
}

}  // namespace

std::string specs_to_json(std::span<const MembershipSpec> specs, double alpha) {
  json arr = json::array();
  for (const auto& s : specs) {
    json terms = json::object();
    for (Term t : kTerms) {
      const auto i = static_cast<std::size_t>(t);
      terms[std::string(suffix(t))] =
          s.family == MembershipFamily::gaussian
              ? json{{"center", s.gaussian[i].center}, {"width", s.gaussian[i].width}}
              : json{{"a", s.triangular[i].a}, {"b", s.triangular[i].b}, {"c", s.triangular[i].c}};
    }
    arr.push_back({{"column", s.column},
                   {"family", to_string(s.family)},
                   {"terms", std::move(terms)},
                   {"fitted_on", stats_json(s.fitted_on)},
                   {"normality",
                    {{"w", s.normality.w_statistic},
                     {"p", s.normality.p_value},
                     {"alpha", s.normality.alpha},
                     {"is_gaussian", s.normality.is_gaussian}}},
                   {"source_fingerprint", s.source_fingerprint}});
  }
  json doc{{"format", "hafcp-membership"}, {"version", 1}, {"alpha", alpha}, {"specs", std::move(arr)}};
  return doc.dump(1);
}

std::vector<MembershipSpec> specs_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format") != "hafcp-membership") throw Error(ErrorCode::ParseError, "not a membership document");
    std::vector<MembershipSpec> out;
    for (const auto& j : doc.at("specs")) {
      MembershipSpec s;
      s.column = j.at("column");
      const std::string family = j.at("family");
      if (family == "gaussian") s.family = MembershipFamily::gaussian;
      else if (family == "triangular") s.family = MembershipFamily::triangular;
      else throw Error(ErrorCode::ParseError, "unknown family '" + family + "'");
      for (Term t : kTerms) {
        const auto i = static_cast<std::size_t>(t);
        const auto& term = j.at("terms").at(std::string(suffix(t)));
        if (s.family == MembershipFamily::gaussian) {
          s.gaussian[i] = {term.at("center"), term.at("width")};
        } else {
          s.triangular[i] = {term.at("a"), term.at("b"), term.at("c")};
        }
      }
      const auto& f = j.at("fitted_on");
      s.fitted_on = {f.at("n"), f.at("mean"), f.at("std"), f.at("min"), f.at("median"), f.at("max")};
      const auto& nr = j.at("normality");
      s.normality = {nr.at("w"), nr.at("p"), nr.at("alpha"), nr.at("is_gaussian")};
      s.source_fingerprint = j.at("source_fingerprint");
      out.push_back(std::move(s));
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

std::string frame_to_json(const BinaryFrame& frame) {
  json items = json::array();
  for (const auto& it : frame.items) {
    items.push_back({{"name", it.name},
                     {"source", it.source},
                     {"kind", it.kind == ItemKind::fuzzy ? "fuzzy" : "categorical"}});
  }
  const std::size_t w = frame.items.size();
  json rows = json::array();
  json memberships = json::array();
  for (std::size_t r = 0; r < frame.n_rows; ++r) {
    rows.push_back(std::vector<int>(frame.present.begin() + static_cast<std::ptrdiff_t>(r * w),
                                    frame.present.begin() + static_cast<std::ptrdiff_t>((r + 1) * w)));
    memberships.push_back(std::vector<double>(frame.membership.begin() + static_cast<std::ptrdiff_t>(r * w),
                                              frame.membership.begin() + static_cast<std::ptrdiff_t>((r + 1) * w)));
  }
  json doc{{"format", "hafcp-frame"},
           {"version", 1},
           {"items", std::move(items)},
           {"rows", std::move(rows)},
           {"memberships", std::move(memberships)},
           {"labels", frame.labels},
           {"source_fingerprint", frame.source_fingerprint},
           {"spec_fingerprint", frame.spec_fingerprint}};
  return doc.dump();
}

BinaryFrame frame_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format") != "hafcp-frame") throw Error(ErrorCode::ParseError, "not a frame document");
    BinaryFrame f;
    for (const auto& it : doc.at("items")) {
      const std::string kind = it.at("kind");
      f.items.push_back({it.at("name"), it.at("source"), kind == "fuzzy" ? ItemKind::fuzzy : ItemKind::categorical});
    }
    const std::size_t w = f.items.size();
    const auto& rows = doc.at("rows");
    f.n_rows = rows.size();
    const bool has_mu = doc.contains("memberships");
    for (std::size_t r = 0; r < f.n_rows; ++r) {
      const auto& row = rows[r];
      if (row.size() != w) throw Error(ErrorCode::ParseError, "row " + std::to_string(r) + " has wrong width");
      for (std::size_t i = 0; i < w; ++i) {
        const int v = row[i];
        if (v != 0 && v != 1) throw Error(ErrorCode::ParseError, "frame cells must be 0 or 1");
        f.present.push_back(static_cast<std::uint8_t>(v));
        f.membership.push_back(has_mu ? doc["memberships"][r][i].get<double>() : static_cast<double>(v));
      }
    }
    f.labels = doc.at("labels").get<std::vector<std::uint8_t>>();
    if (f.labels.size() != f.n_rows) throw Error(ErrorCode::ParseError, "labels do not match rows");
    f.source_fingerprint = doc.value("source_fingerprint", "");
    f.spec_fingerprint = doc.value("spec_fingerprint", "");
    return f;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

}  // namespace hafcp
