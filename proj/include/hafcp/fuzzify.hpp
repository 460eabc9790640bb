#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hafcp/dataset.hpp"
#include "hafcp/shapiro_wilk.hpp"

namespace hafcp {

enum class Term : std::uint8_t { L = 0, M = 1, H = 2 };
inline constexpr std::array<Term, 3> kTerms = {Term::L, Term::M, Term::H};
std::string_view suffix(Term t);  // "L", "M", "H"

enum class MembershipFamily { gaussian, triangular };
std::string_view to_string(MembershipFamily f);

struct Triangle {
  double a = 0.0, b = 0.0, c = 0.0;
};

struct GaussianTerm {
  double center = 0.0;
  double width = 1.0;
};

/// Training-split statistics a spec was fitted from (std is the n-1 sample deviation).
struct ColumnStats {
  std::size_t n = 0;
  double mean = 0.0, std = 0.0, min = 0.0, median = 0.0, max = 0.0;
};

struct MembershipSpec {
  std::string column;
  MembershipFamily family = MembershipFamily::triangular;
  std::array<GaussianTerm, 3> gaussian{};  // used iff family == gaussian
  std::array<Triangle, 3> triangular{};    // used iff family == triangular
  ColumnStats fitted_on;
  NormalityResult normality;
  /// Fingerprint of the dataset (training split) the spec was fitted on.
  std::string source_fingerprint;

  /// Membership degrees in L, M, H order.
  std::array<double, 3> memberships(double x) const;
};

struct FuzzyAssignment {
  Term term = Term::L;
  double membership = 0.0;
};

/// Triangle with vertices a <= b <= c. Shoulders: a == b gives 1 for x <= b, b == c gives 1 for x >= b.
double triangular_mu(double x, double a, double b, double c);

double gaussian_mu(double x, double center, double width);

/// Gaussian family: centers mean-std, mean, mean+std with common width std/2.
/// Triangular family: L = (min, min, median), M = (min, median, max), H = (median, max, max).
MembershipSpec fit_membership(std::span<const double> values, const NormalityResult& normality,
                              std::string column = {}, std::string source_fingerprint = {});

/// Max-membership term; ties go to the earlier of L, M, H.
FuzzyAssignment assign_term(double x, const MembershipSpec& spec);

struct FitOptions {
  double alpha = 0.05;
  /// Seeds the 5000-row subsample used for the normality test of larger columns.
  std::uint64_t seed = 0;
};

/// Normality-routed specs for every numeric column of `train`, in schema order.
std::vector<MembershipSpec> fit_specs(const ColumnarDataset& train, const FitOptions& options = {});

enum class ItemKind : std::uint8_t { categorical, fuzzy };

struct ItemInfo {
  std::string name;    // "COL=value" or "COL_L" / "COL_M" / "COL_H"
  std::string source;  // originating column
  ItemKind kind = ItemKind::categorical;

  bool operator==(const ItemInfo&) const = default;
};

/// Row-major binary matrix with parallel membership degrees. Absent items have
/// membership 0; present categorical items have membership 1.
struct BinaryFrame {
  std::vector<ItemInfo> items;
  std::size_t n_rows = 0;
  std::vector<std::uint8_t> present;
  std::vector<double> membership;
  std::vector<std::uint8_t> labels;
  /// Dataset the rows came from, and the split the specs were fitted on.
  std::string source_fingerprint;
  std::string spec_fingerprint;

  bool at(std::size_t row, std::size_t item) const { return present[row * items.size() + item] != 0; }
  double membership_at(std::size_t row, std::size_t item) const { return membership[row * items.size() + item]; }
  std::optional<std::size_t> item_index(std::string_view name) const;
};

/// Item order: categorical columns in schema order (categories by code), then
/// fuzzified columns in schema order with terms L, M, H.
BinaryFrame to_binary_frame(const ColumnarDataset& ds, std::span<const MembershipSpec> specs);

std::string specs_to_json(std::span<const MembershipSpec> specs, double alpha);
std::vector<MembershipSpec> specs_from_json(const std::string& text);

std::string frame_to_json(const BinaryFrame& frame);
BinaryFrame frame_from_json(const std::string& text);

}  // namespace hafcp
