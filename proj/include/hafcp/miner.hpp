#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hafcp/fuzzify.hpp"
#include "hafcp/gbdt.hpp"

namespace hafcp {

enum class UtilityMode { binary, membership };
std::string_view to_string(UtilityMode mode);
UtilityMode utility_mode_from_string(std::string_view name);

using ProfitTable = std::map<std::string, double, std::less<>>;

/// Sparse transactions over churned rows. Entries are (item index, quantity)
/// sorted by item index; quantity is 1 in binary mode and the membership
/// degree in membership mode.
struct TransactionDB {
  std::vector<std::string> items;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> transactions;
  UtilityMode mode = UtilityMode::binary;
  /// Fingerprint of the dataset the frame rows came from.
  std::string source_fingerprint;

  std::optional<std::size_t> item_index(std::string_view name) const;
};

struct Pattern {
  std::vector<std::string> items;  // sorted
  double utility = 0.0;
  std::size_t support = 0;

  bool operator==(const Pattern&) const = default;
};

/// Report order: utility descending, then fewer items, then lexicographic items.
bool ranks_before(const Pattern& a, const Pattern& b);

struct MiningConfig {
  std::size_t k = 5;
  std::size_t min_length = 2;
  std::optional<std::size_t> max_length;  // unbounded when empty

  void validate() const;
};

struct UtilityResult {
  double utility = 0.0;
  std::size_t support = 0;
};

/// Keeps churned rows only; drops items with no churned support or zero
/// profit. Each item's profit is its source column's importance.
std::pair<TransactionDB, ProfitTable> build_transactions(const BinaryFrame& frame, std::span<const std::uint8_t> labels,
                                                         const ImportanceTable& importance, UtilityMode mode);
std::pair<TransactionDB, ProfitTable> build_transactions(const BinaryFrame& frame, const ImportanceTable& importance,
                                                         UtilityMode mode);

UtilityResult utility(const TransactionDB& db, const ProfitTable& profits, std::span<const std::string> items);

/// Exact top-k: depth-first utility-list search with a rising k-th utility
/// threshold and remaining-utility pruning. Only itemsets occurring in at
/// least one transaction qualify.
std::vector<Pattern> mine_topk(const TransactionDB& db, const ProfitTable& profits, const MiningConfig& cfg);

/// Exhaustive enumeration; at most 20 items.
std::vector<Pattern> brute_force_topk(const TransactionDB& db, const ProfitTable& profits, const MiningConfig& cfg);

/// Level-wise expansion keeping only the k best itemsets per level for further
/// growth. Approximate: may miss itemsets that mine_topk finds.
std::vector<Pattern> beam_topk(const TransactionDB& db, const ProfitTable& profits, const MiningConfig& cfg);

/// Upper bound used for pruning: sum over transactions containing `prefix` of
/// u(prefix, t) plus the utility of items in t ordered after the prefix's last
/// item. `order` lists item indices in search order. Exposed for testing.
double remaining_utility_bound(const TransactionDB& db, const ProfitTable& profits,
                               std::span<const std::uint32_t> order, std::span<const std::uint32_t> prefix);

/// Search order used by mine_topk: ascending transaction-weighted utility, then name.
std::vector<std::uint32_t> search_order(const TransactionDB& db, const ProfitTable& profits);

std::string pattern_to_json_line(const Pattern& p, std::size_t rank);
Pattern pattern_from_json_line(const std::string& line);

/// Plain-text table with Rank / Pattern / Utility / Support columns.
std::string render_pattern_table(std::span<const Pattern> patterns, std::string_view title);

}  // namespace hafcp
