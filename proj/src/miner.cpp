#include "hafcp/miner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hafcp/error.hpp"

namespace hafcp {

using json = nlohmann::json;

std::string_view to_string(UtilityMode mode) { return mode == UtilityMode::binary ? "binary" : "membership"; }

UtilityMode utility_mode_from_string(std::string_view name) {
  if (name == "binary") return UtilityMode::binary;
  if (name == "membership") return UtilityMode::membership;
  throw Error(ErrorCode::InvalidConfig, "unknown utility mode '" + std::string(name) + "'");
}

std::optional<std::size_t> TransactionDB::item_index(std::string_view name) const {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i] == name) return i;
  }
  return std::nullopt;
}

bool ranks_before(const Pattern& a, const Pattern& b) {
  if (a.utility != b.utility) return a.utility > b.utility;
  if (a.items.size() != b.items.size()) return a.items.size() < b.items.size();
  return a.items < b.items;
}

void MiningConfig::validate() const {
  if (k == 0) throw Error(ErrorCode::InvalidConfig, "k must be positive");
  if (min_length == 0) throw Error(ErrorCode::InvalidConfig, "min_length must be positive");
  if (max_length && *max_length < min_length) throw Error(ErrorCode::InvalidConfig, "max_length < min_length");
}

std::pair<TransactionDB, ProfitTable> build_transactions(const BinaryFrame& frame, std::span<const std::uint8_t> labels,
                                                         const ImportanceTable& importance, UtilityMode mode) {
  if (labels.size() != frame.n_rows) throw Error(ErrorCode::LengthMismatch, "labels do not align with frame rows");
  const std::size_t width = frame.items.size();
  std::vector<double> item_profit(width, 0.0);
  for (std::size_t i = 0; i < width; ++i) {
    const auto s = importance.score(frame.items[i].source);
    if (!s) throw Error(ErrorCode::MissingImportance, "no importance for column '" + frame.items[i].source + "'");
    item_profit[i] = *s;
  }
  if (!importance.has_positive()) throw Error(ErrorCode::NoPositiveImportance, "every importance score is zero");

  std::vector<std::size_t> churned;
  for (std::size_t r = 0; r < frame.n_rows; ++r) {
    if (labels[r]) churned.push_back(r);
  }
  if (churned.empty()) throw Error(ErrorCode::NoChurnRows, "no row has the churn label");

  std::vector<std::size_t> support(width, 0);
  for (std::size_t r : churned) {
    for (std::size_t i = 0; i < width; ++i) support[i] += frame.at(r, i);
  }

  TransactionDB db;
  db.mode = mode;
  db.source_fingerprint = frame.source_fingerprint;
  ProfitTable profits;
  std::vector<std::int64_t> remap(width, -1);
  for (std::size_t i = 0; i < width; ++i) {
    if (support[i] == 0 || item_profit[i] == 0.0) continue;
    remap[i] = static_cast<std::int64_t>(db.items.size());
    db.items.push_back(frame.items[i].name);
    profits.emplace(frame.items[i].name, item_profit[i]);
  }
  for (std::size_t r : churned) {
    std::vector<std::pair<std::uint32_t, double>> t;
    for (std::size_t i = 0; i < width; ++i) {
      if (remap[i] < 0 || !frame.at(r, i)) continue;
      const double q = mode == UtilityMode::binary ? 1.0 : frame.membership_at(r, i);
      t.emplace_back(static_cast<std::uint32_t>(remap[i]), q);
    }
    if (!t.empty()) db.transactions.push_back(std::move(t));
  }
  return {std::move(db), std::move(profits)};
}

std::pair<TransactionDB, ProfitTable> build_transactions(const BinaryFrame& frame, const ImportanceTable& importance,
                                                         UtilityMode mode) {
  return build_transactions(frame, frame.labels, importance, mode);
}

namespace {

// Shared evaluation context. Every reported utility goes through
// canonical_utility so that the miner, the oracle and utility() agree bit for bit.
struct Context {
  const TransactionDB& db;
  std::vector<double> profit;            // per db item
  std::vector<std::uint32_t> name_rank;  // position of each item in name order

  Context(const TransactionDB& d, const ProfitTable& pt) : db(d), profit(d.items.size()), name_rank(d.items.size()) {
    for (std::size_t i = 0; i < d.items.size(); ++i) {
      const auto it = pt.find(d.items[i]);
      if (it == pt.end()) throw Error(ErrorCode::UnknownItem, "no profit for item '" + d.items[i] + "'");
      profit[i] = it->second;
    }
    std::vector<std::uint32_t> by_name(d.items.size());
    std::iota(by_name.begin(), by_name.end(), 0u);
    std::sort(by_name.begin(), by_name.end(), [&](auto a, auto b) { return d.items[a] < d.items[b]; });
    for (std::uint32_t r = 0; r < by_name.size(); ++r) name_rank[by_name[r]] = r;
  }

  double quantity(std::size_t tid, std::uint32_t item) const {
    const auto& t = db.transactions[tid];
    const auto it = std::lower_bound(t.begin(), t.end(), item, [](const auto& e, std::uint32_t v) { return e.first < v; });
    return (it != t.end() && it->first == item) ? it->second : 0.0;
  }

  bool contains_all(std::size_t tid, std::span<const std::uint32_t> items) const {
    return std::all_of(items.begin(), items.end(), [&](std::uint32_t i) { return quantity(tid, i) > 0.0; });
  }

  std::vector<std::uint32_t> sorted_by_name(std::span<const std::uint32_t> items) const {
    std::vector<std::uint32_t> out(items.begin(), items.end());
    std::sort(out.begin(), out.end(), [&](auto a, auto b) { return name_rank[a] < name_rank[b]; });
    return out;
  }

  // `tids` ascending; items in any order.
  double canonical_utility(std::span<const std::uint32_t> items, std::span<const std::uint32_t> tids) const {
    const auto named = sorted_by_name(items);
    if (db.mode == UtilityMode::binary) {
      double unit = 0.0;
      for (auto i : named) unit += profit[i];
      return static_cast<double>(tids.size()) * unit;
    }
    double total = 0.0;
    for (auto tid : tids) {
      double ut = 0.0;
      for (auto i : named) ut += quantity(tid, i) * profit[i];
      total += ut;
    }
    return total;
  }

  std::vector<std::uint32_t> supporting(std::span<const std::uint32_t> items) const {
    std::vector<std::uint32_t> tids;
    for (std::size_t t = 0; t < db.transactions.size(); ++t) {
      if (contains_all(t, items)) tids.push_back(static_cast<std::uint32_t>(t));
    }
    return tids;
  }

  Pattern make_pattern(std::span<const std::uint32_t> items, double util, std::size_t support) const {
    Pattern p;
    for (auto i : sorted_by_name(items)) p.items.push_back(db.items[i]);
    p.utility = util;
    p.support = support;
    return p;
  }
};

class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) {}

  std::optional<double> threshold() const {
    if (ranked_.size() < k_) return std::nullopt;
    return std::prev(ranked_.end())->utility;
  }

  // True when an itemset whose utility cannot exceed `bound` may still enter.
  bool may_admit(double bound) const {
    const auto t = threshold();
    if (!t) return true;
    return bound >= *t - 1e-9 * std::max(1.0, std::abs(*t));
  }

  void offer(Pattern p) {
    if (const auto t = threshold(); t && p.utility < *t) return;
    ranked_.insert(std::move(p));
    if (ranked_.size() > k_) ranked_.erase(std::prev(ranked_.end()));
  }

  std::vector<Pattern> result() const { return {ranked_.begin(), ranked_.end()}; }

 private:
  struct Cmp {
    bool operator()(const Pattern& a, const Pattern& b) const { return ranks_before(a, b); }
  };
  std::size_t k_;
  std::set<Pattern, Cmp> ranked_;
};

struct Entry {
  std::uint32_t tid;
  double iu;  // u(X, t)
  double ru;  // utility of items after X's last item in t
};

struct UtilityList {
  std::uint32_t item;
  std::vector<Entry> entries;
  double sum_iu = 0.0;
  double sum_ru = 0.0;
};

class ListMiner {
 public:
  ListMiner(const Context& ctx, const MiningConfig& cfg) : ctx_(ctx), cfg_(cfg), top_(cfg.k) {}

  std::vector<Pattern> run(const std::vector<std::uint32_t>& order) {
    const std::size_t n_items = ctx_.db.items.size();
    std::vector<std::uint32_t> pos(n_items);
    for (std::uint32_t p = 0; p < order.size(); ++p) pos[order[p]] = p;

    std::vector<UtilityList> singles(order.size());
    for (std::uint32_t p = 0; p < order.size(); ++p) singles[p].item = order[p];

    for (std::uint32_t tid = 0; tid < ctx_.db.transactions.size(); ++tid) {
      auto t = ctx_.db.transactions[tid];
      std::sort(t.begin(), t.end(), [&](const auto& a, const auto& b) { return pos[a.first] < pos[b.first]; });
      double remaining = 0.0;
      for (auto it = t.rbegin(); it != t.rend(); ++it) {
        const double u = it->second * ctx_.profit[it->first];
        auto& ul = singles[pos[it->first]];
        ul.entries.push_back({tid, u, remaining});
        ul.sum_iu += u;
        ul.sum_ru += remaining;
        remaining += u;
      }
    }
    std::erase_if(singles, [](const UtilityList& ul) { return ul.entries.empty(); });

    prefix_.clear();
    search(nullptr, singles);
    return top_.result();
  }

 private:
  void search(const UtilityList* prefix_list, const std::vector<UtilityList>& exts) {
    for (std::size_t i = 0; i < exts.size(); ++i) {
      const UtilityList& x = exts[i];
      prefix_.push_back(x.item);
      if (prefix_.size() >= cfg_.min_length && top_.may_admit(x.sum_iu)) {
        std::vector<std::uint32_t> tids;
        tids.reserve(x.entries.size());
        for (const auto& e : x.entries) tids.push_back(e.tid);
        const double u = ctx_.canonical_utility(prefix_, tids);
        top_.offer(ctx_.make_pattern(prefix_, u, tids.size()));
      }
      const bool can_grow = !cfg_.max_length || prefix_.size() < *cfg_.max_length;
      if (can_grow && i + 1 < exts.size() && top_.may_admit(x.sum_iu + x.sum_ru)) {
        std::vector<UtilityList> next;
        for (std::size_t j = i + 1; j < exts.size(); ++j) {
          UtilityList xy = join(prefix_list, x, exts[j]);
          if (!xy.entries.empty()) next.push_back(std::move(xy));
        }
        if (!next.empty()) search(&x, next);
      }
      prefix_.pop_back();
    }
  }

  // Utility list of P+x+y from those of P (may be null), P+x and P+y.
  static UtilityList join(const UtilityList* p, const UtilityList& px, const UtilityList& py) {
    UtilityList out;
    out.item = py.item;
    std::size_t a = 0, b = 0, c = 0;
    while (a < px.entries.size() && b < py.entries.size()) {
      const Entry& ex = px.entries[a];
      const Entry& ey = py.entries[b];
      if (ex.tid < ey.tid) {
        ++a;
      } else if (ey.tid < ex.tid) {
        ++b;
      } else {
        double iu = ex.iu + ey.iu;
        if (p != nullptr) {
          while (p->entries[c].tid < ex.tid) ++c;
          iu -= p->entries[c].iu;
        }
        out.entries.push_back({ex.tid, iu, ey.ru});
        out.sum_iu += iu;
        out.sum_ru += ey.ru;
        ++a;
        ++b;
      }
    }
    return out;
  }

  const Context& ctx_;
  const MiningConfig& cfg_;
  TopK top_;
  std::vector<std::uint32_t> prefix_;
};

}  // namespace

UtilityResult utility(const TransactionDB& db, const ProfitTable& profits, std::span<const std::string> items) {
  if (items.empty()) throw Error(ErrorCode::UnknownItem, "empty itemset");
  const Context ctx(db, profits);
  std::vector<std::uint32_t> idx;
  for (const auto& name : items) {
    const auto i = db.item_index(name);
    if (!i) {
      // Known by name (e.g. a dropped zero-support item) but absent from every transaction.
      if (profits.contains(name)) return {0.0, 0};
      throw Error(ErrorCode::UnknownItem, "'" + name + "'");
    }
    idx.push_back(static_cast<std::uint32_t>(*i));
  }
  const auto tids = ctx.supporting(idx);
  return {ctx.canonical_utility(idx, tids), tids.size()};
}

std::vector<std::uint32_t> search_order(const TransactionDB& db, const ProfitTable& profits) {
  const Context ctx(db, profits);
  std::vector<double> twu(db.items.size(), 0.0);
  for (const auto& t : db.transactions) {
    double tu = 0.0;
    for (const auto& [i, q] : t) tu += q * ctx.profit[i];
    for (const auto& [i, q] : t) twu[i] += tu;
  }
  std::vector<std::uint32_t> order(db.items.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    if (twu[a] != twu[b]) return twu[a] < twu[b];
    return db.items[a] < db.items[b];
  });
  return order;
}

double remaining_utility_bound(const TransactionDB& db, const ProfitTable& profits,
                               std::span<const std::uint32_t> order, std::span<const std::uint32_t> prefix) {
  const Context ctx(db, profits);
  std::vector<std::uint32_t> pos(db.items.size());
  for (std::uint32_t p = 0; p < order.size(); ++p) pos[order[p]] = p;
  std::uint32_t last = 0;
  for (auto i : prefix) last = std::max(last, pos[i]);
  double bound = 0.0;
  for (auto tid : ctx.supporting(prefix)) {
    for (const auto& [i, q] : db.transactions[tid]) {
      const bool in_prefix = std::find(prefix.begin(), prefix.end(), i) != prefix.end();
      if (in_prefix || pos[i] > last) bound += q * ctx.profit[i];
    }
  }
  return bound;
}

std::vector<Pattern> mine_topk(const TransactionDB& db, const ProfitTable& profits, const MiningConfig& cfg) {
  cfg.validate();
  if (db.transactions.empty() || db.items.empty()) throw Error(ErrorCode::EmptyDatabase, "no transactions");
  const Context ctx(db, profits);
  ListMiner miner(ctx, cfg);
  return miner.run(search_order(db, profits));
}

std::vector<Pattern> brute_force_topk(const TransactionDB& db, const ProfitTable& profits, const MiningConfig& cfg) {
  cfg.validate();
  const std::size_t n = db.items.size();
  if (n > 20) throw Error(ErrorCode::TooManyItemsForOracle, std::to_string(n) + " items");
  const Context ctx(db, profits);
  std::vector<Pattern> all;
  std::vector<std::uint32_t> items;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    if (size < cfg.min_length || (cfg.max_length && size > *cfg.max_length)) continue;
    items.clear();
    for (std::uint32_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) items.push_back(i);
    }
    const auto tids = ctx.supporting(items);
    if (tids.empty()) continue;
    all.push_back(ctx.make_pattern(items, ctx.canonical_utility(items, tids), tids.size()));
  }
  std::sort(all.begin(), all.end(), ranks_before);
  if (all.size() > cfg.k) all.resize(cfg.k);
  return all;
}

std::vector<Pattern> beam_topk(const TransactionDB& db, const ProfitTable& profits, const MiningConfig& cfg) {
  cfg.validate();
  if (db.transactions.empty() || db.items.empty()) throw Error(ErrorCode::EmptyDatabase, "no transactions");
  const Context ctx(db, profits);
  TopK overall(cfg.k);

  // Itemsets are grown in name order so each is generated once per level.
  std::vector<std::vector<std::uint32_t>> level;
  for (std::uint32_t i = 0; i < db.items.size(); ++i) level.push_back({i});
  std::size_t length = 1;
  while (!level.empty()) {
    std::vector<std::pair<Pattern, std::vector<std::uint32_t>>> evaluated;
    for (const auto& items : level) {
      const auto tids = ctx.supporting(items);
      if (tids.empty()) continue;
      evaluated.emplace_back(ctx.make_pattern(items, ctx.canonical_utility(items, tids), tids.size()), items);
    }
    std::sort(evaluated.begin(), evaluated.end(),
              [](const auto& a, const auto& b) { return ranks_before(a.first, b.first); });
    if (length >= cfg.min_length) {
      for (const auto& [p, items] : evaluated) overall.offer(p);
    }
    if (evaluated.size() > cfg.k) evaluated.resize(cfg.k);
    if (cfg.max_length && length >= *cfg.max_length) break;

    std::set<std::vector<std::uint32_t>> next;
    for (const auto& [p, items] : evaluated) {
      const auto named = ctx.sorted_by_name(items);
      const auto last_rank = ctx.name_rank[named.back()];
      for (std::uint32_t i = 0; i < db.items.size(); ++i) {
        if (ctx.name_rank[i] <= last_rank) continue;
        auto grown = named;
        grown.push_back(i);
        next.insert(std::move(grown));
      }
    }
    level.assign(next.begin(), next.end());
    ++length;
  }
  return overall.result();
}

std::string pattern_to_json_line(const Pattern& p, std::size_t rank) {
  return json{{"rank", rank}, {"items", p.items}, {"utility", p.utility}, {"support", p.support}}.dump();
}

Pattern pattern_from_json_line(const std::string& line) {
  try {
    const json j = json::parse(line);
    Pattern p;
    p.items = j.at("items").get<std::vector<std::string>>();
    p.utility = j.at("utility");
    p.support = j.at("support");
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

std::string render_pattern_table(std::span<const Pattern> patterns, std::string_view title) {
  std::vector<std::string> cells;
  std::size_t width = std::string_view("Pattern").size();
  for (const auto& p : patterns) {
    std::string s = "{";
    for (std::size_t i = 0; i < p.items.size(); ++i) {
      if (i) s += ", ";
      s += "\"" + p.items[i] + "\"";
    }
    s += "}";
    width = std::max(width, s.size());
    cells.push_back(std::move(s));
  }
  std::ostringstream out;
  out << title << "\n";
  char buf[64];
  auto line = [&](std::string_view rank, std::string_view pat, std::string_view util, std::string_view sup) {
    out << "| " << rank << std::string(4 - std::min<std::size_t>(4, rank.size()), ' ') << " | " << pat
        << std::string(width - pat.size(), ' ') << " | " << util << std::string(10 - std::min<std::size_t>(10, util.size()), ' ')
        << " | " << sup << " |\n";
  };
  line("Rank", "Pattern", "Utility", "Support");
  out << "|------|" << std::string(width + 2, '-') << "|------------|---------|\n";
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.4f", patterns[i].utility);
    line(std::to_string(i + 1), cells[i], buf, std::to_string(patterns[i].support));
  }
  return out.str();
}

}  // namespace hafcp
