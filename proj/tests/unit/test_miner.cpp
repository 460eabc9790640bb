#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "hafcp/error.hpp"
#include "hafcp/fuzzify.hpp"
#include "hafcp/io.hpp"
#include "hafcp/miner.hpp"
#include "synthetic.hpp"

using namespace hafcp;

namespace {

ImportanceTable appendix_profits() {
  ImportanceTable t;
  t.method = ImportanceMethod::external;
  t.scores = {{"SL", 0.2}, {"Age", 0.5}, {"Spend", 0.3}};
  return t;
}

std::pair<TransactionDB, ProfitTable> appendix_db(UtilityMode mode = UtilityMode::binary) {
  const auto frame = frame_from_json(read_file(testing::data_path("appendix_transactions.json")));
  return build_transactions(frame, appendix_profits(), mode);
}

std::vector<std::string> names(std::initializer_list<const char*> items) { return {items.begin(), items.end()}; }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("appendix transactions drop zero-support items") {
  const auto [db, pt] = appendix_db();
  CHECK(db.transactions.size() == 6);
  CHECK_FALSE(db.item_index("SL_C"));
  CHECK_FALSE(db.item_index("Spend_H"));
  CHECK(db.item_index("Age_M"));
  CHECK(db.items.size() == 7);
  CHECK(pt.at("Age_L") == 0.5);
  CHECK(pt.at("SL_N") == 0.2);
}

TEST_CASE("appendix utilities") {
  const auto [db, pt] = appendix_db();
  auto u = utility(db, pt, names({"Age_L", "Spend_M"}));
  CHECK(u.support == 3);
  CHECK(u.utility == doctest::Approx(2.4).epsilon(1e-12));
  u = utility(db, pt, names({"Age_L", "SL_N", "Spend_M"}));
  CHECK(u.support == 2);
  CHECK(u.utility == doctest::Approx(2.0).epsilon(1e-12));
  u = utility(db, pt, names({"Age_L", "Age_H"}));
  CHECK(u.support == 0);
  CHECK(u.utility == 0.0);
  CHECK(code_of([&] { utility(db, pt, names({"Nope"})); }) == ErrorCode::UnknownItem);
}

TEST_CASE("appendix top-5 in tie order") {
  const auto [db, pt] = appendix_db();
  const auto top = mine_topk(db, pt, {5, 2, std::nullopt});
  REQUIRE(top.size() == 5);
  const std::vector<std::vector<std::string>> expected = {
      names({"Age_L", "Spend_M"}), names({"Age_H", "SL_N", "Spend_L"}), names({"Age_L", "SL_N", "Spend_M"}),
      names({"Age_H", "Spend_L"}), names({"SL_N", "Spend_M"})};
  const std::vector<double> utilities = {2.4, 2.0, 2.0, 1.6, 1.5};
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(top[i].items == expected[i]);
    CHECK(std::abs(top[i].utility - utilities[i]) <= 1e-12);
  }
  CHECK(top == brute_force_topk(db, pt, {5, 2, std::nullopt}));
}

TEST_CASE("build_transactions errors") {
  auto frame = frame_from_json(read_file(testing::data_path("appendix_transactions.json")));
  std::vector<std::uint8_t> zeros(frame.n_rows, 0);
  CHECK(code_of([&] { build_transactions(frame, zeros, appendix_profits(), UtilityMode::binary); }) ==
        ErrorCode::NoChurnRows);
  ImportanceTable partial;
  partial.scores = {{"SL", 0.2}, {"Age", 0.5}};
  CHECK(code_of([&] { build_transactions(frame, partial, UtilityMode::binary); }) == ErrorCode::MissingImportance);
  ImportanceTable zero;
  zero.scores = {{"SL", 0}, {"Age", 0}, {"Spend", 0}};
  CHECK(code_of([&] { build_transactions(frame, zero, UtilityMode::binary); }) == ErrorCode::NoPositiveImportance);

  ImportanceTable no_sl = appendix_profits();
  no_sl.scores[0].second = 0.0;
  const auto [db, pt] = build_transactions(frame, no_sl, UtilityMode::binary);
  CHECK_FALSE(db.item_index("SL_N"));
}

TEST_CASE("small boundaries") {
  TransactionDB db;
  db.items = {"a", "b"};
  db.transactions = {{{0, 1.0}, {1, 1.0}}};
  const ProfitTable pt = {{"a", 1.0}, {"b", 2.0}};
  auto top = mine_topk(db, pt, {1, 2, std::nullopt});
  REQUIRE(top.size() == 1);
  CHECK(top[0].items == names({"a", "b"}));
  CHECK(top[0].utility == 3.0);

  top = mine_topk(db, pt, {10, 1, std::nullopt});
  CHECK(top.size() == 3);  // no padding

  TransactionDB single;
  single.items = {"a"};
  single.transactions = {{{0, 1.0}}};
  CHECK(brute_force_topk(single, pt, {5, 2, std::nullopt}).empty());
  CHECK(mine_topk(single, pt, {5, 2, std::nullopt}).empty());

  TransactionDB empty;
  CHECK(code_of([&] { mine_topk(empty, pt, {}); }) == ErrorCode::EmptyDatabase);
  CHECK(code_of([&] { mine_topk(db, pt, {0, 2, std::nullopt}); }) == ErrorCode::InvalidConfig);

  TransactionDB wide;
  for (int i = 0; i < 21; ++i) wide.items.push_back("x" + std::to_string(i));
  wide.transactions = {{{0, 1.0}}};
  CHECK(code_of([&] { brute_force_topk(wide, pt, {}); }) == ErrorCode::TooManyItemsForOracle);
}

TEST_CASE("exact miner equals the oracle on random instances") {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 150; ++trial) {
    const auto mode = trial % 2 ? UtilityMode::membership : UtilityMode::binary;
    const auto inst = testing::random_instance(rng, 2 + rng.below(11), 1 + rng.below(50), mode);
    if (inst.db.transactions.empty()) continue;
    MiningConfig cfg{1 + rng.below(12), 1 + rng.below(3), std::nullopt};
    if (trial % 5 == 0) cfg.max_length = cfg.min_length + rng.below(3);
    CAPTURE(trial);
    CHECK(mine_topk(inst.db, inst.profits, cfg) == brute_force_topk(inst.db, inst.profits, cfg));
  }
}

TEST_CASE("discrete profits exercise tie order") {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = testing::random_instance(rng, 3 + rng.below(9), 5 + rng.below(30), UtilityMode::binary, 0.5);
    if (inst.db.transactions.empty()) continue;
    for (auto& [name, p] : inst.profits) p = static_cast<double>(1 + rng.below(3)) * 0.25;
    const MiningConfig cfg{8, 2, std::nullopt};
    CHECK(mine_topk(inst.db, inst.profits, cfg) == brute_force_topk(inst.db, inst.profits, cfg));
  }
}

TEST_CASE("remaining utility bound dominates every extension") {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const auto mode = trial % 2 ? UtilityMode::membership : UtilityMode::binary;
    const auto inst = testing::random_instance(rng, 3 + rng.below(6), 3 + rng.below(20), mode);
    if (inst.db.transactions.empty()) continue;
    const auto order = search_order(inst.db, inst.profits);
    const std::size_t n = order.size();
    // every prefix that is an increasing run of positions in `order`
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
      std::vector<std::uint32_t> prefix;
      std::size_t last = 0;
      for (std::size_t p = 0; p < n; ++p) {
        if (mask & (1u << p)) prefix.push_back(order[p]), last = p;
      }
      const double bound = remaining_utility_bound(inst.db, inst.profits, order, prefix);
      const std::size_t tail = n - last - 1;
      for (std::uint32_t ext = 0; ext < (1u << tail); ++ext) {
        std::vector<std::string> items;
        for (auto i : prefix) items.push_back(inst.db.items[i]);
        for (std::size_t j = 0; j < tail; ++j) {
          if (ext & (1u << j)) items.push_back(inst.db.items[order[last + 1 + j]]);
        }
        CHECK(utility(inst.db, inst.profits, items).utility <= bound + 1e-12);
      }
    }
  }
}

TEST_CASE("search order ascends by transaction weighted utility") {
  const auto [db, pt] = appendix_db();
  const auto order = search_order(db, pt);
  std::vector<double> twu(db.items.size(), 0.0);
  for (const auto& t : db.transactions) {
    double tu = 0;
    for (auto [i, q] : t) tu += q * pt.at(db.items[i]);
    for (auto [i, q] : t) twu[i] += tu;
  }
  for (std::size_t k = 1; k < order.size(); ++k) {
    const auto a = order[k - 1], b = order[k];
    CHECK((twu[a] < twu[b] || (twu[a] == twu[b] && db.items[a] < db.items[b])));
  }
}

TEST_CASE("mined patterns satisfy support monotonicity and the binary closed form") {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const auto inst = testing::random_instance(rng, 8, 30, UtilityMode::binary, 0.5);
    const auto top = mine_topk(inst.db, inst.profits, {10, 2, std::nullopt});
    for (const auto& p : top) {
      double unit = 0;
      for (const auto& i : p.items) unit += inst.profits.at(i);
      CHECK(p.utility == doctest::Approx(p.support * unit).epsilon(1e-12));
      for (std::size_t drop = 0; drop < p.items.size(); ++drop) {
        auto sub = p.items;
        sub.erase(sub.begin() + static_cast<std::ptrdiff_t>(drop));
        CHECK(utility(inst.db, inst.profits, sub).support >= p.support);
      }
    }
  }
}

TEST_CASE("profit scaling preserves the ranking") {
  SplitMix64 rng(44);
  for (int trial = 0; trial < 30; ++trial) {
    const auto mode = trial % 2 ? UtilityMode::membership : UtilityMode::binary;
    const auto inst = testing::random_instance(rng, 9, 25, mode);
    const MiningConfig cfg{6, 2, std::nullopt};
    const auto base = mine_topk(inst.db, inst.profits, cfg);
    for (double lambda : {0.25, 2.0, 8.0}) {
      auto scaled = inst.profits;
      for (auto& [n, p] : scaled) p *= lambda;
      const auto top = mine_topk(inst.db, scaled, cfg);
      REQUIRE(top.size() == base.size());
      for (std::size_t i = 0; i < top.size(); ++i) {
        CHECK(top[i].items == base[i].items);
        CHECK(top[i].utility == doctest::Approx(lambda * base[i].utility).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("item insertion order does not matter") {
  SplitMix64 rng(90);
  for (int trial = 0; trial < 30; ++trial) {
    const auto mode = trial % 2 ? UtilityMode::membership : UtilityMode::binary;
    const auto inst = testing::random_instance(rng, 8, 20, mode);
    TransactionDB reversed = inst.db;
    const auto n = static_cast<std::uint32_t>(inst.db.items.size());
    std::reverse(reversed.items.begin(), reversed.items.end());
    for (auto& t : reversed.transactions) {
      for (auto& [i, q] : t) i = n - 1 - i;
      std::sort(t.begin(), t.end());
    }
    const MiningConfig cfg{7, 2, std::nullopt};
    CHECK(mine_topk(inst.db, inst.profits, cfg) == mine_topk(reversed, inst.profits, cfg));
  }
}

TEST_CASE("membership utilities never exceed binary ones") {
  const auto [bin_db, pt] = appendix_db(UtilityMode::binary);
  const auto [mem_db, pt2] = appendix_db(UtilityMode::membership);
  for (const auto& p : mine_topk(mem_db, pt2, {10, 2, std::nullopt})) {
    CHECK(p.utility <= utility(bin_db, pt, p.items).utility + 1e-12);
  }
  // {Age_L, Spend_M} over A, C, I: (0.97*0.5 + 0.97*0.3) + (0.99*0.5 + 1*0.3) + (0.93*0.5 + 1*0.3)
  const double expected = 0.97 * 0.5 + 0.97 * 0.3 + 0.99 * 0.5 + 1.0 * 0.3 + 0.93 * 0.5 + 1.0 * 0.3;
  CHECK(utility(mem_db, pt2, names({"Age_L", "Spend_M"})).utility == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("beam search is a subset view of the exact search") {
  const auto [db, pt] = appendix_db();
  const auto beam = beam_topk(db, pt, {5, 2, std::nullopt});
  const auto exact = mine_topk(db, pt, {5, 2, std::nullopt});
  REQUIRE_FALSE(beam.empty());
  CHECK(beam.front() == exact.front());
  for (std::size_t i = 0; i < beam.size(); ++i) CHECK(beam[i].utility <= exact[i].utility + 1e-12);
  SplitMix64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = testing::random_instance(rng, 8, 20, UtilityMode::binary);
    const auto b = beam_topk(inst.db, inst.profits, {4, 2, std::nullopt});
    const auto e = mine_topk(inst.db, inst.profits, {4, 2, std::nullopt});
    REQUIRE(b.size() <= e.size());
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(b[i].utility <= e[i].utility + 1e-12);
  }
}

TEST_CASE("pattern lines round trip") {
  const Pattern p{names({"A=x", "B_L"}), 1.25, 3};
  CHECK(pattern_from_json_line(pattern_to_json_line(p, 1)) == p);
  const std::vector<Pattern> ps = {p};
  const auto table = render_pattern_table(ps, "Top-1");
  CHECK(table.find("B_L") != std::string::npos);
  CHECK(table.find("1.2500") != std::string::npos);
}
