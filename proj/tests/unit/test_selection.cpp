#include <catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace speclog;
using namespace testsupport;

namespace {

using W = std::vector<std::vector<Transfer>>;

const EngineConfig kPair = make_config(MatchMode::pair, 16);

Transfer T(char c) { return pair(0x0400 + static_cast<std::uint32_t>(c), 0x0500 + static_cast<std::uint32_t>(c)); }

std::vector<Transfer> word(const std::string& s) {
  std::vector<Transfer> out;
  for (char c : s) out.push_back(T(c));
  return out;
}

RawLog log_of(const std::string& s) { return encode_raw(word(s), kPair); }

Candidate cand(const std::string& s, std::size_t count) { return {word(s), count, CandidateOrigin::mined, std::nullopt}; }

std::vector<std::vector<Transfer>> entries_of(const std::vector<Candidate>& cs) {
  std::vector<std::vector<Transfer>> out;
  for (const auto& c : cs) out.push_back(c.entries);
  return out;
}

// Exhaustive Top: among all pairwise non-nested subsets of size <= n, the one
// whose rank list (ascending) is lexicographically best, longer beating its
// own prefix.
std::vector<std::size_t> brute_top(std::vector<Candidate> cs, std::size_t n) {
  std::sort(cs.begin(), cs.end(), by_count);
  std::vector<std::size_t> best;
  const std::size_t m = cs.size();
  std::vector<std::size_t> cur;
  std::function<void(std::size_t)> rec = [&](std::size_t from) {
    auto better = [](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
      for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i)
        if (a[i] != b[i]) return a[i] < b[i];
      return a.size() > b.size();
    };
    if (better(cur, best)) best = cur;
    if (cur.size() == n) return;
    for (std::size_t i = from; i < m; ++i) {
      bool ok = true;
      for (auto j : cur) ok &= !nested(cs[j], cs[i]);
      if (!ok) continue;
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return best;
}

}  // namespace

TEST_CASE("window counting examples") {
  const std::vector<RawLog> ab{log_of("ABABAB")};
  auto cs = enumerate_candidates(ab, 2, 2);
  auto it = std::find_if(cs.begin(), cs.end(), [](const Candidate& c) { return c.entries == word("AB"); });
  REQUIRE(it != cs.end());
  CHECK(it->count == 3u);

  const std::vector<RawLog> aaaa{log_of("AAAA")};
  cs = enumerate_candidates(aaaa, 2, 2);
  REQUIRE(cs.size() == 1u);
  CHECK(cs[0].count == 2u);

  CHECK(enumerate_candidates(std::vector<RawLog>{}, 2, 16).empty());
}

TEST_CASE("window counts match a naive scan") {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> ch(0, 2);
  for (int t = 0; t < 100; ++t) {
    std::vector<RawLog> logs;
    std::vector<std::vector<Transfer>> seqs;
    for (int l = 0; l < 1 + t % 3; ++l) {
      std::string s;
      for (int k = 0; k < 5 + t % 30; ++k) s += static_cast<char>('A' + ch(rng));
      logs.push_back(log_of(s));
      seqs.push_back(word(s));
    }
    const auto cs = enumerate_candidates(logs, 1, 5);
    std::set<std::vector<Transfer>> windows;
    for (const auto& s : seqs)
      for (std::size_t len = 1; len <= 5; ++len)
        for (std::size_t i = 0; i + len <= s.size(); ++i) windows.insert({s.begin() + i, s.begin() + i + len});
    REQUIRE(cs.size() == windows.size());
    for (const auto& c : cs) {
      std::size_t expect = 0;
      for (const auto& s : seqs) expect += naive_count(s, c.entries);
      CHECK(c.count == expect);
    }
    CHECK(std::is_sorted(cs.begin(), cs.end(), by_count));
  }
}

TEST_CASE("Top examples") {
  const std::vector<Candidate> pqr{cand("PP", 10), cand("QQ", 7), cand("RR", 3)};
  CHECK(entries_of(choose_top(pqr, 2)) == W{word("PP"), word("QQ")});

  const std::vector<Candidate> nest{cand("QPQ", 12), cand("P", 11), cand("RR", 5)};
  CHECK(entries_of(choose_top(nest, 2)) == W{word("QPQ"), word("RR")});

  CHECK(choose_top(pqr, 8).size() == 3u);
  const auto specs = policy_top(pqr, 2);
  CHECK(specs[0].id == 1);
  CHECK(specs[1].id == 2);
  // ties: shorter first, then lexicographic
  const std::vector<Candidate> tie{cand("BB", 4), cand("AAA", 4), cand("AA", 4)};
  CHECK(entries_of(choose_top(tie, 2)) == W{word("AA"), word("BB")});
}

TEST_CASE("Top equals the exhaustive optimum") {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 300; ++t) {
    const auto cs = random_candidates(rng, 1 + t % 20);
    const std::size_t n = 1 + t % 4;
    auto sorted = cs;
    std::sort(sorted.begin(), sorted.end(), by_count);
    std::vector<std::vector<Transfer>> expect;
    for (auto i : brute_top(cs, n)) expect.push_back(sorted[i].entries);
    CHECK(entries_of(choose_top(cs, n)) == expect);
  }
}

TEST_CASE("Minimize replacement threshold") {
  // the seed holds the short candidate (count 10); the longer one occurs 25 times
  const std::vector<Candidate> cs{cand("AB", 10), cand("CDE", 25)};
  CHECK(entries_of(choose_minimize(cs, 1, 100)) == W{word("CDE")});  // 25 > 20
  CHECK(entries_of(choose_minimize(cs, 1, 200)) == W{word("AB")});   // 25 <= 30
  CHECK(entries_of(choose_minimize(cs, 1, 150)) == W{word("AB")});   // 25 is not > 25

  // equal lengths: same as Top
  std::mt19937_64 rng(47);
  for (int t = 0; t < 100; ++t) {
    auto same = random_candidates(rng, 10, 3);
    for (auto& c : same) c.entries.resize(1, c.entries[0]);
    std::sort(same.begin(), same.end(), [](const Candidate& a, const Candidate& b) { return a.entries < b.entries; });
    same.erase(std::unique(same.begin(), same.end(),
                           [](const Candidate& a, const Candidate& b) { return a.entries == b.entries; }),
               same.end());
    auto top = choose_top(same, 3);
    CHECK(entries_of(choose_minimize(same, 3, 50)) == entries_of(top));
  }

  // huge t leaves the seed alone
  const std::vector<Candidate> mix{cand("A", 3), cand("B", 2), cand("CD", 50), cand("EFG", 90)};
  CHECK(entries_of(choose_minimize(mix, 2, 1e12)) == W{word("A"), word("B")});
  // tiny t lets the frequent long ones in
  CHECK(entries_of(choose_minimize(mix, 2, 1e-9)) == W{word("EFG"), word("CD")});
}

TEST_CASE("Select stays within budget") {
  // one 2-entry pair block costs 10 bytes at width 16
  const std::vector<Candidate> cs{cand("ABCDEFG", 30), cand("HI", 20), cand("JK", 10)};
  CHECK(entries_of(choose_select(cs, 10, kPair)) == W{word("HI")});
  CHECK(entries_of(choose_select(cs, 20, kPair)) == W{word("HI"), word("JK")});
  CHECK(choose_select(cs, 0, kPair).empty());

  std::mt19937_64 rng(53);
  for (int t = 0; t < 200; ++t) {
    const auto pool = random_candidates(rng, 1 + t % 12, 6);
    const std::size_t budget = t % 60;
    const auto chosen = choose_select(pool, budget, kPair);
    CHECK(blockmem_bytes(to_specs(chosen), kPair) <= budget);
    if (!chosen.empty()) CHECK(serialize_blockmem(to_specs(chosen), kPair).bytes.size() <= budget);
    // independent re-walk: every skipped candidate either did not fit or nested
    auto sorted = pool;
    std::sort(sorted.begin(), sorted.end(), by_count);
    std::size_t used = 0, k = 0;
    for (const auto& c : sorted) {
      if (k == chosen.size() && k == kPair.max_sub_paths) break;
      if (k < chosen.size() && chosen[k].entries == c.entries) {
        used += block_bytes(c.entries.size(), kPair);
        ++k;
        continue;
      }
      const bool fits = used + block_bytes(c.entries.size(), kPair) <= budget;
      bool clash = false;
      for (std::size_t j = 0; j < k; ++j) clash |= nested(chosen[j], c);
      CHECK((!fits || clash));
    }
    CHECK(k == chosen.size());
  }
}

TEST_CASE("estimate_savings arithmetic") {
  SubPathSpec s{1, word("ABCD")};
  const std::vector<RawLog> logs{encode_raw(repeat(s.entries, 100), kPair)};
  CHECK(estimate_savings(s, logs, kPair) == 1600 - 4 - 18);
  CHECK(estimate_savings({1, word("XY")}, logs, kPair) == -10);
  CHECK(estimate_savings(s, std::vector<RawLog>{RawLog{}}, kPair) == -18);
}

TEST_CASE("savings ranking prefers the spec that shrinks the log most") {
  // loop body of ten transfers repeated; Top ties every short window
  const auto body = word("ABCDEFGHIJ");
  const std::vector<RawLog> logs{encode_raw(repeat(body, 50), kPair)};
  const auto cands = enumerate_candidates(logs, 2, 16);
  const auto best = choose_savings(cands, logs, 1, kPair);
  REQUIRE(best.size() == 1u);
  CHECK(best[0].entries.size() == 10u);
}

TEST_CASE("savings picks grow by prefix and never cost bytes on the training logs") {
  std::mt19937_64 rng(59);
  for (int t = 0; t < 20; ++t) {
    const auto alpha = alphabet(rng, kPair, 6);
    const auto specs = random_specs(rng, alpha, 4, 6);
    const std::vector<RawLog> logs{encode_raw(random_trace(rng, alpha, specs, 800), kPair)};
    const auto cands = enumerate_candidates(logs, 1, 8);
    // measured independently with the engine rather than the reference scanner
    auto total = [&](const std::vector<SubPathSpec>& ss) {
      return compress_trace(log_transfers(logs[0]), ss, kPair).size_bytes(kPair) + blockmem_bytes(ss, kPair);
    };
    std::vector<Candidate> prev;
    std::size_t prev_total = logs[0].size_bytes(kPair);
    for (std::size_t n = 1; n <= 8; ++n) {
      const auto cur = choose_savings(cands, logs, n, kPair);
      REQUIRE(cur.size() >= prev.size());
      CHECK(std::equal(prev.begin(), prev.end(), cur.begin()));
      const auto now = total(to_specs(cur));
      CHECK(now <= prev_total);
      if (cur.size() > prev.size()) CHECK(now < prev_total);
      prev = cur;
      prev_total = now;
    }
  }
}

TEST_CASE("static analysis ranks loop paths first and skips excluded functions") {
  const auto cfg = static_fixture();
  const auto a = analyze_cfg(cfg);
  const auto main_fn = *cfg.function_index("main");
  const auto classify = *cfg.function_index("classify");
  const auto log_line = *cfg.function_index("log_line");
  const auto unused = *cfg.function_index("unused");
  CHECK(a.max_branching_function == classify);
  CHECK(a.excluded[unused]);
  CHECK(a.excluded[log_line]);
  CHECK_FALSE(a.excluded[main_fn]);
  for (const auto& p : a.paths) {
    CHECK(p.function != unused);
    CHECK(p.function != log_line);
  }

  const auto ranked = rank_static(cfg, a);
  REQUIRE_FALSE(ranked.empty());
  CHECK(ranked[0].static_priority == 1);
  const auto loop_blocks = a.loops.loops.at(0).blocks;
  for (const auto& t : ranked[0].entries) {
    CHECK(std::binary_search(loop_blocks.begin(), loop_blocks.end(), *cfg.block_index(block_id_of(t.src))));
    CHECK(std::binary_search(loop_blocks.begin(), loop_blocks.end(), *cfg.block_index(block_id_of(t.dest))));
  }
  // every classify path is class 2 and comes after all class 1 paths
  bool seen2 = false;
  for (const auto& c : ranked) {
    if (c.static_priority == 2) seen2 = true;
    if (seen2) CHECK(c.static_priority != 1);
  }
  CHECK(seen2);
}

TEST_CASE("static selection order, overlap and budget") {
  auto sc = [](const std::string& s, int cls) {
    return Candidate{word(s), 0, CandidateOrigin::static_analysis, cls};
  };
  const std::vector<Candidate> ranked{sc("AB", 1), sc("ABC", 1), sc("BD", 1), sc("EF", 2), sc("GHIJKL", 3), sc("MN", 3)};
  // "ABC" shares A,B with the first pick; "BD" shares B
  CHECK(entries_of(choose_static(ranked, 8, 1000, kPair)) ==
        W{word("AB"), word("EF"), word("GHIJKL"), word("MN")});
  CHECK(entries_of(choose_static(ranked, 2, 1000, kPair)) == W{word("AB"), word("EF")});
  // budget for two small blocks: the long one stops the walk
  CHECK(entries_of(choose_static(ranked, 8, 20, kPair)) == W{word("AB"), word("EF")});
  CHECK(choose_static(ranked, 8, 0, kPair).empty());

  // two equal-priority paths: the shorter one is picked first
  const auto cfg = static_fixture();
  const auto r = rank_static(cfg, analyze_cfg(cfg));
  for (std::size_t i = 1; i < r.size(); ++i)
    if (r[i].static_priority == r[i - 1].static_priority) CHECK(r[i - 1].entries.size() <= r[i].entries.size());
}
