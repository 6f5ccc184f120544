#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "speclog/blockmem.hpp"
#include "speclog/cfg.hpp"
#include "speclog/oracle.hpp"

namespace speclog {

enum class CandidateOrigin : std::uint8_t { mined, static_analysis };

struct Candidate {
  std::vector<Transfer> entries;
  std::size_t count = 0;
  CandidateOrigin origin = CandidateOrigin::mined;
  std::optional<int> static_priority;  // 1 (best) .. 3

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct PolicyConfig {
  std::size_t n_paths = 2;
  std::size_t min_len = 2;
  std::size_t max_len = 16;
  double threshold_t = 100.0;
  std::size_t budget_bytes = 256;

  void validate() const {
    if (n_paths < 1 || n_paths > 8) throw Error(Errc::invalid_config, "n_paths must be in 1..8");
    if (min_len < 1 || min_len > max_len) throw Error(Errc::invalid_config, "bad length range");
    if (!(threshold_t > 0)) throw Error(Errc::invalid_config, "threshold must be positive");
  }
};

/// Transfers of a raw log in the canonical form of `mode`.
inline std::vector<Transfer> log_transfers(const RawLog& log) {
  std::vector<Transfer> out;
  out.reserve(log.elements.size());
  for (const auto& e : log.elements) {
    if (!is_raw(e)) throw Error(Errc::malformed_log, "candidate mining needs expanded logs");
    out.push_back(raw_transfer(e));
  }
  return out;
}

namespace detail {

struct WindowHash {
  std::size_t operator()(const std::vector<Transfer>& w) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& t : w) {
      h = (h ^ t.src.value) * 1099511628211ull;
      h = (h ^ t.dest.value) * 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

inline bool contains_run(const std::vector<Transfer>& hay, const std::vector<Transfer>& needle) {
  return needle.size() <= hay.size() && std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace detail

/// True if either path occurs as a contiguous run inside the other.
inline bool nested(const Candidate& a, const Candidate& b) {
  return detail::contains_run(a.entries, b.entries) || detail::contains_run(b.entries, a.entries);
}

/// Ranking shared by the log-driven policies: higher count, then shorter, then
/// lexicographically smaller entries.
inline bool by_count(const Candidate& a, const Candidate& b) {
  if (a.count != b.count) return a.count > b.count;
  if (a.entries.size() != b.entries.size()) return a.entries.size() < b.entries.size();
  return a.entries < b.entries;
}

/// Every distinct window with length in [min_len, max_len], counted as greedy
/// left-to-right non-overlapping occurrences summed over the logs.
inline std::vector<Candidate> enumerate_candidates(std::span<const RawLog> logs, std::size_t min_len, std::size_t max_len) {
  struct Tally {
    std::size_t count = 0;
    std::size_t log = static_cast<std::size_t>(-1);
    std::size_t next_free = 0;
  };
  std::unordered_map<std::vector<Transfer>, Tally, detail::WindowHash> tally;
  for (std::size_t li = 0; li < logs.size(); ++li) {
    const auto seq = log_transfers(logs[li]);
    for (std::size_t len = min_len; len <= max_len && len <= seq.size(); ++len) {
      for (std::size_t i = 0; i + len <= seq.size(); ++i) {
        auto& t = tally[std::vector<Transfer>(seq.begin() + static_cast<std::ptrdiff_t>(i),
                                              seq.begin() + static_cast<std::ptrdiff_t>(i + len))];
        if (t.log != li) {
          t.log = li;
          t.next_free = 0;
        }
        if (i >= t.next_free) {
          ++t.count;
          t.next_free = i + len;
        }
      }
    }
  }
  std::vector<Candidate> out;
  out.reserve(tally.size());
  for (auto& [w, t] : tally) out.push_back({w, t.count, CandidateOrigin::mined, std::nullopt});
  std::sort(out.begin(), out.end(), by_count);
  return out;
}

inline std::vector<SubPathSpec> to_specs(const std::vector<Candidate>& chosen) {
  std::vector<SubPathSpec> specs;
  for (std::size_t i = 0; i < chosen.size(); ++i)
    specs.push_back({static_cast<std::uint8_t>(i + 1), chosen[i].entries});
  return specs;
}

/// The most frequent candidates such that none is nested inside another.
inline std::vector<Candidate> choose_top(std::vector<Candidate> candidates, std::size_t n_paths) {
  std::sort(candidates.begin(), candidates.end(), by_count);
  std::vector<Candidate> chosen;
  for (auto& c : candidates) {
    if (chosen.size() == n_paths) break;
    if (std::none_of(chosen.begin(), chosen.end(), [&](const Candidate& s) { return nested(s, c); }))
      chosen.push_back(std::move(c));
  }
  return chosen;
}

inline std::vector<SubPathSpec> policy_top(const std::vector<Candidate>& candidates, std::size_t n_paths) {
  return to_specs(choose_top(candidates, n_paths));
}

/// Seeds with the most frequent of the shortest candidates, then lets any
/// remaining candidate evict the least frequent selection when it occurs more
/// than `threshold_t` percent more often.
inline std::vector<Candidate> choose_minimize(std::vector<Candidate> candidates, std::size_t n_paths, double threshold_t) {
  auto by_size = [](const Candidate& a, const Candidate& b) {
    if (a.entries.size() != b.entries.size()) return a.entries.size() < b.entries.size();
    return by_count(a, b);
  };
  std::sort(candidates.begin(), candidates.end(), by_size);
  std::vector<Candidate> chosen;
  std::vector<Candidate> rest;
  for (auto& c : candidates) {
    if (chosen.size() < n_paths &&
        std::none_of(chosen.begin(), chosen.end(), [&](const Candidate& s) { return nested(s, c); }))
      chosen.push_back(std::move(c));
    else
      rest.push_back(std::move(c));
  }
  std::sort(rest.begin(), rest.end(), by_count);
  const double factor = 1.0 + threshold_t / 100.0;
  for (auto& c : rest) {
    if (chosen.empty()) break;
    // least frequent selection; among equals, the one ranked last
    std::size_t victim = 0;
    for (std::size_t i = 1; i < chosen.size(); ++i)
      if (chosen[i].count < chosen[victim].count ||
          (chosen[i].count == chosen[victim].count && by_count(chosen[victim], chosen[i])))
        victim = i;
    if (!(static_cast<double>(c.count) > factor * static_cast<double>(chosen[victim].count))) continue;
    bool clash = false;
    for (std::size_t i = 0; i < chosen.size(); ++i)
      if (i != victim && nested(chosen[i], c)) clash = true;
    if (clash) continue;
    chosen[victim] = std::move(c);
  }
  std::sort(chosen.begin(), chosen.end(), by_count);
  return chosen;
}

inline std::vector<SubPathSpec> policy_minimize(const std::vector<Candidate>& candidates, std::size_t n_paths,
                                                double threshold_t) {
  return to_specs(choose_minimize(candidates, n_paths, threshold_t));
}

/// Most frequent first, taking every candidate whose block still fits in the
/// remaining BlockMem budget. Nested candidates are skipped as in Top.
inline std::vector<Candidate> choose_select(std::vector<Candidate> candidates, std::size_t budget_bytes,
                                            const EngineConfig& cfg) {
  std::sort(candidates.begin(), candidates.end(), by_count);
  std::vector<Candidate> chosen;
  std::size_t used = 0;
  for (auto& c : candidates) {
    if (chosen.size() == cfg.max_sub_paths) break;
    const auto cost = block_bytes(c.entries.size(), cfg);
    if (used + cost > budget_bytes) continue;
    if (std::any_of(chosen.begin(), chosen.end(), [&](const Candidate& s) { return nested(s, c); })) continue;
    used += cost;
    chosen.push_back(std::move(c));
  }
  return chosen;
}

inline std::vector<SubPathSpec> policy_select(const std::vector<Candidate>& candidates, std::size_t budget_bytes,
                                              const EngineConfig& cfg) {
  return to_specs(choose_select(candidates, budget_bytes, cfg));
}

/// Bytes saved by installing `spec` alone, net of its BlockMem block. Negative
/// when the spec does not pay for itself.
inline long long estimate_savings(const SubPathSpec& spec, std::span<const RawLog> logs, const EngineConfig& cfg) {
  const std::vector<SubPathSpec> one{spec};
  long long saved = 0;
  for (const auto& log : logs) {
    const auto trace = log_transfers(log);
    saved += static_cast<long long>(log.size_bytes(cfg)) -
             static_cast<long long>(oracle::compress(trace, one, cfg).size_bytes(cfg));
  }
  return saved - static_cast<long long>(block_bytes(spec.len(), cfg));
}

inline constexpr std::size_t kSavingsPool = 256;

/// Greedy on measured benefit. Each round adds the pool candidate that most
/// reduces compressed logs plus BlockMem given the specs already picked (the
/// newcomer gets the lowest priority), and stops once nothing helps. The pool
/// is pre-ranked by the upper bound count * (raw size - one word).
inline std::vector<Candidate> choose_savings(std::vector<Candidate> candidates, std::span<const RawLog> logs,
                                             std::size_t n_paths, const EngineConfig& cfg) {
  auto bound = [&](const Candidate& c) {
    return static_cast<long long>(c.count) *
               static_cast<long long>(c.entries.size() * cfg.raw_element_bytes() - cfg.word_bytes()) -
           static_cast<long long>(block_bytes(c.entries.size(), cfg));
  };
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](const Candidate& a, const Candidate& b) { return bound(a) > bound(b); });
  candidates.resize(std::min(candidates.size(), kSavingsPool));

  std::vector<std::vector<Transfer>> traces;
  std::size_t current = 0;
  for (const auto& log : logs) {
    traces.push_back(log_transfers(log));
    current += log.size_bytes(cfg);
  }
  auto total_with = [&](const std::vector<SubPathSpec>& specs) {
    std::size_t bytes = blockmem_bytes(specs, cfg);
    for (const auto& t : traces) bytes += oracle::compress(t, specs, cfg).size_bytes(cfg);
    return bytes;
  };

  std::vector<Candidate> chosen;
  std::vector<SubPathSpec> specs;
  std::vector<bool> used(candidates.size(), false);
  while (chosen.size() < n_paths) {
    std::optional<std::size_t> pick;
    std::size_t best = current;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (used[i]) continue;
      specs.push_back({static_cast<std::uint8_t>(chosen.size() + 1), candidates[i].entries});
      const auto bytes = total_with(specs);
      specs.pop_back();
      if (bytes < best) {
        best = bytes;
        pick = i;
      }
    }
    if (!pick) break;
    used[*pick] = true;
    current = best;
    specs.push_back({static_cast<std::uint8_t>(chosen.size() + 1), candidates[*pick].entries});
    chosen.push_back(candidates[*pick]);
  }
  return chosen;
}

// -- static analysis ranking ---------------------------------------------------

struct StaticAnalysis {
  LoopInfo loops;
  std::vector<Segment> segments;
  std::vector<SegmentPath> paths;
  std::optional<std::size_t> max_branching_function;
  std::vector<bool> excluded;  // per function
};

/// Functions never called, or without an internal branch, contribute nothing.
inline std::vector<bool> excluded_functions(const Cfg& cfg) {
  std::vector<bool> ex(cfg.functions.size());
  for (std::size_t f = 0; f < cfg.functions.size(); ++f) ex[f] = !cfg.is_called(f) || cfg.branch_count(f) == 0;
  return ex;
}

inline std::optional<std::size_t> max_branching_function(const Cfg& cfg) {
  std::optional<std::size_t> best;
  std::size_t best_count = 0;
  for (std::size_t f = 0; f < cfg.functions.size(); ++f) {
    const auto c = cfg.branch_count(f);
    if (c > best_count || (c == best_count && c > 0 && best && cfg.functions[f].name < cfg.functions[*best].name)) {
      best = f;
      best_count = c;
    }
  }
  return best;
}

/// Priority class of a path: 1 inside a loop, 2 in the max-branching
/// function, 3 in a function called from a loop or from the max-branching
/// function; nullopt otherwise.
inline std::optional<int> static_priority(const Cfg& cfg, const LoopInfo& loops, std::optional<std::size_t> max_fn,
                                          const SegmentPath& p) {
  std::vector<std::size_t> common = loops.membership[p.blocks.front()];
  for (auto b : p.blocks) {
    std::vector<std::size_t> keep;
    std::set_intersection(common.begin(), common.end(), loops.membership[b].begin(), loops.membership[b].end(),
                          std::back_inserter(keep));
    common = std::move(keep);
  }
  if (!common.empty()) return 1;
  if (max_fn && p.function == *max_fn) return 2;
  for (const auto& e : cfg.edges) {
    if (e.kind != EdgeKind::call || e.dst != cfg.functions[p.function].entry) continue;
    if (loops.in_loop(e.src) || (max_fn && cfg.function_of(e.src) == *max_fn)) return 3;
  }
  return std::nullopt;
}

inline StaticAnalysis analyze_cfg(const Cfg& cfg, std::size_t path_cap = kDefaultPathCap) {
  StaticAnalysis a;
  a.loops = find_loops(cfg);
  a.segments = merge_segments(cfg, a.loops, segment_cfg(cfg, a.loops));
  a.max_branching_function = max_branching_function(cfg);
  a.excluded = excluded_functions(cfg);
  for (const auto& s : a.segments) {
    if (a.excluded[s.function]) continue;
    auto ps = enumerate_segment_paths(s, cfg, path_cap);
    a.paths.insert(a.paths.end(), ps.begin(), ps.end());
  }
  return a;
}

/// Orders static paths by priority class, then length, then entries.
/// Duplicate transfer sequences keep their best class.
inline std::vector<Candidate> rank_static(const Cfg& cfg, const StaticAnalysis& a) {
  std::map<std::vector<Transfer>, int> best;
  for (const auto& p : a.paths) {
    if (a.excluded[p.function]) continue;
    const int cls = static_priority(cfg, a.loops, a.max_branching_function, p).value_or(4);
    auto [it, fresh] = best.emplace(p.transfers, cls);
    if (!fresh) it->second = std::min(it->second, cls);
  }
  std::vector<Candidate> ranked;
  for (const auto& [entries, cls] : best)
    ranked.push_back({entries, 0, CandidateOrigin::static_analysis, cls <= 3 ? std::optional<int>(cls) : std::nullopt});
  std::stable_sort(ranked.begin(), ranked.end(), [](const Candidate& x, const Candidate& y) {
    const int cx = x.static_priority.value_or(4), cy = y.static_priority.value_or(4);
    if (cx != cy) return cx < cy;
    if (x.entries.size() != y.entries.size()) return x.entries.size() < y.entries.size();
    return x.entries < y.entries;
  });
  return ranked;
}

inline bool shares_transfer(const Candidate& a, const Candidate& b) {
  for (const auto& t : a.entries)
    if (std::find(b.entries.begin(), b.entries.end(), t) != b.entries.end()) return true;
  return false;
}

/// Walks the ranked list taking candidates that share no transfer with an
/// earlier pick. Stops at `n_paths` or at the first candidate that no longer
/// fits the BlockMem budget.
inline std::vector<Candidate> choose_static(const std::vector<Candidate>& ranked, std::size_t n_paths,
                                            std::size_t budget_bytes, const EngineConfig& cfg) {
  std::vector<Candidate> chosen;
  std::size_t used = 0;
  for (const auto& c : ranked) {
    if (chosen.size() == n_paths) break;
    if (std::any_of(chosen.begin(), chosen.end(), [&](const Candidate& s) { return shares_transfer(s, c); })) continue;
    const auto cost = block_bytes(c.entries.size(), cfg);
    if (used + cost > budget_bytes) break;
    used += cost;
    chosen.push_back(c);
  }
  return chosen;
}

inline std::vector<SubPathSpec> select_static(const std::vector<Candidate>& ranked, std::size_t n_paths,
                                              std::size_t budget_bytes, const EngineConfig& cfg) {
  return to_specs(choose_static(ranked, n_paths, budget_bytes, cfg));
}

}  // namespace speclog
