#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "speclog/speclog.hpp"

namespace testsupport {

using namespace speclog;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::string fixture(const std::string& name) { return std::string(SPECLOG_FIXTURES) + "/" + name; }

inline Cfg load_cfg(const std::string& name) { return build_cfg(read_file(fixture(name))); }

inline EngineConfig make_config(MatchMode mode, unsigned width) {
  EngineConfig c;
  c.mode = mode;
  c.addr_width = width;
  return c;
}

/// Small transfer alphabet so random traces actually hit the specs.
inline std::vector<Transfer> alphabet(std::mt19937_64& rng, const EngineConfig& cfg, std::size_t n) {
  const std::uint32_t hi = cfg.addr_width == 16 ? 0x7fff : 0x7fffffff;
  std::uniform_int_distribution<std::uint32_t> addr(cfg.min_code_addr, hi);
  std::vector<Transfer> out;
  while (out.size() < n) {
    Transfer t = cfg.mode == MatchMode::pair ? pair(addr(rng), addr(rng)) : dest_only(addr(rng));
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  }
  return out;
}

inline std::vector<SubPathSpec> random_specs(std::mt19937_64& rng, const std::vector<Transfer>& alpha,
                                             std::size_t count, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alpha.size() - 1);
  std::vector<SubPathSpec> specs;
  for (std::size_t i = 0; i < count; ++i) {
    SubPathSpec s;
    s.id = static_cast<std::uint8_t>(i + 1);
    const auto n = len(rng);
    for (std::size_t k = 0; k < n; ++k) s.entries.push_back(alpha[pick(rng)]);
    specs.push_back(std::move(s));
  }
  return specs;
}

/// Interleaves whole spec occurrences (often repeated) with noise.
inline std::vector<Transfer> random_trace(std::mt19937_64& rng, const std::vector<Transfer>& alpha,
                                          const std::vector<SubPathSpec>& specs, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> total(0, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alpha.size() - 1);
  std::uniform_int_distribution<int> coin(0, 9);
  std::uniform_int_distribution<int> reps(1, 6);
  const auto target = total(rng);
  std::vector<Transfer> out;
  while (out.size() < target) {
    if (!specs.empty() && coin(rng) < 5) {
      const auto& s = specs[std::uniform_int_distribution<std::size_t>(0, specs.size() - 1)(rng)];
      const int r = reps(rng);
      for (int k = 0; k < r; ++k) {
        // sometimes cut the last occurrence short
        std::size_t n = s.len();
        if (k + 1 == r && coin(rng) == 0) n = std::uniform_int_distribution<std::size_t>(0, n)(rng);
        for (std::size_t j = 0; j < n; ++j) out.push_back(s.entries[j]);
      }
    } else {
      out.push_back(alpha[pick(rng)]);
    }
  }
  out.resize(target);
  return out;
}

inline std::vector<Transfer> repeat(const std::vector<Transfer>& body, std::size_t k) {
  std::vector<Transfer> out;
  for (std::size_t i = 0; i < k; ++i) out.insert(out.end(), body.begin(), body.end());
  return out;
}

}  // namespace testsupport

namespace testsupport {

/// Builds CFG documents in code. Block `id` lives at 0x0400 + 0x10*id.
class CfgBuilder {
 public:
  CfgBuilder& function(const std::string& name, std::uint32_t entry) {
    doc_["functions"].push_back({{"name", name}, {"entry", entry}});
    return *this;
  }
  CfgBuilder& block(std::uint32_t id, const std::string& fn) {
    const std::uint32_t start = 0x0400 + 0x10 * id;
    doc_["blocks"].push_back({{"id", id}, {"start", to_hex(start)}, {"end", to_hex(start + 6)}, {"function", fn}});
    return *this;
  }
  CfgBuilder& edge(std::uint32_t src, std::uint32_t dst, const std::string& kind = "jump",
                   std::optional<std::uint32_t> ret = std::nullopt) {
    nlohmann::json e = {{"src", src}, {"dst", dst}, {"kind", kind}};
    if (ret) e["ret"] = *ret;
    doc_["edges"].push_back(std::move(e));
    return *this;
  }
  CfgBuilder& entry(const std::string& name) {
    doc_["entry"] = name;
    return *this;
  }
  std::string text() const {
    auto d = doc_;
    for (const char* k : {"functions", "blocks", "edges"})
      if (!d.contains(k)) d[k] = nlohmann::json::array();
    return d.dump();
  }
  Cfg build() const { return build_cfg(text()); }

 private:
  nlohmann::json doc_ = nlohmann::json::object();
};

inline Transfer edge_transfer(std::uint32_t from_id, std::uint32_t to_id) {
  return pair(0x0400 + 0x10 * from_id + 6, 0x0400 + 0x10 * to_id);
}

}  // namespace testsupport

namespace testsupport {

/// main loops over a two-way branch, then calls `classify` (the most
/// branching function) and `log_line` (branch-free). `unused` is never called.
inline Cfg static_fixture() {
  return CfgBuilder()
      .entry("main")
      .function("main", 0)
      .function("classify", 20)
      .function("log_line", 30)
      .function("unused", 40)
      .block(0, "main").block(1, "main").block(2, "main").block(3, "main").block(4, "main")
      .block(5, "main").block(6, "main").block(7, "main")
      .edge(0, 1, "fallthrough")
      .edge(1, 2, "cond_true").edge(1, 3, "cond_false")
      .edge(2, 4, "jump").edge(3, 4, "fallthrough")
      .edge(4, 1, "cond_true").edge(4, 5, "cond_false")
      .edge(5, 20, "call", 6).edge(6, 30, "call", 7)
      .block(20, "classify").block(21, "classify").block(22, "classify").block(23, "classify")
      .block(24, "classify").block(25, "classify").block(26, "classify").block(27, "classify").block(28, "classify")
      .edge(20, 21, "cond_true").edge(20, 22, "cond_false")
      .edge(21, 23, "cond_true").edge(21, 24, "cond_false")
      .edge(22, 25, "jump").edge(23, 25, "jump").edge(24, 25, "fallthrough")
      .edge(25, 26, "cond_true").edge(25, 27, "cond_false")
      .edge(26, 28, "jump").edge(27, 28, "fallthrough")
      .edge(28, 6, "return")
      .block(30, "log_line").block(31, "log_line").block(32, "log_line")
      .edge(30, 31, "fallthrough").edge(31, 32, "jump").edge(32, 7, "return")
      .block(40, "unused").block(41, "unused").block(42, "unused").block(43, "unused")
      .edge(40, 41, "cond_true").edge(40, 42, "cond_false").edge(41, 43, "jump").edge(42, 43, "fallthrough")
      .build();
}

/// Block ids whose address range contains `a` (start or end of a fixture block).
inline std::uint32_t block_id_of(Address a) { return (a.value - 0x0400) / 0x10; }

}  // namespace testsupport

namespace testsupport {

/// Distinct random candidates over a tiny alphabet so nesting is common.
inline std::vector<Candidate> random_candidates(std::mt19937_64& rng, std::size_t n, std::size_t max_len = 4,
                                                std::size_t max_count = 20) {
  std::uniform_int_distribution<std::size_t> len(1, max_len), count(0, max_count);
  std::uniform_int_distribution<std::uint32_t> sym(0, 2);
  std::set<std::vector<Transfer>> seen;
  std::vector<Candidate> out;
  while (out.size() < n) {
    std::vector<Transfer> e;
    for (std::size_t k = len(rng); k > 0; --k) {
      const auto s = sym(rng);
      e.push_back(pair(0x0400 + s, 0x0500 + s));
    }
    if (!seen.insert(e).second) continue;
    out.push_back({e, count(rng), CandidateOrigin::mined, std::nullopt});
  }
  return out;
}

/// Naive greedy non-overlapping occurrence count of `w` in `seq`.
inline std::size_t naive_count(const std::vector<Transfer>& seq, const std::vector<Transfer>& w) {
  std::size_t n = 0;
  for (std::size_t i = 0; i + w.size() <= seq.size();) {
    if (std::equal(w.begin(), w.end(), seq.begin() + static_cast<std::ptrdiff_t>(i))) {
      ++n;
      i += w.size();
    } else {
      ++i;
    }
  }
  return n;
}

}  // namespace testsupport
