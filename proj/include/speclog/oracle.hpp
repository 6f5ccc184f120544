#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "speclog/encoding.hpp"

// Reference compressor. Shares nothing with Engine beyond the core types: it
// tracks, per spec, the log position where the current match attempt started
// and re-reads the log itself to decide completions and repeat coalescing.

namespace speclog::oracle {

namespace detail {

inline constexpr std::size_t kNoAttempt = static_cast<std::size_t>(-1);

struct Scanner {
  const std::vector<SubPathSpec>& specs;
  const EngineConfig& cfg;
  std::vector<LogElement> out;
  std::vector<std::size_t> attempt;  // log index where each spec's attempt began
  std::size_t words = 0;

  Scanner(const std::vector<SubPathSpec>& s, const EngineConfig& c)
      : specs(s), cfg(c), attempt(s.size(), kNoAttempt) {}

  bool same(const LogElement& e, const Transfer& want) const {
    if (const auto* p = std::get_if<RawPair>(&e)) return p->transfer == want;
    if (const auto* d = std::get_if<RawDest>(&e)) return d->dest == want.dest;
    return false;
  }

  void push(const Transfer& t) {
    if (t.src.value >= cfg.addr_limit() && cfg.mode == MatchMode::pair)
      throw Error(Errc::address_out_of_range, "source address out of range");
    if (t.dest.value >= cfg.addr_limit()) throw Error(Errc::address_out_of_range, "dest address out of range");
    if (cfg.mode == MatchMode::pair)
      out.push_back(RawPair{t});
    else
      out.push_back(RawDest{t.dest});
    words += cfg.mode == MatchMode::pair ? 2 : 1;

    const std::size_t q = out.size() - 1;
    std::size_t winner = kNoAttempt;
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const auto& entries = specs[i].entries;
      bool fresh = attempt[i] == kNoAttempt;
      if (fresh) attempt[i] = q;
      std::size_t offset = q - attempt[i];
      if (!same(out[q], entries[offset])) {
        attempt[i] = kNoAttempt;
        if (fresh || !cfg.retry_on_mismatch) continue;
        // retry variant: the same element may open a new attempt
        attempt[i] = q;
        offset = 0;
        if (!same(out[q], entries[0])) {
          attempt[i] = kNoAttempt;
          continue;
        }
      }
      if (offset + 1 == entries.size() && winner == kNoAttempt) winner = i;
    }
    if (winner != kNoAttempt) collapse(winner);
  }

  void collapse(std::size_t winner) {
    const auto& spec = specs[winner];
    const std::size_t len = spec.len();
    for (std::size_t k = 0; k < len; ++k) {
      words -= out.back().index() == 0 ? 2 : 1;
      out.pop_back();
    }
    const std::size_t n = out.size();
    const bool sym_tail = n >= 1 && out[n - 1] == LogElement{Symbol{spec.id}};
    const bool counted_tail = n >= 2 && out[n - 2] == LogElement{Symbol{spec.id}} &&
                              std::holds_alternative<RepeatCount>(out[n - 1]);
    if (sym_tail) {
      out.push_back(RepeatCount{2});
      words += 1;
    } else if (counted_tail && std::get<RepeatCount>(out[n - 1]).count < kMaxRepeatCount) {
      ++std::get<RepeatCount>(out[n - 1]).count;
    } else {
      out.push_back(Symbol{spec.id});
      words += 1;
    }
    for (auto& a : attempt) a = kNoAttempt;
  }

  Log take() {
    Log l{std::move(out)};
    out.clear();
    words = 0;
    for (auto& a : attempt) a = kNoAttempt;
    return l;
  }
};

}  // namespace detail

/// Reference single-pass compressor; must agree with compress_trace exactly.
inline CompressedLog compress(std::span<const Transfer> trace, const std::vector<SubPathSpec>& specs,
                              const EngineConfig& cfg) {
  if (specs.size() > cfg.max_sub_paths) throw Error(Errc::too_many_specs, "too many specs");
  detail::Scanner sc(specs, cfg);
  for (const auto& t : trace) sc.push(normalize(t, cfg.mode));
  return sc.take();
}

/// Reference slicer; must agree with slice_compress exactly.
inline std::vector<CompressedLog> slices(std::span<const Transfer> trace, const std::vector<SubPathSpec>& specs,
                                         const EngineConfig& cfg) {
  const std::size_t raw_words = cfg.mode == MatchMode::pair ? 2 : 1;
  const std::size_t limit_words = cfg.slice_size_bytes / cfg.word_bytes();
  if (limit_words < raw_words) throw Error(Errc::slice_too_small, "slice too small");
  detail::Scanner sc(specs, cfg);
  std::vector<CompressedLog> result;
  for (const auto& t : trace) {
    if (sc.words + raw_words > limit_words) result.push_back(sc.take());
    sc.push(normalize(t, cfg.mode));
  }
  if (!sc.out.empty() || result.empty()) result.push_back(sc.take());
  return result;
}

}  // namespace speclog::oracle

namespace speclog {

inline CompressedLog oracle_compress(std::span<const Transfer> trace, const std::vector<SubPathSpec>& specs,
                                     const EngineConfig& cfg) {
  return oracle::compress(trace, specs, cfg);
}

}  // namespace speclog
