#pragma once

#include <cassert>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "speclog/encoding.hpp"

namespace speclog {

enum class DetectorPhase : std::uint8_t { idle, monitor, detect };

/// Progress of one Block Detect state machine through its spec.
struct DetectorState {
  DetectorPhase phase = DetectorPhase::idle;
  std::size_t block_ptr = 0;
};

/// Repeat coalescing state. `repeat_ctr` is the number of consecutive
/// occurrences of `last_id` currently represented at the log tail (1 for a
/// bare symbol).
struct RepeatState {
  std::optional<std::uint8_t> last_id;
  std::uint16_t repeat_ctr = 0;
  std::size_t raw_since_symbol = 0;

  bool tail_is_countable() const { return last_id.has_value() && raw_since_symbol == 0; }
};

struct StepResult {
  /// Index of the spec that won the priority MUX this step, if any completed.
  std::optional<std::size_t> detected;
  /// How many detectors completed simultaneously.
  std::size_t completions = 0;
};

/// Online log compressor. Every transfer is appended raw; whenever one or more
/// detectors complete their sub-path, the lowest-index spec replaces its raw
/// entries at the log tail with its symbol, and consecutive symbols of the same
/// spec collapse into [symbol, count].
class Engine {
 public:
  Engine(std::vector<SubPathSpec> specs, EngineConfig config)
      : specs_(std::move(specs)), config_(config), detectors_(specs_.size()) {
    config_.validate();
    if (specs_.size() > config_.max_sub_paths)
      throw Error(Errc::too_many_specs, std::to_string(specs_.size()) + " specs exceed max_sub_paths " +
                                            std::to_string(config_.max_sub_paths));
    for (const auto& s : specs_)
      for (const auto& t : s.entries)
        if (config_.mode == MatchMode::dest && t.src.value != 0)
          throw Error(Errc::mode_mismatch, "destination-only engine given a pair spec");
    validate_specs(specs_, config_);
  }

  StepResult step(const Transfer& transfer) {
    check_transfer(transfer, config_);
    const Transfer t = normalize(transfer, config_.mode);
    log_.elements.push_back(raw_element(t, config_.mode));
    size_words_ += config_.mode == MatchMode::pair ? 2 : 1;
    ++repeat_.raw_since_symbol;

    StepResult result;
    for (std::size_t i = 0; i < specs_.size(); ++i) {
      if (advance(i, t)) {
        ++result.completions;
        if (!result.detected) result.detected = i;
      }
    }
    if (result.detected) replace(*result.detected);
    return result;
  }

  /// Abandons partial matches and hands back the log built so far.
  CompressedLog finalize() && { return std::move(log_); }

  /// Emits the current log as a finished slice and starts a fresh one with all
  /// detection and repeat state cleared.
  CompressedLog take_slice() {
    CompressedLog out = std::move(log_);
    log_ = {};
    size_words_ = 0;
    repeat_ = {};
    for (auto& d : detectors_) d = {};
    return out;
  }

  const CompressedLog& log() const { return log_; }
  std::size_t size_bytes() const { return size_words_ * config_.word_bytes(); }
  std::span<const DetectorState> detectors() const { return detectors_; }
  const RepeatState& repeat() const { return repeat_; }
  const std::vector<SubPathSpec>& specs() const { return specs_; }
  const EngineConfig& config() const { return config_; }

 private:
  bool matches(const Transfer& t, const Transfer& expected) const {
    return config_.mode == MatchMode::pair ? t == expected : t.dest == expected.dest;
  }

  // One FSM transition for detector i. Returns true on transfer_last.
  bool advance(std::size_t i, const Transfer& t) {
    auto& d = detectors_[i];
    const auto& entries = specs_[i].entries;
    const bool was_monitoring = d.block_ptr > 0;
    if (matches(t, entries[d.block_ptr])) {
      if (d.block_ptr + 1 == entries.size()) {
        d = {DetectorPhase::detect, 0};
        return true;
      }
      d = {DetectorPhase::monitor, d.block_ptr + 1};
      return false;
    }
    d = {};
    if (was_monitoring && config_.retry_on_mismatch && matches(t, entries[0])) {
      if (entries.size() == 1) {
        d = {DetectorPhase::detect, 0};
        return true;
      }
      d = {DetectorPhase::monitor, 1};
    }
    return false;
  }

  void replace(std::size_t winner) {
    const auto& spec = specs_[winner];
    const std::size_t len = spec.len();
    assert(repeat_.raw_since_symbol >= len);
    log_.elements.resize(log_.elements.size() - len);
    size_words_ -= len * (config_.mode == MatchMode::pair ? 2 : 1);
    repeat_.raw_since_symbol -= len;

    if (repeat_.tail_is_countable() && *repeat_.last_id == spec.id && repeat_.repeat_ctr < kMaxRepeatCount) {
      if (repeat_.repeat_ctr == 1) {
        log_.elements.push_back(RepeatCount{2});
        ++size_words_;
      } else {
        std::get<RepeatCount>(log_.elements.back()).count = static_cast<std::uint16_t>(repeat_.repeat_ctr + 1);
      }
      ++repeat_.repeat_ctr;
    } else {
      log_.elements.push_back(Symbol{spec.id});
      ++size_words_;
      repeat_.last_id = spec.id;
      repeat_.repeat_ctr = 1;
    }
    repeat_.raw_since_symbol = 0;
    for (auto& d : detectors_) d = {};
  }

  std::vector<SubPathSpec> specs_;
  EngineConfig config_;
  std::vector<DetectorState> detectors_;
  RepeatState repeat_;
  CompressedLog log_;
  std::size_t size_words_ = 0;
};

inline CompressedLog compress_trace(std::span<const Transfer> trace, const std::vector<SubPathSpec>& specs,
                                    const EngineConfig& cfg) {
  Engine engine(specs, cfg);
  for (const auto& t : trace) engine.step(t);
  return std::move(engine).finalize();
}

/// Splits the compressed stream into slices no larger than
/// `cfg.slice_size_bytes`. Matches never span a slice boundary.
inline std::vector<CompressedLog> slice_compress(std::span<const Transfer> trace,
                                                 const std::vector<SubPathSpec>& specs, const EngineConfig& cfg) {
  if (cfg.slice_size_bytes < cfg.raw_element_bytes())
    throw Error(Errc::slice_too_small, "slice of " + std::to_string(cfg.slice_size_bytes) +
                                           " bytes cannot hold one raw element");
  Engine engine(specs, cfg);
  std::vector<CompressedLog> slices;
  const auto raw_bytes = cfg.raw_element_bytes();
  for (const auto& t : trace) {
    if (engine.size_bytes() + raw_bytes > cfg.slice_size_bytes) slices.push_back(engine.take_slice());
    engine.step(t);
  }
  if (!engine.log().empty() || slices.empty()) slices.push_back(engine.take_slice());
  return slices;
}

/// Replaces every symbol (and repeat count) by the raw entries of its spec.
inline RawLog expand(const CompressedLog& log, const std::vector<SubPathSpec>& specs, const EngineConfig& cfg) {
  std::vector<const SubPathSpec*> by_id(256, nullptr);
  for (const auto& s : specs) by_id[s.id] = &s;

  RawLog out;
  const SubPathSpec* prev = nullptr;
  auto emit = [&](const SubPathSpec& s) {
    for (const auto& t : s.entries) out.elements.push_back(raw_element(t, cfg.mode));
  };
  for (const auto& e : log.elements) {
    if (const auto* sym = std::get_if<Symbol>(&e)) {
      const auto* s = by_id[sym->id];
      if (!s) throw Error(Errc::unknown_symbol, "symbol " + std::to_string(sym->id) + " has no installed spec");
      emit(*s);
      prev = s;
    } else if (const auto* rc = std::get_if<RepeatCount>(&e)) {
      if (!prev) throw Error(Errc::malformed_log, "repeat count not preceded by a symbol");
      if (rc->count < 2) throw Error(Errc::malformed_log, "repeat count below 2");
      for (std::uint16_t k = 1; k < rc->count; ++k) emit(*prev);
      prev = nullptr;
    } else {
      if ((cfg.mode == MatchMode::pair) != std::holds_alternative<RawPair>(e))
        throw Error(Errc::malformed_log, "raw element does not match the configured mode");
      out.elements.push_back(e);
      prev = nullptr;
    }
  }
  return out;
}

inline RawLog expand_slices(std::span<const CompressedLog> slices, const std::vector<SubPathSpec>& specs,
                            const EngineConfig& cfg) {
  RawLog out;
  for (const auto& s : slices) {
    auto part = expand(s, specs, cfg);
    out.elements.insert(out.elements.end(), part.elements.begin(), part.elements.end());
  }
  return out;
}

}  // namespace speclog
