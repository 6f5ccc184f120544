#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "speclog/types.hpp"

namespace speclog {

using Bytes = std::vector<std::uint8_t>;

enum class LogFormat : std::uint8_t {
  /// Little-endian words exactly as the log sits in device memory. Address,
  /// symbol id and tagged counter words occupy disjoint numeric ranges.
  memory_image,
  /// One tag byte per element followed by its payload words. No range limits.
  portable_tagged,
};

inline LogFormat parse_format(std::string_view s) {
  if (s == "image") return LogFormat::memory_image;
  if (s == "tagged") return LogFormat::portable_tagged;
  throw Error(Errc::invalid_config, "unknown log format '" + std::string(s) + "'");
}

namespace detail {

inline void put_word(Bytes& out, std::uint32_t w, std::size_t word_bytes) {
  for (std::size_t i = 0; i < word_bytes; ++i) out.push_back(static_cast<std::uint8_t>(w >> (8 * i)));
}

inline std::uint32_t get_word(std::span<const std::uint8_t> in, std::size_t pos, std::size_t word_bytes) {
  std::uint32_t w = 0;
  for (std::size_t i = 0; i < word_bytes; ++i) w |= std::uint32_t{in[pos + i]} << (8 * i);
  return w;
}

}  // namespace detail

inline RawLog encode_raw(std::span<const Transfer> trace, const EngineConfig& cfg) {
  RawLog log;
  log.elements.reserve(trace.size());
  for (const auto& t : trace) {
    check_transfer(t, cfg);
    log.elements.push_back(raw_element(t, cfg.mode));
  }
  return log;
}

/// Checks the element-ordering and range invariants of a log under `cfg`.
inline void validate_log(const Log& log, const EngineConfig& cfg) {
  bool prev_symbol = false;
  for (const auto& e : log.elements) {
    if (const auto* p = std::get_if<RawPair>(&e)) {
      if (cfg.mode != MatchMode::pair) throw Error(Errc::malformed_log, "pair element in dest-mode log");
      check_transfer(p->transfer, cfg);
    } else if (const auto* d = std::get_if<RawDest>(&e)) {
      if (cfg.mode != MatchMode::dest) throw Error(Errc::malformed_log, "dest element in pair-mode log");
      check_address(d->dest, cfg);
    } else if (const auto* s = std::get_if<Symbol>(&e)) {
      if (s->id == 0) throw Error(Errc::malformed_log, "symbol id 0");
    } else {
      const auto c = std::get<RepeatCount>(e).count;
      if (!prev_symbol) throw Error(Errc::malformed_log, "repeat count not preceded by a symbol");
      if (c < 2 || c > kMaxRepeatCount) throw Error(Errc::malformed_log, "repeat count out of range");
    }
    prev_symbol = std::holds_alternative<Symbol>(e);
  }
}

inline Bytes serialize_log(const Log& log, const EngineConfig& cfg, LogFormat format) {
  validate_log(log, cfg);
  const std::size_t wb = cfg.word_bytes();
  Bytes out;
  if (format == LogFormat::memory_image) {
    out.reserve(log.size_words() * wb);
    auto addr_word = [&](Address a) {
      if (a.value < cfg.min_code_addr || a.value >= cfg.counter_tag())
        throw Error(Errc::encoding_overlap, "address " + to_hex(a.value, cfg.addr_width) +
                                                " collides with symbol or counter words");
      detail::put_word(out, a.value, wb);
    };
    for (const auto& e : log.elements) {
      if (const auto* p = std::get_if<RawPair>(&e)) {
        addr_word(p->transfer.src);
        addr_word(p->transfer.dest);
      } else if (const auto* d = std::get_if<RawDest>(&e)) {
        addr_word(d->dest);
      } else if (const auto* s = std::get_if<Symbol>(&e)) {
        detail::put_word(out, s->id, wb);
      } else {
        detail::put_word(out, cfg.counter_tag() | std::get<RepeatCount>(e).count, wb);
      }
    }
    return out;
  }

  for (const auto& e : log.elements) {
    out.push_back(static_cast<std::uint8_t>(e.index()));
    if (const auto* p = std::get_if<RawPair>(&e)) {
      detail::put_word(out, p->transfer.src.value, wb);
      detail::put_word(out, p->transfer.dest.value, wb);
    } else if (const auto* d = std::get_if<RawDest>(&e)) {
      detail::put_word(out, d->dest.value, wb);
    } else if (const auto* s = std::get_if<Symbol>(&e)) {
      detail::put_word(out, s->id, wb);
    } else {
      detail::put_word(out, std::get<RepeatCount>(e).count, wb);
    }
  }
  return out;
}

inline Log deserialize_log(std::span<const std::uint8_t> bytes, const EngineConfig& cfg, LogFormat format) {
  const std::size_t wb = cfg.word_bytes();
  Log log;
  std::size_t pos = 0;
  auto need = [&](std::size_t n) {
    if (pos + n > bytes.size()) throw Error(Errc::malformed_log, "truncated word at byte " + std::to_string(pos));
  };
  auto next_word = [&] {
    need(wb);
    const auto w = detail::get_word(bytes, pos, wb);
    pos += wb;
    return w;
  };

  if (format == LogFormat::memory_image) {
    auto as_address = [&](std::uint32_t w) {
      if (w < cfg.min_code_addr || (w & cfg.counter_tag()))
        throw Error(Errc::malformed_log, "expected an address word, got " + to_hex(w, cfg.addr_width));
      return Address{w};
    };
    while (pos < bytes.size()) {
      const auto w = next_word();
      if (w & cfg.counter_tag()) {
        const auto count = w & ~cfg.counter_tag();
        if (count > kMaxRepeatCount) throw Error(Errc::malformed_log, "repeat count out of range");
        log.elements.push_back(RepeatCount{static_cast<std::uint16_t>(count)});
      } else if (w <= kMaxSymbolId) {
        log.elements.push_back(Symbol{static_cast<std::uint8_t>(w)});
      } else if (cfg.mode == MatchMode::pair) {
        const auto src = as_address(w);
        const auto dest = as_address(next_word());
        log.elements.push_back(RawPair{{src, dest}});
      } else {
        log.elements.push_back(RawDest{as_address(w)});
      }
    }
  } else {
    while (pos < bytes.size()) {
      const auto tag = bytes[pos++];
      switch (tag) {
        case 0: {
          const auto src = next_word();
          const auto dest = next_word();
          log.elements.push_back(RawPair{{Address{src}, Address{dest}}});
          break;
        }
        case 1:
          log.elements.push_back(RawDest{Address{next_word()}});
          break;
        case 2: {
          const auto id = next_word();
          if (id == 0 || id > kMaxSymbolId) throw Error(Errc::malformed_log, "symbol id out of range");
          log.elements.push_back(Symbol{static_cast<std::uint8_t>(id)});
          break;
        }
        case 3: {
          const auto count = next_word();
          if (count > kMaxRepeatCount) throw Error(Errc::malformed_log, "repeat count out of range");
          log.elements.push_back(RepeatCount{static_cast<std::uint16_t>(count)});
          break;
        }
        default:
          throw Error(Errc::malformed_log, "unknown element tag " + std::to_string(tag));
      }
    }
  }
  validate_log(log, cfg);
  return log;
}

}  // namespace speclog
