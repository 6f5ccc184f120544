#pragma once

#include <charconv>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "speclog/error.hpp"

namespace speclog {

/// A code address on the attested device.
struct Address {
  std::uint32_t value = 0;

  constexpr Address() = default;
  constexpr explicit Address(std::uint32_t v) : value(v) {}

  friend constexpr auto operator<=>(const Address&, const Address&) = default;
};

/// One control-flow transfer. In destination-only mode `src` is ignored and
/// kept at zero.
struct Transfer {
  Address src;
  Address dest;

  friend constexpr auto operator<=>(const Transfer&, const Transfer&) = default;
};

constexpr Transfer pair(std::uint32_t src, std::uint32_t dest) { return {Address{src}, Address{dest}}; }
constexpr Transfer dest_only(std::uint32_t dest) { return {Address{0}, Address{dest}}; }

enum class MatchMode : std::uint8_t { pair = 0, dest = 1 };

constexpr std::string_view to_string(MatchMode m) { return m == MatchMode::pair ? "pair" : "dest"; }

inline MatchMode parse_mode(std::string_view s) {
  if (s == "pair") return MatchMode::pair;
  if (s == "dest") return MatchMode::dest;
  throw Error(Errc::invalid_config, "unknown mode '" + std::string(s) + "'");
}

inline constexpr std::uint8_t kMaxSymbolId = 255;
inline constexpr std::uint16_t kMaxRepeatCount = 32767;
inline constexpr std::size_t kMaxSpecLen = 255;

struct EngineConfig {
  MatchMode mode = MatchMode::pair;
  unsigned addr_width = 16;
  std::uint32_t min_code_addr = 0x0400;
  std::size_t max_sub_paths = 8;
  std::size_t slice_size_bytes = 256;
  bool retry_on_mismatch = false;
  std::size_t blockmem_capacity_bytes = 4096;

  constexpr std::size_t word_bytes() const { return addr_width / 8; }
  constexpr std::uint32_t counter_tag() const { return std::uint32_t{1} << (addr_width - 1); }
  constexpr std::uint64_t addr_limit() const { return std::uint64_t{1} << addr_width; }
  /// Encoded size of one raw log element in this mode.
  constexpr std::size_t raw_element_bytes() const {
    return (mode == MatchMode::pair ? 2 : 1) * word_bytes();
  }

  void validate() const {
    if (addr_width != 16 && addr_width != 32)
      throw Error(Errc::invalid_config, "addr_width must be 16 or 32");
    if (min_code_addr <= kMaxSymbolId)
      throw Error(Errc::invalid_config, "min_code_addr must exceed the symbol id range");
    if (min_code_addr >= counter_tag())
      throw Error(Errc::invalid_config, "min_code_addr collides with the counter tag bit");
    if (max_sub_paths < 1 || max_sub_paths > 8)
      throw Error(Errc::invalid_config, "max_sub_paths must be in 1..8");
    if (slice_size_bytes == 0) throw Error(Errc::invalid_config, "slice_size_bytes must be positive");
  }
};

inline void check_address(Address a, const EngineConfig& cfg) {
  if (a.value >= cfg.addr_limit())
    throw Error(Errc::address_out_of_range, "address exceeds " + std::to_string(cfg.addr_width) + "-bit range");
}

inline void check_transfer(const Transfer& t, const EngineConfig& cfg) {
  if (cfg.mode == MatchMode::pair) check_address(t.src, cfg);
  check_address(t.dest, cfg);
}

/// Canonical form of a transfer for the configured mode.
constexpr Transfer normalize(const Transfer& t, MatchMode mode) {
  return mode == MatchMode::pair ? t : Transfer{Address{0}, t.dest};
}

// -- log elements ----------------------------------------------------------

struct RawPair {
  Transfer transfer;
  friend constexpr bool operator==(const RawPair&, const RawPair&) = default;
};
struct RawDest {
  Address dest;
  friend constexpr bool operator==(const RawDest&, const RawDest&) = default;
};
struct Symbol {
  std::uint8_t id = 0;
  friend constexpr bool operator==(const Symbol&, const Symbol&) = default;
};
struct RepeatCount {
  std::uint16_t count = 0;
  friend constexpr bool operator==(const RepeatCount&, const RepeatCount&) = default;
};

using LogElement = std::variant<RawPair, RawDest, Symbol, RepeatCount>;

constexpr bool is_raw(const LogElement& e) {
  return std::holds_alternative<RawPair>(e) || std::holds_alternative<RawDest>(e);
}

constexpr std::size_t element_words(const LogElement& e) {
  return std::holds_alternative<RawPair>(e) ? 2 : 1;
}

inline LogElement raw_element(const Transfer& t, MatchMode mode) {
  if (mode == MatchMode::pair) return RawPair{t};
  return RawDest{t.dest};
}

/// Transfer carried by a raw element (src zero for destination-only records).
inline Transfer raw_transfer(const LogElement& e) {
  if (const auto* p = std::get_if<RawPair>(&e)) return p->transfer;
  return Transfer{Address{0}, std::get<RawDest>(e).dest};
}

/// An ordered control-flow log, raw or compressed.
struct Log {
  std::vector<LogElement> elements;

  std::size_t size_words() const {
    std::size_t n = 0;
    for (const auto& e : elements) n += element_words(e);
    return n;
  }
  std::size_t size_bytes(const EngineConfig& cfg) const { return size_words() * cfg.word_bytes(); }
  bool empty() const { return elements.empty(); }
  bool is_raw_only() const {
    for (const auto& e : elements)
      if (!is_raw(e)) return false;
    return true;
  }

  friend bool operator==(const Log&, const Log&) = default;
};

using RawLog = Log;
using CompressedLog = Log;

/// A verifier-defined sub-path speculation.
struct SubPathSpec {
  std::uint8_t id = 0;
  std::vector<Transfer> entries;

  std::size_t len() const { return entries.size(); }
  friend bool operator==(const SubPathSpec&, const SubPathSpec&) = default;
};

/// Structural checks shared by every consumer of a spec set.
inline void validate_specs(const std::vector<SubPathSpec>& specs, const EngineConfig& cfg) {
  std::vector<bool> seen(256, false);
  for (const auto& s : specs) {
    if (s.id == 0) throw Error(Errc::invalid_spec, "spec id 0 is reserved");
    if (s.entries.empty()) throw Error(Errc::invalid_spec, "spec " + std::to_string(s.id) + " is empty");
    if (s.len() > kMaxSpecLen) throw Error(Errc::len_overflow, "spec " + std::to_string(s.id) + " longer than 255");
    if (seen[s.id]) throw Error(Errc::duplicate_id, "spec id " + std::to_string(s.id) + " repeated");
    seen[s.id] = true;
    for (const auto& t : s.entries) {
      if (cfg.mode == MatchMode::dest && t.src.value != 0)
        throw Error(Errc::mode_mismatch, "destination-only spec carries a source address");
      check_transfer(t, cfg);
    }
  }
}

// -- hex helpers -----------------------------------------------------------

inline std::string to_hex(std::uint32_t v, unsigned width_bits = 16) {
  static constexpr char digits[] = "0123456789abcdef";
  const unsigned nibbles = width_bits / 4;
  std::string s(nibbles, '0');
  for (unsigned i = 0; i < nibbles; ++i) s[nibbles - 1 - i] = digits[(v >> (4 * i)) & 0xF];
  return "0x" + s;
}

/// Parses "0x1a2b" or "1a2b". Returns false on any junk.
inline bool parse_hex(std::string_view s, std::uint32_t& out) {
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) s.remove_prefix(2);
  if (s.empty()) return false;
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return false;
  out = v;
  return true;
}

}  // namespace speclog
