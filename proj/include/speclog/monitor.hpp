#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "speclog/types.hpp"

namespace speclog {

/// Closed address interval [lo, hi].
struct AddressRange {
  std::uint32_t lo = 0;
  std::uint32_t hi = 0;

  constexpr bool contains(std::uint32_t a) const { return lo <= a && a <= hi; }
  constexpr bool contains(std::optional<Address> a) const { return a && contains(a->value); }
};

struct RegionMap {
  AddressRange tcb;
  AddressRange blockmem;

  void validate() const {
    if (tcb.lo > tcb.hi || blockmem.lo > blockmem.hi) throw Error(Errc::invalid_config, "empty region interval");
  }
};

/// Bus activity observed in one cycle.
struct AccessEvent {
  Address pc;
  bool w_en = false;
  std::optional<Address> d_addr;
  bool dma_en = false;
  std::optional<Address> dma_addr;
};

enum class Access : std::uint8_t { allow, reset };

/// A CPU write into BlockMem from outside the TCB, or any DMA access to
/// BlockMem, resets the device.
constexpr Access check_access(const AccessEvent& ev, const RegionMap& regions) {
  const bool cpu_violation = !regions.tcb.contains(ev.pc.value) && ev.w_en && regions.blockmem.contains(ev.d_addr);
  const bool dma_violation = ev.dma_en && regions.blockmem.contains(ev.dma_addr);
  return cpu_violation || dma_violation ? Access::reset : Access::allow;
}

struct MonitorVerdict {
  std::optional<std::size_t> reset_at;
  bool ok() const { return !reset_at; }
};

inline MonitorVerdict run_monitor(std::span<const AccessEvent> events, const RegionMap& regions) {
  for (std::size_t i = 0; i < events.size(); ++i)
    if (check_access(events[i], regions) == Access::reset) return {i};
  return {};
}

// Event trace text: one record per line,
//   <pc> <w_en 0|1> <d_addr|-> <dma_en 0|1> <dma_addr|->
// addresses in hex. Blank lines and lines starting with '#' are skipped.

inline std::vector<AccessEvent> parse_events(const std::string& text) {
  std::vector<AccessEvent> events;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string pc, w, d, dma, da;
    if (!(fields >> pc >> w >> d >> dma >> da)) throw Error(Errc::parse_error, "expected 5 fields", lineno);
    std::string extra;
    if (fields >> extra) throw Error(Errc::parse_error, "trailing field", lineno);
    auto flag = [&](const std::string& s) {
      if (s == "0") return false;
      if (s == "1") return true;
      throw Error(Errc::parse_error, "flag must be 0 or 1", lineno);
    };
    auto opt_addr = [&](const std::string& s) -> std::optional<Address> {
      if (s == "-") return std::nullopt;
      std::uint32_t v = 0;
      if (!parse_hex(s, v)) throw Error(Errc::parse_error, "bad address '" + s + "'", lineno);
      return Address{v};
    };
    AccessEvent ev;
    std::uint32_t pcv = 0;
    if (!parse_hex(pc, pcv)) throw Error(Errc::parse_error, "bad pc '" + pc + "'", lineno);
    ev.pc = Address{pcv};
    ev.w_en = flag(w);
    ev.d_addr = opt_addr(d);
    ev.dma_en = flag(dma);
    ev.dma_addr = opt_addr(da);
    if (ev.w_en != ev.d_addr.has_value()) throw Error(Errc::parse_error, "d_addr present iff w_en", lineno);
    if (ev.dma_en != ev.dma_addr.has_value()) throw Error(Errc::parse_error, "dma_addr present iff dma_en", lineno);
    events.push_back(ev);
  }
  return events;
}

inline std::string write_events(std::span<const AccessEvent> events) {
  std::string out;
  auto addr = [](const std::optional<Address>& a) { return a ? to_hex(a->value) : std::string("-"); };
  for (const auto& ev : events) {
    out += to_hex(ev.pc.value) + " " + (ev.w_en ? "1" : "0") + " " + addr(ev.d_addr) + " " + (ev.dma_en ? "1" : "0") +
           " " + addr(ev.dma_addr) + "\n";
  }
  return out;
}

inline AddressRange parse_range(std::string_view s) {
  const auto colon = s.find(':');
  AddressRange r;
  if (colon == std::string_view::npos || !parse_hex(s.substr(0, colon), r.lo) || !parse_hex(s.substr(colon + 1), r.hi))
    throw Error(Errc::parse_error, "range must be LO:HI in hex, got '" + std::string(s) + "'");
  if (r.lo > r.hi) throw Error(Errc::invalid_config, "range lo exceeds hi");
  return r;
}

}  // namespace speclog
