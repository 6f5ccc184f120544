#pragma once

#include <span>
#include <vector>

#include "speclog/encoding.hpp"

// On-disk container for a sliced compressed log:
//   "SPLG" | u8 version=1 | u8 format | u8 mode | u8 width | u32 slice_count |
//   slice_count x (u32 byte_len | serialized slice)
// Integers are little-endian.

namespace speclog {

struct LogFile {
  LogFormat format = LogFormat::memory_image;
  MatchMode mode = MatchMode::pair;
  unsigned addr_width = 16;
  std::vector<CompressedLog> slices;

  EngineConfig config() const {
    EngineConfig c;
    c.mode = mode;
    c.addr_width = addr_width;
    return c;
  }
  friend bool operator==(const LogFile&, const LogFile&) = default;
};

inline constexpr std::uint8_t kLogFileVersion = 1;

inline Bytes write_log_file(const LogFile& f) {
  const auto cfg = f.config();
  cfg.validate();
  Bytes out{'S', 'P', 'L', 'G', kLogFileVersion, static_cast<std::uint8_t>(f.format), static_cast<std::uint8_t>(f.mode),
            static_cast<std::uint8_t>(f.addr_width)};
  detail::put_word(out, static_cast<std::uint32_t>(f.slices.size()), 4);
  for (const auto& s : f.slices) {
    const auto body = serialize_log(s, cfg, f.format);
    detail::put_word(out, static_cast<std::uint32_t>(body.size()), 4);
    out.insert(out.end(), body.begin(), body.end());
  }
  return out;
}

inline LogFile read_log_file(std::span<const std::uint8_t> in) {
  auto fail = [](const std::string& why) { return Error(Errc::malformed_log, "log file: " + why); };
  if (in.size() < 12 || in[0] != 'S' || in[1] != 'P' || in[2] != 'L' || in[3] != 'G') throw fail("bad magic");
  if (in[4] != kLogFileVersion) throw fail("unsupported version");
  if (in[5] > 1 || in[6] > 1) throw fail("bad format or mode byte");
  LogFile f;
  f.format = static_cast<LogFormat>(in[5]);
  f.mode = static_cast<MatchMode>(in[6]);
  f.addr_width = in[7];
  if (f.addr_width != 16 && f.addr_width != 32) throw fail("width must be 16 or 32");
  const auto cfg = f.config();
  const auto n = detail::get_word(in, 8, 4);
  std::size_t pos = 12;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (in.size() - pos < 4) throw fail("truncated slice header");
    const auto len = detail::get_word(in, pos, 4);
    pos += 4;
    if (in.size() - pos < len) throw fail("truncated slice body");
    f.slices.push_back(deserialize_log(in.subspan(pos, len), cfg, f.format));
    pos += len;
  }
  if (pos != in.size()) throw fail("trailing bytes");
  return f;
}

}  // namespace speclog
