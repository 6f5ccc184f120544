#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "speclog/types.hpp"

namespace speclog::ingest {

/// Trace file: a header line, then one transfer per line as hex.
///
///   # speclog-trace mode=pair width=16
///   0x0400 0x0500
///   0x0502 0x0600
///
/// Destination-only traces carry a single address per line. Blank lines are
/// ignored; line numbers in errors count from the header (line 1).
struct TraceDocument {
  MatchMode mode = MatchMode::pair;
  unsigned addr_width = 16;
  std::vector<Transfer> transfers;

  friend bool operator==(const TraceDocument&, const TraceDocument&) = default;
};

inline constexpr std::string_view kTraceMagic = "# speclog-trace";

inline std::string write_trace(const TraceDocument& doc) {
  std::string out = std::string(kTraceMagic) + " mode=" + std::string(to_string(doc.mode)) +
                    " width=" + std::to_string(doc.addr_width) + "\n";
  for (const auto& t : doc.transfers) {
    if (doc.mode == MatchMode::pair) out += to_hex(t.src.value, doc.addr_width) + " ";
    out += to_hex(t.dest.value, doc.addr_width) + "\n";
  }
  return out;
}

inline TraceDocument parse_trace(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::parse_error, "missing trace header", 1);
  TraceDocument doc;
  {
    std::istringstream h(line);
    std::string hash, magic, mode, width;
    if (!(h >> hash >> magic >> mode >> width) || hash + " " + magic != kTraceMagic ||
        mode.rfind("mode=", 0) != 0 || width.rfind("width=", 0) != 0)
      throw Error(Errc::parse_error, "bad trace header", 1);
    try {
      doc.mode = parse_mode(mode.substr(5));
    } catch (const Error&) {
      throw Error(Errc::parse_error, "bad mode in header", 1);
    }
    if (width == "width=16") doc.addr_width = 16;
    else if (width == "width=32") doc.addr_width = 32;
    else throw Error(Errc::parse_error, "width must be 16 or 32", 1);
  }
  const std::uint64_t limit = std::uint64_t{1} << doc.addr_width;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    const std::size_t want = doc.mode == MatchMode::pair ? 2 : 1;
    if (tok.size() != want) throw Error(Errc::parse_error, "expected " + std::to_string(want) + " addresses", lineno);
    std::uint32_t v[2] = {0, 0};
    for (std::size_t i = 0; i < want; ++i)
      if (!parse_hex(tok[i], v[i]) || v[i] >= limit)
        throw Error(Errc::parse_error, "bad address '" + tok[i] + "'", lineno);
    doc.transfers.push_back(doc.mode == MatchMode::pair ? pair(v[0], v[1]) : dest_only(v[0]));
  }
  return doc;
}

}  // namespace speclog::ingest
