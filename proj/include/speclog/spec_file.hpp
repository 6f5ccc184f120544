#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "speclog/types.hpp"

namespace speclog {

/// Human-editable spec set:
///
///   { "mode": "pair", "width": 16,
///     "specs": [ { "id": 1, "entries": ["0x0400:0x0500", "0x0500:0x0520"] } ] }
///
/// Destination-only entries are single addresses ("0x0500").
struct SpecSet {
  MatchMode mode = MatchMode::pair;
  unsigned addr_width = 16;
  std::vector<SubPathSpec> specs;
};

inline std::string write_spec_set(const SpecSet& set) {
  nlohmann::json doc;
  doc["mode"] = std::string(to_string(set.mode));
  doc["width"] = set.addr_width;
  doc["specs"] = nlohmann::json::array();
  for (const auto& s : set.specs) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& t : s.entries) {
      if (set.mode == MatchMode::pair)
        entries.push_back(to_hex(t.src.value, set.addr_width) + ":" + to_hex(t.dest.value, set.addr_width));
      else
        entries.push_back(to_hex(t.dest.value, set.addr_width));
    }
    doc["specs"].push_back({{"id", s.id}, {"entries", std::move(entries)}});
  }
  return doc.dump(2) + "\n";
}

inline SpecSet parse_spec_set(const std::string& text) {
  SpecSet set;
  try {
    const auto doc = nlohmann::json::parse(text);
    set.mode = parse_mode(doc.at("mode").get<std::string>());
    set.addr_width = doc.value("width", 16u);
    for (const auto& js : doc.at("specs")) {
      SubPathSpec s;
      const int id = js.at("id").get<int>();
      if (id < 1 || id > kMaxSymbolId) throw Error(Errc::invalid_spec, "spec id out of range 1..255");
      s.id = static_cast<std::uint8_t>(id);
      for (const auto& je : js.at("entries")) {
        const auto text_entry = je.get<std::string>();
        Transfer t;
        std::uint32_t a = 0, b = 0;
        if (set.mode == MatchMode::pair) {
          const auto colon = text_entry.find(':');
          if (colon == std::string::npos || !parse_hex(std::string_view(text_entry).substr(0, colon), a) ||
              !parse_hex(std::string_view(text_entry).substr(colon + 1), b))
            throw Error(Errc::parse_error, "bad pair entry '" + text_entry + "'");
          t = pair(a, b);
        } else {
          if (!parse_hex(text_entry, b)) throw Error(Errc::parse_error, "bad dest entry '" + text_entry + "'");
          t = dest_only(b);
        }
        s.entries.push_back(t);
      }
      set.specs.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("spec file: ") + e.what());
  }
  EngineConfig cfg;
  cfg.mode = set.mode;
  cfg.addr_width = set.addr_width;
  if (cfg.addr_width != 16 && cfg.addr_width != 32) throw Error(Errc::invalid_config, "width must be 16 or 32");
  validate_specs(set.specs, cfg);
  return set;
}

}  // namespace speclog
