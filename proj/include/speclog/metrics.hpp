#pragma once

#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "speclog/blockmem.hpp"
#include "speclog/types.hpp"

namespace speclog {

/// Storage figures for one run.
struct MetricsReport {
  std::string label;
  std::size_t raw_bytes = 0;
  std::size_t compressed_bytes = 0;
  std::size_t blockmem_bytes = 0;
  std::size_t total_bytes = 0;  // compressed + blockmem
  double reduction_pct = 0.0;   // 100 * (1 - compressed / raw); 0 when raw is empty
  std::size_t slice_count = 0;
  std::map<unsigned, std::size_t> spec_hits;  // spec id -> matched occurrences

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Occurrences replaced by each symbol, counting coalesced repeats.
inline std::map<unsigned, std::size_t> spec_hits(std::span<const CompressedLog> logs) {
  std::map<unsigned, std::size_t> hits;
  for (const auto& log : logs) {
    unsigned last = 0;
    for (const auto& el : log.elements) {
      if (const auto* s = std::get_if<Symbol>(&el)) {
        last = s->id;
        ++hits[last];
      } else if (const auto* c = std::get_if<RepeatCount>(&el)) {
        hits[last] += c->count - 1;
      }
    }
  }
  return hits;
}

inline MetricsReport make_report(std::span<const Transfer> trace, std::span<const CompressedLog> slices,
                                 const std::vector<SubPathSpec>& specs, const EngineConfig& cfg, std::string label = {}) {
  MetricsReport r;
  r.label = std::move(label);
  r.raw_bytes = trace.size() * cfg.raw_element_bytes();
  for (const auto& s : slices) r.compressed_bytes += s.size_bytes(cfg);
  r.blockmem_bytes = specs.empty() ? 0 : blockmem_bytes(specs, cfg);
  r.total_bytes = r.compressed_bytes + r.blockmem_bytes;
  if (r.raw_bytes > 0)
    r.reduction_pct = 100.0 * (1.0 - static_cast<double>(r.compressed_bytes) / static_cast<double>(r.raw_bytes));
  r.slice_count = slices.size();
  r.spec_hits = spec_hits(slices);
  return r;
}

inline nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json hits = nlohmann::json::object();
  for (auto [id, n] : r.spec_hits) hits[std::to_string(id)] = n;
  return {{"label", r.label},
          {"raw_bytes", r.raw_bytes},
          {"compressed_bytes", r.compressed_bytes},
          {"blockmem_bytes", r.blockmem_bytes},
          {"total_bytes", r.total_bytes},
          {"reduction_pct", r.reduction_pct},
          {"slice_count", r.slice_count},
          {"spec_hits", hits}};
}

inline std::string write_report(const MetricsReport& r) { return to_json(r).dump(2) + "\n"; }

inline MetricsReport parse_report(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    MetricsReport r;
    r.label = j.value("label", "");
    r.raw_bytes = j.at("raw_bytes").get<std::size_t>();
    r.compressed_bytes = j.at("compressed_bytes").get<std::size_t>();
    r.blockmem_bytes = j.at("blockmem_bytes").get<std::size_t>();
    r.total_bytes = j.at("total_bytes").get<std::size_t>();
    r.reduction_pct = j.at("reduction_pct").get<double>();
    r.slice_count = j.at("slice_count").get<std::size_t>();
    const auto hits = j.value("spec_hits", nlohmann::json::object());
    for (const auto& [k, v] : hits.items())
      r.spec_hits[static_cast<unsigned>(std::stoul(k))] = v.get<std::size_t>();
    return r;
  } catch (const std::exception& e) {
    throw Error(Errc::parse_error, std::string("metrics report: ") + e.what());
  }
}

inline constexpr std::string_view kCsvHeader =
    "label,raw_bytes,compressed_bytes,blockmem_bytes,total_bytes,reduction_pct,slice_count,spec_hits";

/// One CSV row; spec hits are packed as "id:count" pairs joined by ';'.
inline std::string csv_row(const MetricsReport& r) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(4);
  std::string label = r.label;
  if (label.find_first_of(",\"\n") != std::string::npos) {
    std::string q = "\"";
    for (char c : label) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    label = q + "\"";
  }
  o << label << ',' << r.raw_bytes << ',' << r.compressed_bytes << ',' << r.blockmem_bytes << ',' << r.total_bytes << ','
    << r.reduction_pct << ',' << r.slice_count << ',';
  bool first = true;
  for (auto [id, n] : r.spec_hits) {
    o << (first ? "" : ";") << id << ':' << n;
    first = false;
  }
  return o.str();
}

inline std::string write_csv(std::span<const MetricsReport> reports) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : reports) out += csv_row(r) + "\n";
  return out;
}

}  // namespace speclog
