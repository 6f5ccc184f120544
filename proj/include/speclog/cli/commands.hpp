#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iterator>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <openssl/rand.h>

#include "speclog/log_file.hpp"
#include "speclog/speclog.hpp"

// Command layer behind the speclog executable. Each command reads its inputs,
// calls straight into the library and writes results; argument parsing lives
// in the tool itself so tests can drive these functions directly.

namespace speclog::cli {

enum ExitCode : int { kOk = 0, kError = 1, kInvalidPath = 2, kReset = 3 };

// -- file helpers -----------------------------------------------------------------

inline Bytes read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline std::string read_text(const std::string& path) {
  const auto b = read_bytes(path);
  return std::string(b.begin(), b.end());
}

/// Writes through a sibling temp file so a failed run never leaves a partial output.
inline void write_file(const std::string& path, std::span<const std::uint8_t> data) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot write " + path);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error(Errc::io_error, "short write to " + path);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(Errc::io_error, "cannot replace " + path);
  }
}

inline void write_file(const std::string& path, const std::string& text) {
  write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

/// Runs `body`, turning any failure into a diagnostic and exit code 1.
inline int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what();
    if (e.line()) err << " (line " << *e.line() << ")";
    err << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kError;
}

inline void require_match(MatchMode mode, unsigned width, MatchMode want_mode, unsigned want_width,
                          const std::string& what) {
  if (mode != want_mode || width != want_width)
    throw Error(Errc::mode_mismatch, what + " is " + std::string(to_string(mode)) + "/" + std::to_string(width) +
                                         " but the run is " + std::string(to_string(want_mode)) + "/" +
                                         std::to_string(want_width));
}

/// Spec file contents checked against the run's mode and width. No path means no specs.
inline std::vector<SubPathSpec> load_specs(const std::string& path, MatchMode mode, unsigned width) {
  if (path.empty()) return {};
  auto set = parse_spec_set(read_text(path));
  require_match(set.mode, set.addr_width, mode, width, "spec file " + path);
  return std::move(set.specs);
}

inline std::vector<Transfer> normalized(std::vector<Transfer> t, MatchMode mode) {
  for (auto& x : t) x = normalize(x, mode);
  return t;
}

inline std::string fixed4(double v) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(4) << v;
  return o.str();
}

inline void print_report(std::ostream& out, const MetricsReport& r) {
  out << "raw_bytes=" << r.raw_bytes << "\ncompressed_bytes=" << r.compressed_bytes
      << "\nblockmem_bytes=" << r.blockmem_bytes << "\ntotal_bytes=" << r.total_bytes
      << "\nreduction_pct=" << fixed4(r.reduction_pct) << "\nslice_count=" << r.slice_count << "\n";
}

// -- compress ---------------------------------------------------------------------

struct CompressOptions {
  std::string trace;
  std::string specs;   // optional
  std::string out;
  std::string report;  // defaults to <out>.report.json
  LogFormat format = LogFormat::memory_image;
  std::size_t slice_size = 0;  // 0 keeps the whole run in one log
  std::optional<MatchMode> mode;
  std::optional<unsigned> width;
};

/// Compression as the CLI performs it. Shared with tests for golden comparisons.
inline LogFile compress_document(const ingest::TraceDocument& doc, const std::vector<SubPathSpec>& specs,
                                 LogFormat format, std::size_t slice_size) {
  EngineConfig cfg;
  cfg.mode = doc.mode;
  cfg.addr_width = doc.addr_width;
  LogFile f{format, doc.mode, doc.addr_width, {}};
  if (slice_size == 0) {
    f.slices.push_back(compress_trace(doc.transfers, specs, cfg));
  } else {
    cfg.slice_size_bytes = slice_size;
    f.slices = slice_compress(doc.transfers, specs, cfg);
  }
  return f;
}

inline int cmd_compress(const CompressOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto doc = ingest::parse_trace(read_text(o.trace));
    require_match(doc.mode, doc.addr_width, o.mode.value_or(doc.mode), o.width.value_or(doc.addr_width),
                  "trace " + o.trace);
    const auto specs = load_specs(o.specs, doc.mode, doc.addr_width);
    const auto file = compress_document(doc, specs, o.format, o.slice_size);
    const auto bytes = write_log_file(file);
    const auto report = make_report(doc.transfers, file.slices, specs, file.config(),
                                    std::filesystem::path(o.trace).stem().string());
    write_file(o.out, bytes);
    write_file(o.report.empty() ? o.out + ".report.json" : o.report, write_report(report));
    print_report(out, report);
    return kOk;
  });
}

// -- expand -----------------------------------------------------------------------

struct ExpandOptions {
  std::string log;
  std::string specs;
  std::string out;
};

inline ingest::TraceDocument expand_file(const LogFile& f, const std::vector<SubPathSpec>& specs) {
  const auto raw = expand_slices(f.slices, specs, f.config());
  return {f.mode, f.addr_width, log_transfers(raw)};
}

inline int cmd_expand(const ExpandOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto file = read_log_file(read_bytes(o.log));
    const auto specs = load_specs(o.specs, file.mode, file.addr_width);
    const auto doc = expand_file(file, specs);
    write_file(o.out, ingest::write_trace(doc));
    out << "transfers=" << doc.transfers.size() << "\n";
    return kOk;
  });
}

// -- select -----------------------------------------------------------------------

inline const std::vector<std::string>& policy_names() {
  static const std::vector<std::string> names{"top", "minimize", "select", "static", "savings"};
  return names;
}

/// Dispatches to one selection policy. Mined policies read `logs`; `static`
/// reads `graph`.
inline std::vector<SubPathSpec> choose_specs(const std::string& policy, std::span<const RawLog> logs, const Cfg* graph,
                                             const PolicyConfig& pc, const EngineConfig& ec) {
  pc.validate();
  if (policy == "static") {
    if (!graph) throw Error(Errc::invalid_config, "policy static needs --cfg");
    auto ranked = rank_static(*graph, analyze_cfg(*graph));
    for (auto& c : ranked) c.entries = normalized(std::move(c.entries), ec.mode);
    return select_static(ranked, pc.n_paths, pc.budget_bytes, ec);
  }
  if (logs.empty()) throw Error(Errc::invalid_config, "policy " + policy + " needs at least one trace");
  auto candidates = enumerate_candidates(logs, pc.min_len, pc.max_len);
  if (policy == "top") return policy_top(candidates, pc.n_paths);
  if (policy == "minimize") return policy_minimize(candidates, pc.n_paths, pc.threshold_t);
  if (policy == "select") {
    EngineConfig capped = ec;
    capped.max_sub_paths = pc.n_paths;
    return policy_select(candidates, pc.budget_bytes, capped);
  }
  if (policy == "savings") return to_specs(choose_savings(std::move(candidates), logs, pc.n_paths, ec));
  throw Error(Errc::invalid_config, "unknown policy '" + policy + "'");
}

struct SelectOptions {
  std::string policy = "top";
  std::vector<std::string> traces;
  std::string cfg;  // control-flow graph, for the static policy
  std::string out;
  PolicyConfig policy_config;
  std::optional<MatchMode> mode;
  std::optional<unsigned> width;
};

inline int cmd_select(const SelectOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    EngineConfig ec;
    std::vector<RawLog> logs;
    for (const auto& path : o.traces) {
      const auto doc = ingest::parse_trace(read_text(path));
      if (logs.empty()) {
        ec.mode = o.mode.value_or(doc.mode);
        ec.addr_width = o.width.value_or(doc.addr_width);
      }
      require_match(doc.mode, doc.addr_width, ec.mode, ec.addr_width, "trace " + path);
      logs.push_back(encode_raw(doc.transfers, ec));
    }
    if (o.traces.empty()) {
      ec.mode = o.mode.value_or(MatchMode::pair);
      ec.addr_width = o.width.value_or(16);
    }
    ec.validate();
    std::optional<Cfg> graph;
    if (!o.cfg.empty()) graph = build_cfg(read_text(o.cfg));
    const auto specs = choose_specs(o.policy, logs, graph ? &*graph : nullptr, o.policy_config, ec);
    write_file(o.out, write_spec_set({ec.mode, ec.addr_width, specs}));
    for (const auto& s : specs) {
      out << "spec " << unsigned{s.id} << " len=" << s.len() << " est_savings=";
      if (logs.empty()) out << "n/a";
      else out << estimate_savings(s, logs, ec);
      out << "\n";
    }
    out << "specs=" << specs.size() << "\nblockmem_bytes=" << (specs.empty() ? 0 : blockmem_bytes(specs, ec)) << "\n";
    return kOk;
  });
}

// -- simulate ---------------------------------------------------------------------

struct SimulateOptions {
  std::string cfg;
  std::string profile = "sensor";
  std::uint64_t seed = 1;
  std::size_t steps = 5000;
  std::string specs;  // explicit spec file; otherwise mined with `policy`
  std::string policy = "savings";
  PolicyConfig policy_config;
  std::string key;  // empty: fresh random key
  std::size_t slice_size = 256;
  MatchMode mode = MatchMode::pair;
  unsigned width = 16;
  protocol::FaultPlan faults;
  std::optional<std::size_t> inject_edge;  // trace index to overwrite with a non-edge transfer
  std::string report;
};

inline ingest::WorkloadProfile make_profile(const std::string& name, std::uint64_t seed, std::size_t steps) {
  if (name == "sensor") return ingest::sensor_profile(seed, steps);
  if (name == "branchy") return ingest::branchy_profile(seed, steps);
  throw Error(Errc::invalid_config, "unknown profile '" + name + "'");
}

/// Replaces trace[index] with a transfer from the same source that no CFG edge allows.
inline void inject_invalid_edge(std::vector<Transfer>& trace, std::size_t index, const Cfg& graph,
                                const EngineConfig& ec) {
  if (index >= trace.size()) throw Error(Errc::invalid_config, "inject index past the end of the trace");
  std::set<Transfer> allowed;
  for (const auto& e : graph.edges) allowed.insert(normalize(graph.transfer_of(e), ec.mode));
  Transfer t = trace[index];
  do {
    t.dest.value += 2;
    if (t.dest.value >= ec.counter_tag()) throw Error(Errc::invalid_config, "no free address to inject");
  } while (allowed.count(normalize(t, ec.mode)));
  trace[index] = normalize(t, ec.mode);
}

struct SessionOutcome {
  protocol::Verdict verdict;
  std::size_t slices_sent = 0;
};

/// One attestation session over an in-process channel.
inline SessionOutcome run_session(const protocol::Key& key, const EngineConfig& ec, std::span<const Transfer> trace,
                                  const std::vector<SubPathSpec>& specs, const Cfg& graph,
                                  const protocol::Digest& digest, const protocol::FaultPlan& faults) {
  protocol::Challenge chal{};
  if (RAND_bytes(chal.data(), static_cast<int>(chal.size())) != 1)
    throw Error(Errc::auth_error, "no randomness for the challenge");
  protocol::Verifier verifier(key, ec);
  protocol::Prover prover(key);
  prover.handle_frame(protocol::encode_frame(verifier.open_session(chal, specs)));
  const auto slices = prover.run(trace, digest);
  protocol::Channel channel(faults);
  for (const auto& s : slices) channel.send(protocol::encode_frame(s));
  channel.close();
  while (auto frame = channel.try_receive()) verifier.receive_frame(*frame);
  return {verifier.assemble(&graph, digest), slices.size()};
}

inline protocol::Key load_or_make_key(const std::string& path) {
  if (!path.empty()) return protocol::Key::from_file(path);
  std::array<std::uint8_t, 32> k{};
  if (RAND_bytes(k.data(), static_cast<int>(k.size())) != 1) throw Error(Errc::auth_error, "no randomness for the key");
  return protocol::Key(k);
}

inline int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg_text = read_text(o.cfg);
    const Cfg graph = build_cfg(cfg_text);
    EngineConfig ec;
    ec.mode = o.mode;
    ec.addr_width = o.width;
    ec.slice_size_bytes = o.slice_size;
    ec.validate();
    const auto profile = make_profile(o.profile, o.seed, o.steps);
    auto trace = normalized(ingest::generate_trace(graph, profile), ec.mode);
    if (o.inject_edge) inject_invalid_edge(trace, *o.inject_edge, graph, ec);

    std::vector<SubPathSpec> specs;
    if (!o.specs.empty()) {
      specs = load_specs(o.specs, ec.mode, ec.addr_width);
    } else {
      // Mine from an earlier, independently seeded run of the same workload.
      const auto prior = normalized(ingest::generate_trace(graph, make_profile(o.profile, o.seed + 1, o.steps)), ec.mode);
      const std::vector<RawLog> logs{encode_raw(prior, ec)};
      specs = choose_specs(o.policy, logs, &graph, o.policy_config, ec);
    }

    const auto key = load_or_make_key(o.key);
    const auto digest = protocol::sha256(
        std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(cfg_text.data()), cfg_text.size()));
    const auto baseline = run_session(key, ec, trace, {}, graph, digest, {});
    const auto run = run_session(key, ec, trace, specs, graph, digest, o.faults);
    const auto report = make_report(trace, slice_compress(trace, specs, ec), specs, ec, o.profile);
    if (!o.report.empty()) write_file(o.report, write_report(report));

    out << "steps=" << trace.size() << "\nspecs=" << specs.size() << "\n";
    for (const auto& s : specs) out << "spec " << unsigned{s.id} << " len=" << s.len() << "\n";
    out << "baseline_slices=" << baseline.slices_sent << "\nspeculative_slices=" << run.slices_sent << "\n";
    print_report(out, report);
    out << "verdict=" << protocol::to_string(run.verdict.outcome) << "\n";
    switch (run.verdict.outcome) {
      case protocol::Outcome::authentic_and_valid:
        out << "trace_match=" << (run.verdict.trace == encode_raw(trace, ec) ? "yes" : "no") << "\n";
        return kOk;
      case protocol::Outcome::authentic_but_invalid_path:
        out << "violation_index=" << *run.verdict.violation_index << "\n";
        return kInvalidPath;
      default:
        out << "reason=" << run.verdict.reason << "\n";
        err << "error: attestation failed: " << run.verdict.reason << "\n";
        return kError;
    }
  });
}

// -- monitor ----------------------------------------------------------------------

struct MonitorOptions {
  std::string events;
  std::string tcb;
  std::string blockmem;
};

inline int cmd_monitor(const MonitorOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RegionMap regions{parse_range(o.tcb), parse_range(o.blockmem)};
    regions.validate();
    const auto events = parse_events(read_text(o.events));
    const auto v = run_monitor(events, regions);
    if (v.ok()) {
      out << "allow events=" << events.size() << "\n";
      return kOk;
    }
    out << "reset at=" << *v.reset_at << "\n";
    return kReset;
  });
}

// -- stats ------------------------------------------------------------------------

inline int cmd_stats(const std::vector<std::string>& reports, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::vector<MetricsReport> rows;
    for (const auto& path : reports) {
      auto r = parse_report(read_text(path));
      if (r.label.empty()) r.label = std::filesystem::path(path).stem().string();
      rows.push_back(std::move(r));
    }
    out << write_csv(rows);
    return kOk;
  });
}

}  // namespace speclog::cli
