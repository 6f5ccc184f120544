#include <iostream>

#include <CLI11.hpp>

#include "speclog/cli/commands.hpp"

namespace {

using namespace speclog;

const std::map<std::string, MatchMode> kModes{{"pair", MatchMode::pair}, {"dest", MatchMode::dest}};
const std::map<std::string, LogFormat> kFormats{{"image", LogFormat::memory_image},
                                                {"tagged", LogFormat::portable_tagged}};

void add_policy_flags(CLI::App* cmd, PolicyConfig& pc) {
  cmd->add_option("--max-paths", pc.n_paths, "Number of sub-paths to install (1..8)")->check(CLI::Range(1, 8));
  cmd->add_option("--threshold", pc.threshold_t, "Minimize replacement threshold t in percent");
  cmd->add_option("--budget", pc.budget_bytes, "BlockMem budget in bytes");
  cmd->add_option("--min-len", pc.min_len, "Shortest mined candidate");
  cmd->add_option("--max-len", pc.max_len, "Longest mined candidate");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sub-path speculation log compressor and attestation simulator"};
  app.require_subcommand(1);

  std::optional<MatchMode> mode;
  std::optional<unsigned> width;
  auto add_shape = [&](CLI::App* cmd) {
    cmd->add_option("--mode", mode, "pair or dest")->transform(CLI::CheckedTransformer(kModes));
    cmd->add_option("--width", width, "Address width")->check(CLI::IsMember({16u, 32u}));
  };

  cli::CompressOptions co;
  auto* compress = app.add_subcommand("compress", "Compress a trace with installed sub-paths");
  compress->add_option("trace", co.trace, "Trace file")->required();
  compress->add_option("--specs", co.specs, "Spec file (omit for none)");
  compress->add_option("-o,--out", co.out, "Compressed log output")->required();
  compress->add_option("--report", co.report, "Metrics report output");
  compress->add_option("--format", co.format, "image or tagged")->transform(CLI::CheckedTransformer(kFormats));
  compress->add_option("--slice-size", co.slice_size, "Slice size in bytes (0 = one log)");
  add_shape(compress);

  cli::ExpandOptions eo;
  auto* expand = app.add_subcommand("expand", "Expand a compressed log back to a trace");
  expand->add_option("log", eo.log, "Compressed log file")->required();
  expand->add_option("--specs", eo.specs, "Spec file used at compression");
  expand->add_option("-o,--out", eo.out, "Trace output")->required();

  cli::SelectOptions so;
  auto* select = app.add_subcommand("select", "Choose sub-paths to speculate");
  select->add_option("traces", so.traces, "Training traces");
  select->add_option("--policy", so.policy, "Selection policy")->check(CLI::IsMember(cli::policy_names()));
  select->add_option("--cfg", so.cfg, "Control-flow graph (static policy)");
  select->add_option("-o,--out", so.out, "Spec file output")->required();
  add_policy_flags(select, so.policy_config);
  add_shape(select);

  cli::SimulateOptions mo;
  std::optional<std::size_t> drop, flip, replay, reorder;
  auto* simulate = app.add_subcommand("simulate", "Run a full attestation session on a generated workload");
  simulate->add_option("cfg", mo.cfg, "Control-flow graph")->required();
  simulate->add_option("--profile", mo.profile, "Workload profile")->check(CLI::IsMember({"sensor", "branchy"}));
  simulate->add_option("--seed", mo.seed, "Workload seed");
  simulate->add_option("--steps", mo.steps, "Transfers to generate");
  simulate->add_option("--specs", mo.specs, "Spec file (otherwise mined with --policy)");
  simulate->add_option("--policy", mo.policy, "Selection policy")->check(CLI::IsMember(cli::policy_names()));
  simulate->add_option("--key", mo.key, "Shared key file (32 bytes or 64 hex digits)");
  simulate->add_option("--slice-size", mo.slice_size, "Slice size in bytes");
  simulate->add_option("--report", mo.report, "Metrics report output");
  simulate->add_option("--drop", drop, "Drop slice SEQ in transit");
  simulate->add_option("--flip", flip, "Flip one bit of slice SEQ");
  simulate->add_option("--replay", replay, "Deliver slice SEQ twice");
  simulate->add_option("--reorder", reorder, "Swap slice SEQ with its successor");
  simulate->add_option("--inject-edge", mo.inject_edge, "Overwrite transfer INDEX with a non-edge");
  add_policy_flags(simulate, mo.policy_config);
  add_shape(simulate);

  cli::MonitorOptions no;
  auto* monitor = app.add_subcommand("monitor", "Check bus events against the BlockMem write rule");
  monitor->add_option("events", no.events, "Event trace")->required();
  monitor->add_option("--tcb", no.tcb, "TCB range LO:HI")->required();
  monitor->add_option("--blockmem", no.blockmem, "BlockMem range LO:HI")->required();

  std::vector<std::string> reports;
  auto* stats = app.add_subcommand("stats", "Merge metrics reports into CSV");
  stats->add_option("reports", reports, "Report files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kError;
  }

  if (*compress) {
    co.mode = mode;
    co.width = width;
    return cli::cmd_compress(co, std::cout, std::cerr);
  }
  if (*expand) return cli::cmd_expand(eo, std::cout, std::cerr);
  if (*select) {
    so.mode = mode;
    so.width = width;
    return cli::cmd_select(so, std::cout, std::cerr);
  }
  if (*simulate) {
    mo.mode = mode.value_or(MatchMode::pair);
    mo.width = width.value_or(16);
    mo.faults = {drop, flip, std::nullopt, replay, reorder};
    return cli::cmd_simulate(mo, std::cout, std::cerr);
  }
  if (*monitor) return cli::cmd_monitor(no, std::cout, std::cerr);
  return cli::cmd_stats(reports, std::cout, std::cerr);
}
