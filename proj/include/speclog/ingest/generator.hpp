#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "speclog/cfg.hpp"

namespace speclog::ingest {

/// Parameters of the synthetic execution walk.
struct WorkloadProfile {
  std::uint64_t seed = 1;
  std::size_t steps = 1000;
  std::map<EdgeKind, double> edge_weights;  // missing kinds weigh 1
  double loop_bias = 1.0;                   // extra factor on loop back edges

  void validate() const {
    if (!(loop_bias > 0)) throw Error(Errc::invalid_config, "loop_bias must be positive");
    for (const auto& [kind, w] : edge_weights)
      if (!(w > 0)) throw Error(Errc::invalid_config, "edge weight for " + std::string(to_string(kind)) + " must be positive");
  }
  double weight(EdgeKind k) const {
    auto it = edge_weights.find(k);
    return it == edge_weights.end() ? 1.0 : it->second;
  }
};

/// One dominant loop: back edges win roughly 50:1 over loop exits.
inline WorkloadProfile sensor_profile(std::uint64_t seed = 1, std::size_t steps = 5000) {
  return {seed, steps, {}, 50.0};
}

/// Uniform edge choice everywhere.
inline WorkloadProfile branchy_profile(std::uint64_t seed = 1, std::size_t steps = 5000) {
  return {seed, steps, {}, 1.0};
}

/// Weighted random walk from the entry function. Calls push their return
/// site; a return edge is only eligible when it goes to the innermost pending
/// return site. The walk stops after `steps` transfers or at a block with no
/// eligible edge.
inline std::vector<Transfer> generate_trace(const Cfg& cfg, const WorkloadProfile& profile) {
  profile.validate();
  std::vector<Transfer> out;
  if (profile.steps == 0 || cfg.functions.empty()) return out;
  out.reserve(profile.steps);

  const LoopInfo loops = find_loops(cfg);
  std::mt19937_64 rng(profile.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> stack;
  std::vector<std::size_t> options;
  std::vector<double> cumulative;

  std::size_t at = cfg.functions[cfg.entry_function].entry;
  while (out.size() < profile.steps) {
    options.clear();
    cumulative.clear();
    double total = 0;
    for (auto e : cfg.out_edges(at)) {
      const auto& edge = cfg.edges[e];
      if (edge.kind == EdgeKind::ret && (stack.empty() || stack.back() != edge.dst)) continue;
      double w = profile.weight(edge.kind);
      if (loops.is_back_edge(edge.src, edge.dst)) w *= profile.loop_bias;
      total += w;
      options.push_back(e);
      cumulative.push_back(total);
    }
    if (options.empty()) break;
    const double r = unit(rng) * total;
    std::size_t pick = 0;
    while (pick + 1 < options.size() && cumulative[pick] <= r) ++pick;

    const auto& edge = cfg.edges[options[pick]];
    if (edge.kind == EdgeKind::call && edge.return_site) stack.push_back(*edge.return_site);
    else if (edge.kind == EdgeKind::ret) stack.pop_back();
    out.push_back(cfg.transfer_of(edge));
    at = edge.dst;
  }
  return out;
}

}  // namespace speclog::ingest
