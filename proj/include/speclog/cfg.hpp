#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "speclog/types.hpp"

namespace speclog {

enum class EdgeKind : std::uint8_t { jump, cond_true, cond_false, call, ret, fallthrough };

inline std::string_view to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::jump: return "jump";
    case EdgeKind::cond_true: return "cond_true";
    case EdgeKind::cond_false: return "cond_false";
    case EdgeKind::call: return "call";
    case EdgeKind::ret: return "return";
    case EdgeKind::fallthrough: return "fallthrough";
  }
  return "jump";
}

inline EdgeKind parse_edge_kind(std::string_view s) {
  for (auto k : {EdgeKind::jump, EdgeKind::cond_true, EdgeKind::cond_false, EdgeKind::call, EdgeKind::ret,
                 EdgeKind::fallthrough})
    if (to_string(k) == s) return k;
  throw Error(Errc::malformed_cfg, "unknown edge kind '" + std::string(s) + "'");
}

struct BasicBlock {
  std::uint32_t id = 0;
  Address start;
  Address end;  // address of the block's final (branching) instruction
  std::string function;
};

struct CfgEdge {
  std::size_t src = 0;  // block indices
  std::size_t dst = 0;
  EdgeKind kind = EdgeKind::jump;
  /// For calls: the caller block execution resumes at after the callee returns.
  std::optional<std::size_t> return_site;
};

struct Function {
  std::string name;
  std::size_t entry = 0;  // block index
};

/// Program control-flow graph. Blocks are addressed by dense index; the
/// document-level ids are kept for round trips and diagnostics.
class Cfg {
 public:
  std::vector<Function> functions;
  std::vector<BasicBlock> blocks;
  std::vector<CfgEdge> edges;
  std::size_t entry_function = 0;

  /// Intra-procedural successor: a real edge or the summary edge from a call
  /// block to its return site.
  struct Step {
    std::size_t to;
    std::optional<std::size_t> edge;  // nullopt for call summaries
  };

  void index() {
    out_.assign(blocks.size(), {});
    in_.assign(blocks.size(), {});
    intra_.assign(blocks.size(), {});
    for (std::size_t e = 0; e < edges.size(); ++e) {
      out_[edges[e].src].push_back(e);
      in_[edges[e].dst].push_back(e);
      const auto& ed = edges[e];
      if (ed.kind == EdgeKind::call) {
        if (ed.return_site) intra_[ed.src].push_back({*ed.return_site, std::nullopt});
      } else if (ed.kind != EdgeKind::ret) {
        intra_[ed.src].push_back({ed.dst, e});
      }
    }
    by_id_.clear();
    for (std::size_t i = 0; i < blocks.size(); ++i) by_id_[blocks[i].id] = i;
    fn_index_.clear();
    for (std::size_t f = 0; f < functions.size(); ++f) fn_index_[functions[f].name] = f;
  }

  const std::vector<std::size_t>& out_edges(std::size_t b) const { return out_[b]; }
  const std::vector<std::size_t>& in_edges(std::size_t b) const { return in_[b]; }
  const std::vector<Step>& intra_successors(std::size_t b) const { return intra_[b]; }

  std::optional<std::size_t> block_index(std::uint32_t id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t function_of(std::size_t block) const { return fn_index_.at(blocks[block].function); }
  std::optional<std::size_t> function_index(const std::string& name) const {
    auto it = fn_index_.find(name);
    if (it == fn_index_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<std::size_t> blocks_of(std::size_t fn) const {
    std::vector<std::size_t> r;
    for (std::size_t b = 0; b < blocks.size(); ++b)
      if (blocks[b].function == functions[fn].name) r.push_back(b);
    return r;
  }

  /// The log record produced when control moves along `e`.
  Transfer transfer_of(const CfgEdge& e) const { return {blocks[e.src].end, blocks[e.dst].start}; }
  Transfer transfer_between(std::size_t from, std::size_t to) const { return {blocks[from].end, blocks[to].start}; }

  /// Number of blocks with two or more distinct intra-procedural successors.
  std::size_t branch_count(std::size_t fn) const {
    std::size_t n = 0;
    for (auto b : blocks_of(fn)) {
      std::set<std::size_t> succ;
      for (auto e : out_[b])
        if (edges[e].kind != EdgeKind::call && edges[e].kind != EdgeKind::ret) succ.insert(edges[e].dst);
      if (succ.size() >= 2) ++n;
    }
    return n;
  }

  bool is_called(std::size_t fn) const {
    if (fn == entry_function) return true;
    for (const auto& e : edges)
      if (e.kind == EdgeKind::call && e.dst == functions[fn].entry) return true;
    return false;
  }

 private:
  std::vector<std::vector<std::size_t>> out_, in_;
  std::vector<std::vector<Step>> intra_;
  std::unordered_map<std::uint32_t, std::size_t> by_id_;
  std::unordered_map<std::string, std::size_t> fn_index_;
};

// CFG document (JSON):
// { "entry": "main",
//   "functions": [ {"name": "main", "entry": 0} ],
//   "blocks": [ {"id": 0, "start": "0x0400", "end": "0x0408", "function": "main"} ],
//   "edges": [ {"src": 0, "dst": 1, "kind": "cond_true"},
//              {"src": 1, "dst": 7, "kind": "call", "ret": 2},
//              {"src": 9, "dst": 2, "kind": "return"} ] }

inline Cfg build_cfg(const std::string& document) {
  Cfg cfg;
  try {
    const auto doc = nlohmann::json::parse(document);
    std::map<std::uint32_t, std::size_t> ids;
    for (const auto& jb : doc.at("blocks")) {
      BasicBlock b;
      b.id = jb.at("id").get<std::uint32_t>();
      std::uint32_t s = 0, e = 0;
      if (!parse_hex(jb.at("start").get<std::string>(), s) || !parse_hex(jb.at("end").get<std::string>(), e))
        throw Error(Errc::malformed_cfg, "block " + std::to_string(b.id) + " has a bad address");
      b.start = Address{s};
      b.end = Address{e};
      b.function = jb.at("function").get<std::string>();
      if (!ids.emplace(b.id, cfg.blocks.size()).second)
        throw Error(Errc::malformed_cfg, "duplicate block id " + std::to_string(b.id));
      cfg.blocks.push_back(std::move(b));
    }
    auto block = [&](std::uint32_t id, const char* what) {
      auto it = ids.find(id);
      if (it == ids.end()) throw Error(Errc::malformed_cfg, std::string(what) + " references missing block " + std::to_string(id));
      return it->second;
    };
    std::set<std::string> names;
    for (const auto& jf : doc.at("functions")) {
      Function f;
      f.name = jf.at("name").get<std::string>();
      f.entry = block(jf.at("entry").get<std::uint32_t>(), "function entry");
      if (!names.insert(f.name).second) throw Error(Errc::malformed_cfg, "duplicate function " + f.name);
      if (cfg.blocks[f.entry].function != f.name)
        throw Error(Errc::malformed_cfg, "entry of " + f.name + " belongs to another function");
      cfg.functions.push_back(std::move(f));
    }
    if (cfg.functions.empty()) throw Error(Errc::malformed_cfg, "no functions / no entry");
    for (const auto& b : cfg.blocks)
      if (!names.count(b.function)) throw Error(Errc::malformed_cfg, "block in unknown function " + b.function);
    for (const auto& je : doc.at("edges")) {
      CfgEdge e;
      e.src = block(je.at("src").get<std::uint32_t>(), "edge");
      e.dst = block(je.at("dst").get<std::uint32_t>(), "edge");
      e.kind = parse_edge_kind(je.at("kind").get<std::string>());
      if (je.contains("ret")) e.return_site = block(je.at("ret").get<std::uint32_t>(), "call return site");
      cfg.edges.push_back(e);
    }
    const auto entry_name = doc.value("entry", cfg.functions.front().name);
    auto it = std::find_if(cfg.functions.begin(), cfg.functions.end(), [&](const Function& f) { return f.name == entry_name; });
    if (it == cfg.functions.end()) throw Error(Errc::malformed_cfg, "entry function " + entry_name + " not defined");
    cfg.entry_function = static_cast<std::size_t>(it - cfg.functions.begin());
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed_cfg, e.what());
  }
  cfg.index();

  for (const auto& e : cfg.edges) {
    const auto& sf = cfg.blocks[e.src].function;
    const auto& df = cfg.blocks[e.dst].function;
    if (e.kind == EdgeKind::call) {
      const auto callee = cfg.function_index(df);
      if (cfg.functions[*callee].entry != e.dst) throw Error(Errc::malformed_cfg, "call does not target a function entry");
      if (e.return_site && cfg.blocks[*e.return_site].function != sf)
        throw Error(Errc::malformed_cfg, "return site outside the calling function");
    } else if (e.kind != EdgeKind::ret && sf != df) {
      throw Error(Errc::malformed_cfg, "intra-procedural edge crosses functions");
    }
  }
  return cfg;
}

inline std::string write_cfg(const Cfg& cfg) {
  nlohmann::json doc;
  doc["entry"] = cfg.functions.at(cfg.entry_function).name;
  doc["functions"] = nlohmann::json::array();
  for (const auto& f : cfg.functions) doc["functions"].push_back({{"name", f.name}, {"entry", cfg.blocks[f.entry].id}});
  doc["blocks"] = nlohmann::json::array();
  for (const auto& b : cfg.blocks)
    doc["blocks"].push_back({{"id", b.id}, {"start", to_hex(b.start.value)}, {"end", to_hex(b.end.value)}, {"function", b.function}});
  doc["edges"] = nlohmann::json::array();
  for (const auto& e : cfg.edges) {
    nlohmann::json je = {{"src", cfg.blocks[e.src].id}, {"dst", cfg.blocks[e.dst].id}, {"kind", std::string(to_string(e.kind))}};
    if (e.return_site) je["ret"] = cfg.blocks[*e.return_site].id;
    doc["edges"].push_back(std::move(je));
  }
  return doc.dump(2) + "\n";
}

// -- dominators and natural loops ----------------------------------------------

/// Immediate dominators of every block reachable from `fn`'s entry over the
/// intra-procedural graph (Cooper, Harvey & Kennedy). Unreachable blocks map
/// to nullopt; the entry maps to itself.
inline std::vector<std::optional<std::size_t>> immediate_dominators(const Cfg& cfg, std::size_t fn) {
  const std::size_t n = cfg.blocks.size();
  const std::size_t entry = cfg.functions[fn].entry;

  std::vector<std::size_t> order;  // postorder
  std::vector<char> seen(n, 0);
  std::vector<std::pair<std::size_t, std::size_t>> stack{{entry, 0}};
  seen[entry] = 1;
  while (!stack.empty()) {
    auto& [b, i] = stack.back();
    const auto& succ = cfg.intra_successors(b);
    if (i < succ.size()) {
      const auto next = succ[i++].to;
      if (!seen[next]) {
        seen[next] = 1;
        stack.push_back({next, 0});
      }
    } else {
      order.push_back(b);
      stack.pop_back();
    }
  }
  std::vector<std::size_t> po_num(n, 0);
  for (std::size_t i = 0; i < order.size(); ++i) po_num[order[i]] = i;

  std::vector<std::vector<std::size_t>> preds(n);
  for (auto b : order)
    for (const auto& s : cfg.intra_successors(b)) preds[s.to].push_back(b);

  std::vector<std::optional<std::size_t>> idom(n);
  idom[entry] = entry;
  auto intersect = [&](std::size_t a, std::size_t b) {
    while (a != b) {
      while (po_num[a] < po_num[b]) a = *idom[a];
      while (po_num[b] < po_num[a]) b = *idom[b];
    }
    return a;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto b = *it;
      if (b == entry) continue;
      std::optional<std::size_t> nd;
      for (auto p : preds[b]) {
        if (!idom[p]) continue;
        nd = nd ? intersect(p, *nd) : p;
      }
      if (nd && idom[b] != nd) {
        idom[b] = nd;
        changed = true;
      }
    }
  }
  return idom;
}

inline bool dominates(const std::vector<std::optional<std::size_t>>& idom, std::size_t a, std::size_t b) {
  if (!idom[b]) return false;
  for (std::size_t x = b;; x = *idom[x]) {
    if (x == a) return true;
    if (*idom[x] == x) return false;
  }
}

struct Loop {
  std::size_t header = 0;
  std::vector<std::size_t> latches;
  std::vector<std::size_t> blocks;  // sorted
  std::size_t function = 0;
};

struct LoopInfo {
  std::vector<Loop> loops;
  std::vector<std::vector<std::size_t>> membership;  // block -> loop indices

  bool in_loop(std::size_t b) const { return !membership[b].empty(); }
  bool is_header(std::size_t b) const {
    return std::any_of(loops.begin(), loops.end(), [&](const Loop& l) { return l.header == b; });
  }
  bool is_back_edge(std::size_t from, std::size_t to) const {
    for (const auto& l : loops)
      if (l.header == to && std::find(l.latches.begin(), l.latches.end(), from) != l.latches.end()) return true;
    return false;
  }
};

/// Natural loops of every back edge (target dominates source); back edges
/// sharing a header form one loop.
inline LoopInfo find_loops(const Cfg& cfg) {
  LoopInfo info;
  info.membership.assign(cfg.blocks.size(), {});
  for (std::size_t fn = 0; fn < cfg.functions.size(); ++fn) {
    const auto idom = immediate_dominators(cfg, fn);
    std::map<std::size_t, std::vector<std::size_t>> latches_by_header;
    for (std::size_t b = 0; b < cfg.blocks.size(); ++b) {
      if (!idom[b]) continue;
      for (const auto& s : cfg.intra_successors(b))
        if (dominates(idom, s.to, b)) latches_by_header[s.to].push_back(b);
    }
    std::vector<std::vector<std::size_t>> preds(cfg.blocks.size());
    for (std::size_t b = 0; b < cfg.blocks.size(); ++b)
      if (idom[b])
        for (const auto& s : cfg.intra_successors(b)) preds[s.to].push_back(b);

    for (auto& [header, latches] : latches_by_header) {
      std::set<std::size_t> body{header};
      std::vector<std::size_t> work;
      for (auto l : latches)
        if (body.insert(l).second) work.push_back(l);
      while (!work.empty()) {
        const auto b = work.back();
        work.pop_back();
        for (auto p : preds[b])
          if (body.insert(p).second) work.push_back(p);
      }
      std::sort(latches.begin(), latches.end());
      latches.erase(std::unique(latches.begin(), latches.end()), latches.end());
      const auto id = info.loops.size();
      info.loops.push_back({header, latches, {body.begin(), body.end()}, fn});
      for (auto b : body) info.membership[b].push_back(id);
    }
  }
  return info;
}

// -- segments ------------------------------------------------------------------

enum class SegmentBoundary : std::uint8_t { graph_entry, loop_entry, loop_exit, after_call, join };

inline std::string_view to_string(SegmentBoundary b) {
  switch (b) {
    case SegmentBoundary::graph_entry: return "graph_entry";
    case SegmentBoundary::loop_entry: return "loop_entry";
    case SegmentBoundary::loop_exit: return "loop_exit";
    case SegmentBoundary::after_call: return "after_call";
    case SegmentBoundary::join: return "join";
  }
  return "join";
}

/// A forward-edge subgraph of one function. `edges` are the internal edges
/// (block index pairs); every other edge leaving a block of the segment leads
/// to a successor segment, possibly this one when it closes a loop.
struct Segment {
  std::size_t id = 0;
  std::size_t function = 0;
  std::size_t leader = 0;
  SegmentBoundary boundary = SegmentBoundary::graph_entry;
  std::vector<std::size_t> blocks;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::set<std::size_t> successors;
};

namespace detail {

inline bool is_acyclic(const std::vector<std::size_t>& nodes, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::map<std::size_t, std::size_t> indeg;
  std::map<std::size_t, std::vector<std::size_t>> adj;
  for (auto n : nodes) indeg[n] = 0;
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    ++indeg[b];
  }
  std::vector<std::size_t> ready;
  for (auto [n, d] : indeg)
    if (d == 0) ready.push_back(n);
  std::size_t visited = 0;
  while (!ready.empty()) {
    const auto n = ready.back();
    ready.pop_back();
    ++visited;
    for (auto m : adj[n])
      if (--indeg[m] == 0) ready.push_back(m);
  }
  return visited == indeg.size();
}

inline void recompute_successors(const Cfg& cfg, std::vector<Segment>& segs) {
  std::vector<std::optional<std::size_t>> owner(cfg.blocks.size());
  for (std::size_t i = 0; i < segs.size(); ++i)
    for (auto b : segs[i].blocks) owner[b] = i;
  for (auto& s : segs) {
    s.successors.clear();
    std::set<std::pair<std::size_t, std::size_t>> internal(s.edges.begin(), s.edges.end());
    for (auto b : s.blocks)
      for (const auto& step : cfg.intra_successors(b)) {
        if (!owner[step.to] || internal.count({b, step.to})) continue;
        // pieces fused across a call stay apart; only a jump to the leader loops back
        if (segs[*owner[step.to]].id == s.id && step.to != s.leader) continue;
        s.successors.insert(segs[*owner[step.to]].id);
      }
  }
}

}  // namespace detail

/// Splits each function at its entry, loop headers, loop exits and call
/// return sites. Blocks reached from more than one segment, or only through a
/// retreating edge, start their own segment so that every segment stays a DAG.
inline std::vector<Segment> segment_cfg(const Cfg& cfg, const LoopInfo& loops) {
  std::vector<Segment> segs;
  const std::size_t n = cfg.blocks.size();
  std::vector<std::optional<std::size_t>> owner(n);

  for (std::size_t fn = 0; fn < cfg.functions.size(); ++fn) {
    const auto entry = cfg.functions[fn].entry;
    std::map<std::size_t, SegmentBoundary> leaders;
    leaders[entry] = SegmentBoundary::graph_entry;
    for (const auto& l : loops.loops) {
      if (l.function != fn) continue;
      leaders.emplace(l.header, SegmentBoundary::loop_entry);
      for (auto b : l.blocks)
        for (const auto& s : cfg.intra_successors(b))
          if (!std::binary_search(l.blocks.begin(), l.blocks.end(), s.to)) leaders.emplace(s.to, SegmentBoundary::loop_exit);
    }
    for (auto b : cfg.blocks_of(fn)) {
      bool is_call = false;
      for (auto e : cfg.out_edges(b)) is_call |= cfg.edges[e].kind == EdgeKind::call;
      if (is_call)
        for (const auto& s : cfg.intra_successors(b)) leaders.emplace(s.to, SegmentBoundary::after_call);
    }

    // reverse postorder with retreating-edge detection
    std::vector<std::size_t> post;
    std::vector<char> state(n, 0);  // 0 new, 1 on stack, 2 done
    std::set<std::pair<std::size_t, std::size_t>> retreating;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{entry, 0}};
    state[entry] = 1;
    while (!stack.empty()) {
      auto& [b, i] = stack.back();
      const auto& succ = cfg.intra_successors(b);
      if (i < succ.size()) {
        const auto next = succ[i++].to;
        if (state[next] == 1) retreating.insert({b, next});
        if (state[next] == 0) {
          state[next] = 1;
          stack.push_back({next, 0});
        }
      } else {
        state[b] = 2;
        post.push_back(b);
        stack.pop_back();
      }
    }
    std::vector<std::vector<std::size_t>> preds(n);
    for (auto b : post)
      for (const auto& s : cfg.intra_successors(b)) preds[s.to].push_back(b);

    for (auto it = post.rbegin(); it != post.rend(); ++it) {
      const auto b = *it;
      if (!leaders.count(b)) {
        std::set<std::size_t> from;
        bool retreat = false;
        for (auto p : preds[b]) {
          if (retreating.count({p, b})) retreat = true;
          else if (owner[p]) from.insert(*owner[p]);
        }
        if (from.size() == 1 && !retreat) {
          owner[b] = *from.begin();
          segs[*from.begin()].blocks.push_back(b);
          continue;
        }
        leaders[b] = SegmentBoundary::join;
      }
      Segment s;
      s.id = segs.size();
      s.function = fn;
      s.leader = b;
      s.boundary = leaders[b];
      s.blocks.push_back(b);
      owner[b] = s.id;
      segs.push_back(std::move(s));
    }
  }

  for (auto& s : segs) {
    std::sort(s.blocks.begin(), s.blocks.end());
    for (auto b : s.blocks)
      for (const auto& step : cfg.intra_successors(b))
        if (step.edge && owner[step.to] == s.id && step.to != s.leader) s.edges.push_back({b, step.to});
    std::sort(s.edges.begin(), s.edges.end());
    s.edges.erase(std::unique(s.edges.begin(), s.edges.end()), s.edges.end());
  }
  detail::recompute_successors(cfg, segs);
  return segs;
}

/// Fuses every segment that has exactly one successor with that successor,
/// until nothing changes. A fusion is skipped if it would follow a back edge,
/// create a cycle, or mix blocks with different loop membership.
inline std::vector<Segment> merge_segments(const Cfg& cfg, const LoopInfo& loops, std::vector<Segment> segs) {
  auto loop_sig = [&](const Segment& s) {
    std::set<std::vector<std::size_t>> sig;
    for (auto b : s.blocks) sig.insert(loops.membership[b]);
    return sig;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < segs.size() && !changed; ++i) {
      if (segs[i].successors.size() != 1) continue;
      const auto succ_id = *segs[i].successors.begin();
      auto jt = std::find_if(segs.begin(), segs.end(), [&](const Segment& s) { return s.id == succ_id; });
      const auto j = static_cast<std::size_t>(jt - segs.begin());
      if (j == i) continue;
      auto sig = loop_sig(segs[i]);
      if (sig != loop_sig(segs[j]) || sig.size() != 1) continue;
      bool crosses_back_edge = false;
      for (auto b : segs[i].blocks)
        for (const auto& step : cfg.intra_successors(b))
          crosses_back_edge |= step.to == segs[j].leader && loops.is_back_edge(b, step.to);
      if (crosses_back_edge) continue;

      Segment merged = segs[i];
      merged.blocks.insert(merged.blocks.end(), segs[j].blocks.begin(), segs[j].blocks.end());
      std::sort(merged.blocks.begin(), merged.blocks.end());
      std::set<std::pair<std::size_t, std::size_t>> e(segs[i].edges.begin(), segs[i].edges.end());
      e.insert(segs[j].edges.begin(), segs[j].edges.end());
      for (auto b : merged.blocks)
        for (const auto& step : cfg.intra_successors(b))
          if (step.edge && step.to != merged.leader &&
              std::binary_search(merged.blocks.begin(), merged.blocks.end(), step.to))
            e.insert({b, step.to});
      merged.edges.assign(e.begin(), e.end());
      if (!detail::is_acyclic(merged.blocks, merged.edges)) continue;

      segs[i] = std::move(merged);
      segs.erase(segs.begin() + static_cast<std::ptrdiff_t>(j));
      detail::recompute_successors(cfg, segs);
      changed = true;
    }
  }
  return segs;
}

struct SegmentPath {
  std::size_t segment = 0;
  std::size_t function = 0;
  std::vector<std::size_t> blocks;
  std::vector<Transfer> transfers;
};

inline constexpr std::size_t kDefaultPathCap = 10000;

/// All source-to-sink block paths of a segment as transfer sequences. Any
/// block that jumps back to the path's first block also closes a loop
/// iteration; that path carries the closing transfer.
inline std::vector<SegmentPath> enumerate_segment_paths(const Segment& seg, const Cfg& cfg,
                                                        std::size_t cap = kDefaultPathCap) {
  std::map<std::size_t, std::vector<std::size_t>> adj;
  std::map<std::size_t, std::size_t> indeg;
  for (auto b : seg.blocks) indeg[b] = 0;
  for (auto [a, b] : seg.edges) {
    adj[a].push_back(b);
    ++indeg[b];
  }
  std::vector<SegmentPath> paths;
  std::vector<std::size_t> cur;
  auto emit = [&](bool closing) {
    if (paths.size() >= cap)
      throw Error(Errc::path_explosion, "segment " + std::to_string(seg.id) + " exceeds " + std::to_string(cap) + " paths");
    SegmentPath p{seg.id, seg.function, cur, {}};
    for (std::size_t k = 0; k + 1 < cur.size(); ++k) p.transfers.push_back(cfg.transfer_between(cur[k], cur[k + 1]));
    if (closing) p.transfers.push_back(cfg.transfer_between(cur.back(), cur.front()));
    if (!p.transfers.empty()) paths.push_back(std::move(p));
  };
  std::function<void(std::size_t)> walk = [&](std::size_t b) {
    cur.push_back(b);
    const auto& succ = cfg.intra_successors(b);
    const bool closes = std::any_of(succ.begin(), succ.end(),
                                    [&](const auto& step) { return step.edge && step.to == cur.front(); });
    if (closes) emit(true);
    if (adj[b].empty()) {
      if (!closes) emit(false);
    } else {
      for (auto next : adj[b]) walk(next);
    }
    cur.pop_back();
  };
  for (auto [b, d] : indeg)
    if (d == 0) walk(b);
  return paths;
}

}  // namespace speclog
