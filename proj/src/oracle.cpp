// Exhaustive execution enumerator. Deliberately implemented from the
// marking rules over its own indexed net representation, not on top of
// the live engine, so the two can check each other.

#include <deque>

#include "ddsflow/evolution.hpp"

namespace ddsflow::evo {

using meta::ActivityDef;
using meta::SplitKind;
using meta::WorkflowGraph;

namespace {

struct Net {
  struct NodeInfo {
    std::string qid;
    bool elementary = true;
    bool is_start = false, is_end = false;
    SplitKind split = SplitKind::NONE, join = SplitKind::NONE;
    std::vector<int> outs, ins;  // edge indices, declared order
    int scope = 0;
    int subscope = -1;  // composite body
  };
  struct EdgeInfo {
    int from = -1, to = -1;
    bool is_default = false;
  };
  struct ScopeInfo {
    int start = -1, end = -1;
    int owner = -1;  // composite node, -1 for top
    std::vector<int> members;
  };
  std::vector<NodeInfo> nodes;
  std::vector<EdgeInfo> edges;
  std::vector<ScopeInfo> scopes;

  int build_scope(const WorkflowGraph& g, const std::string& prefix,
                  int owner) {
    int sidx = (int)scopes.size();
    scopes.push_back({});
    scopes[sidx].owner = owner;
    std::map<std::string, int> local;
    for (const ActivityDef& n : g.nodes) {
      int idx = (int)nodes.size();
      local[n.id] = idx;
      NodeInfo info;
      info.qid = prefix + n.id;
      info.elementary = n.kind == ActivityDef::Kind::ELEMENTARY;
      info.split = n.split;
      info.join = n.join;
      info.scope = sidx;
      nodes.push_back(info);
      scopes[sidx].members.push_back(idx);
    }
    scopes[sidx].start = local.at(g.start);
    scopes[sidx].end = local.at(g.end);
    nodes[scopes[sidx].start].is_start = true;
    nodes[scopes[sidx].end].is_end = true;
    for (const meta::TransitionDef& e : g.edges) {
      int eidx = (int)edges.size();
      edges.push_back({local.at(e.from), local.at(e.to), e.is_default});
      nodes[local.at(e.from)].outs.push_back(eidx);
      nodes[local.at(e.to)].ins.push_back(eidx);
    }
    for (const ActivityDef& n : g.nodes)
      if (n.subgraph) {
        int idx = local.at(n.id);
        nodes[idx].subscope =
            build_scope(*n.subgraph, prefix + n.id + ".", idx);
      }
    return sidx;
  }
};

enum : uint8_t { WAIT, ENAB, DONE };  // oracle-level node phases

struct Marking {
  std::vector<uint8_t> phase;     // per node
  std::vector<uint8_t> tokens;    // per edge
  std::vector<uint8_t> completes;  // per node

  bool operator<(const Marking& o) const {
    return std::tie(phase, tokens, completes) <
           std::tie(o.phase, o.tokens, o.completes);
  }
};

class Enumerator {
 public:
  Enumerator(const WorkflowGraph& g, int k) : k_(k) {
    net_.build_scope(g, "", -1);
  }

  std::set<std::vector<std::string>> run(int max_events) {
    Marking m0;
    m0.phase.assign(net_.nodes.size(), WAIT);
    m0.tokens.assign(net_.edges.size(), 0);
    m0.completes.assign(net_.nodes.size(), 0);

    std::set<std::vector<std::string>> results;
    std::deque<std::pair<Marking, std::vector<std::string>>> queue;
    std::set<std::pair<Marking, std::vector<std::string>>> visited;

    for (Marking& m : enter_scope(m0, 0)) {
      std::vector<std::string> seq;
      if (visited.insert({m, seq}).second) queue.push_back({std::move(m), seq});
    }
    while (!queue.empty()) {
      auto [m, seq] = std::move(queue.front());
      queue.pop_front();
      results.insert(seq);
      if ((int)seq.size() >= max_events) continue;
      for (size_t n = 0; n < net_.nodes.size(); ++n) {
        if (m.phase[n] != ENAB || !net_.nodes[n].elementary) continue;
        if (m.completes[n] >= k_) continue;
        std::vector<std::string> next_seq = seq;
        next_seq.push_back(net_.nodes[n].qid);
        for (Marking& t : complete(m, (int)n))
          if (visited.insert({t, next_seq}).second)
            queue.push_back({std::move(t), next_seq});
      }
      if (results.size() > 2'000'000)
        throw Error(Errc::BOUND_EXCEEDED, "execution set too large");
    }
    return results;
  }

 private:
  std::vector<Marking> enter_scope(const Marking& m, int scope) {
    Marking t = m;
    for (int n : net_.scopes[scope].members) {
      t.phase[n] = WAIT;
      reset_nested(t, n);
    }
    for (int n : net_.scopes[scope].members)
      for (int e : net_.nodes[n].outs) t.tokens[e] = 0;
    int start = net_.scopes[scope].start;
    t.phase[start] = DONE;
    return fire_split(t, start);
  }

  void reset_nested(Marking& t, int node) {
    if (net_.nodes[node].subscope < 0) return;
    for (int n : net_.scopes[net_.nodes[node].subscope].members) {
      t.phase[n] = WAIT;
      for (int e : net_.nodes[n].outs) t.tokens[e] = 0;
      reset_nested(t, n);
    }
  }

  std::vector<Marking> complete(const Marking& m, int node) {
    Marking t = m;
    t.phase[node] = DONE;
    ++t.completes[node];
    std::vector<Marking> out;
    for (Marking& a : fire_split(t, node))
      for (Marking& b : settle(a, node)) out.push_back(std::move(b));
    return out;
  }

  std::vector<Marking> fire_split(const Marking& m, int node) {
    const Net::NodeInfo& n = net_.nodes[node];
    if (n.outs.empty()) return {m};
    if (n.split == SplitKind::XOR) {
      // free choice: fork one branch per declared out edge
      std::vector<Marking> out;
      for (int e : n.outs) {
        Marking t = m;
        ++t.tokens[e];
        for (Marking& r : settle(t, net_.edges[e].to))
          out.push_back(std::move(r));
      }
      return out;
    }
    std::vector<Marking> cur{m};
    for (int e : n.outs) {
      std::vector<Marking> next;
      for (Marking& t : cur) {
        ++t.tokens[e];
        for (Marking& r : settle(t, net_.edges[e].to))
          next.push_back(std::move(r));
      }
      cur = std::move(next);
    }
    return cur;
  }

  // Join check on `node` after a token placement or completion.
  std::vector<Marking> settle(const Marking& m, int node) {
    const Net::NodeInfo& n = net_.nodes[node];
    uint8_t phase = m.phase[node];
    if (phase == ENAB) return {m};
    if (n.ins.empty()) return {m};
    bool ready;
    if (n.join == SplitKind::AND) {
      ready = true;
      for (int e : n.ins)
        if (m.tokens[e] == 0) ready = false;
    } else {
      ready = false;
      for (int e : n.ins)
        if (m.tokens[e] > 0) ready = true;
    }
    if (!ready) return {m};

    Marking t = m;
    if (n.join == SplitKind::AND) {
      for (int e : n.ins) --t.tokens[e];
    } else {
      for (int e : n.ins)
        if (t.tokens[e] > 0) {
          --t.tokens[e];
          break;
        }
    }
    if (n.is_end) {
      t.phase[node] = DONE;
      int owner = net_.scopes[n.scope].owner;
      if (owner < 0) return {t};
      // composite body finished: the composite itself completes
      t.phase[owner] = DONE;
      std::vector<Marking> out;
      for (Marking& a : fire_split(t, owner))
        for (Marking& b : settle(a, owner)) out.push_back(std::move(b));
      return out;
    }
    if (!n.elementary) {
      // composite activation runs its body's start
      if (++t.completes[node] > (uint8_t)(k_ * 4 + 4))
        throw Error(Errc::BOUND_EXCEEDED, "composite cycle");
      return enter_scope_of(t, node);
    }
    t.phase[node] = ENAB;
    return {t};
  }

  std::vector<Marking> enter_scope_of(Marking& t, int node) {
    int scope = net_.nodes[node].subscope;
    for (int n : net_.scopes[scope].members) {
      t.phase[n] = WAIT;
      for (int e : net_.nodes[n].outs) t.tokens[e] = 0;
      reset_nested(t, n);
    }
    int start = net_.scopes[scope].start;
    t.phase[start] = DONE;
    return fire_split(t, start);
  }

  Net net_;
  int k_;
};

}  // namespace

std::set<std::vector<std::string>> enumerate_executions(
    const WorkflowGraph& graph, int max_events, int loop_depth) {
  if (max_events < 0 || max_events > 20)
    throw Error(Errc::BOUND_EXCEEDED,
                "max_events must be between 0 and 20");
  return Enumerator(graph, loop_depth).run(max_events);
}

}  // namespace ddsflow::evo
