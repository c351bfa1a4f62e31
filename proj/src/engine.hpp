#pragma once

// Internal token-flow engine shared by enactment and evolution.
//
// Semantics (edge markings):
//  - instantiate: every node WAITING, then the start node auto-completes
//    and fires its split.
//  - a token placed on an edge triggers the target's join check.
//    AND join: one token on every incoming edge; otherwise: any token.
//  - on a satisfied join the tokens are consumed (AND: one from each
//    incoming; otherwise one from the first incoming edge, in declared
//    order, that holds one) and the target reacts by state:
//      WAITING/COMPLETED -> ENABLED   (loop re-entry resets COMPLETED)
//      SKIPPED           -> pass-through: stays SKIPPED, split fires
//      start/end nodes and COMPOSITE nodes auto-run (no events)
//  - completing a node fires its split: NONE one edge, AND all edges,
//    XOR first guard true in declared order else the default edge; a
//    guard evaluating to ERROR aborts the whole operation.
//  - after a completion the node's own join is re-checked so tokens
//    that arrived while it was busy are not lost.

#include <deque>

#include "ddsflow/evolution.hpp"
#include "ddsflow/expr.hpp"
#include "ddsflow/item.hpp"

namespace ddsflow::engine_detail {

using enact::ActivityState;
using enact::Item;
using meta::ActivityDef;
using meta::SplitKind;
using meta::TransitionDef;
using meta::WorkflowGraph;

inline std::string edge_key(const std::string& prefix, const std::string& from,
                            const std::string& to) {
  return prefix + from + ">" + to;
}

inline std::pair<std::string, std::string> split_qid(const std::string& qid) {
  size_t dot = qid.rfind('.');
  if (dot == std::string::npos) return {"", qid};
  return {qid.substr(0, dot + 1), qid.substr(dot + 1)};
}

// Walks "C1.C2." down from the top graph to the owning subgraph.
inline const WorkflowGraph* scope_graph(const WorkflowGraph& top,
                                        const std::string& prefix) {
  const WorkflowGraph* g = &top;
  size_t pos = 0;
  while (pos < prefix.size()) {
    size_t dot = prefix.find('.', pos);
    const ActivityDef* n = g->node(prefix.substr(pos, dot - pos));
    if (!n || !n->subgraph) return nullptr;
    g = n->subgraph.get();
    pos = dot + 1;
  }
  return g;
}

class Engine {
 public:
  Engine(Item& item, const WorkflowGraph& graph) : item_(item), top_(graph) {}

  // Fresh marking; returns qualified ids enabled by the initial flow.
  std::vector<std::string> init() {
    item_.states.clear();
    item_.tokens.clear();
    reset_scope("", top_);
    item_.status = enact::ItemStatus::ACTIVE;
    auto_complete_start("", top_);
    recompute_status();
    return take_enabled();
  }

  // COMPLETE an ENABLED-or-STARTED node (callers enforce START first for
  // real fires; migration replay completes straight from ENABLED).
  void complete(const std::string& qid, const doc::CanonicalDoc* outcome) {
    auto [prefix, local] = split_qid(qid);
    const WorkflowGraph* g = scope_graph(top_, prefix);
    if (!g) throw Error(Errc::NOT_FOUND, "no scope for " + qid);
    set_state(qid, ActivityState::COMPLETED);
    fire_split(prefix, *g, local, outcome, false);
    recheck_join(prefix, *g, local);
    recompute_status();
  }

  void skip(const std::string& qid) {
    auto [prefix, local] = split_qid(qid);
    const WorkflowGraph* g = scope_graph(top_, prefix);
    if (!g) throw Error(Errc::NOT_FOUND, "no scope for " + qid);
    bool had_tokens = item_.states.at(qid) == ActivityState::ENABLED;
    set_state(qid, ActivityState::SKIPPED);
    if (had_tokens) fire_split(prefix, *g, local, nullptr, true);
    recompute_status();
  }

  void recompute_status() {
    if (item_.status == enact::ItemStatus::ABORTED) return;
    bool end_done =
        item_.states.count(top_.end) &&
        item_.states.at(top_.end) == ActivityState::COMPLETED;
    bool busy = false;
    for (const auto& [qid, st] : item_.states)
      if (st == ActivityState::ENABLED || st == ActivityState::STARTED)
        busy = true;
    item_.status = end_done && !busy ? enact::ItemStatus::COMPLETED
                                     : enact::ItemStatus::ACTIVE;
  }

  std::vector<std::string> take_enabled() { return std::move(newly_enabled_); }

  // Re-run the join check for one node (used after delta insertion).
  void try_enable(const std::string& qid) {
    auto [prefix, local] = split_qid(qid);
    const WorkflowGraph* g = scope_graph(top_, prefix);
    if (g) try_join(prefix, *g, local);
    recompute_status();
  }

  const WorkflowGraph& top() const { return top_; }

 private:
  void reset_scope(const std::string& prefix, const WorkflowGraph& g) {
    for (const ActivityDef& n : g.nodes) {
      item_.states[prefix + n.id] = ActivityState::WAITING;
      if (n.subgraph) reset_scope(prefix + n.id + ".", *n.subgraph);
    }
    for (const TransitionDef& e : g.edges)
      item_.tokens.erase(edge_key(prefix, e.from, e.to));
  }

  void auto_complete_start(const std::string& prefix, const WorkflowGraph& g) {
    item_.states[prefix + g.start] = ActivityState::COMPLETED;
    fire_split(prefix, g, g.start, nullptr, false);
  }

  std::vector<const TransitionDef*> choose_edges(
      const WorkflowGraph& g, const std::string& local,
      const doc::CanonicalDoc* outcome, bool skip_mode) {
    const ActivityDef* n = g.node(local);
    auto outs = g.out_edges(local);
    if (outs.empty()) return {};
    if (!n || n->split != SplitKind::XOR)
      return outs;  // NONE fires its single edge, AND fires all
    if (skip_mode) {
      for (const TransitionDef* e : outs)
        if (e->is_default) return {e};
      return {outs.front()};
    }
    static const doc::CanonicalDoc empty{"", {}, {}, std::nullopt};
    const doc::CanonicalDoc& d = outcome ? *outcome : empty;
    const TransitionDef* fallback = nullptr;
    for (const TransitionDef* e : outs) {
      if (e->is_default) {
        fallback = e;
        continue;
      }
      if (!e->guard) continue;
      expr::Value v = expr::eval_expr(expr::parse_expr(*e->guard), d);
      if (v.is_error())
        throw Error(Errc::GUARD_ERROR,
                    "guard '" + *e->guard + "' on " + local + ": " + v.str);
      if (v.is_true()) return {e};
    }
    if (!fallback)
      throw Error(Errc::GUARD_ERROR, "no guard matched and no default edge");
    return {fallback};
  }

  void fire_split(const std::string& prefix, const WorkflowGraph& g,
                  const std::string& local, const doc::CanonicalDoc* outcome,
                  bool skip_mode) {
    for (const TransitionDef* e : choose_edges(g, local, outcome, skip_mode)) {
      ++item_.tokens[edge_key(prefix, e->from, e->to)];
      try_join(prefix, g, e->to);
    }
  }

  bool join_satisfied(const std::string& prefix, const WorkflowGraph& g,
                      const ActivityDef& n) {
    auto ins = g.in_edges(n.id);
    if (ins.empty()) return false;
    if (n.join == SplitKind::AND) {
      for (const TransitionDef* e : ins)
        if (token_count(prefix, *e) == 0) return false;
      return true;
    }
    for (const TransitionDef* e : ins)
      if (token_count(prefix, *e) > 0) return true;
    return false;
  }

  int token_count(const std::string& prefix, const TransitionDef& e) const {
    auto it = item_.tokens.find(edge_key(prefix, e.from, e.to));
    return it == item_.tokens.end() ? 0 : it->second;
  }

  void consume(const std::string& prefix, const WorkflowGraph& g,
               const ActivityDef& n) {
    auto ins = g.in_edges(n.id);
    if (n.join == SplitKind::AND) {
      for (const TransitionDef* e : ins) take_token(prefix, *e);
      return;
    }
    for (const TransitionDef* e : ins)
      if (token_count(prefix, *e) > 0) {
        take_token(prefix, *e);
        return;
      }
  }

  void take_token(const std::string& prefix, const TransitionDef& e) {
    std::string k = edge_key(prefix, e.from, e.to);
    if (--item_.tokens.at(k) == 0) item_.tokens.erase(k);
  }

  void try_join(const std::string& prefix, const WorkflowGraph& g,
                const std::string& local) {
    const ActivityDef* n = g.node(local);
    if (!n) return;
    std::string qid = prefix + local;
    ActivityState st = item_.states.at(qid);
    if (st == ActivityState::ENABLED || st == ActivityState::STARTED)
      return;  // token stays pending until the node finishes
    if (!join_satisfied(prefix, g, *n)) return;
    consume(prefix, g, *n);

    if (local == g.end) {
      set_state(qid, ActivityState::COMPLETED);
      scope_completed(prefix);
      return;
    }
    if (st == ActivityState::SKIPPED) {
      fire_split(prefix, g, local, nullptr, true);  // pass-through
      recheck_join(prefix, g, local);
      return;
    }
    if (n->kind == ActivityDef::Kind::COMPOSITE) {
      set_state(qid, ActivityState::STARTED);
      reset_scope(qid + ".", *n->subgraph);
      auto_complete_start(qid + ".", *n->subgraph);
      return;
    }
    set_state(qid, ActivityState::ENABLED);
    newly_enabled_.push_back(qid);
  }

  void recheck_join(const std::string& prefix, const WorkflowGraph& g,
                    const std::string& local) {
    try_join(prefix, g, local);
  }

  void scope_completed(const std::string& prefix) {
    if (prefix.empty()) return;  // item status handled by recompute
    std::string comp_qid = prefix.substr(0, prefix.size() - 1);
    auto [parent_prefix, local] = split_qid(comp_qid);
    const WorkflowGraph* pg = scope_graph(top_, parent_prefix);
    set_state(comp_qid, ActivityState::COMPLETED);
    fire_split(parent_prefix, *pg, local, nullptr, false);
    recheck_join(parent_prefix, *pg, local);
  }

  void set_state(const std::string& qid, ActivityState st) {
    item_.states.at(qid) = st;
  }

  Item& item_;
  const WorkflowGraph& top_;
  std::vector<std::string> newly_enabled_;
};

}  // namespace ddsflow::engine_detail
