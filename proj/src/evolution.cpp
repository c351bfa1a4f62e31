#include "ddsflow/evolution.hpp"

#include <deque>

#include "engine.hpp"

namespace ddsflow::evo {

using enact::ActivityState;
using enact::EventKind;
using enact::Item;
using engine_detail::Engine;
using engine_detail::edge_key;
using engine_detail::scope_graph;
using engine_detail::split_qid;
using meta::ActivityDef;
using meta::SplitKind;
using meta::TransitionDef;
using meta::WorkflowGraph;
using nlohmann::json;

json make_insert_after(const ActivityDef& def, const std::string& after) {
  return json{{"op", "INSERT_AFTER"},
              {"after", after},
              {"node", meta::activity_to_json(def)}};
}

json make_skip_activity(const std::string& id) {
  return json{{"op", "SKIP_ACTIVITY"}, {"id", id}};
}

json make_replace_guard(const std::string& from, const std::string& to,
                        const std::string& expr_text) {
  return json{
      {"op", "REPLACE_GUARD"}, {"from", from}, {"to", to}, {"expr", expr_text}};
}

namespace {

[[noreturn]] void conflict(const std::string& why, json detail = nullptr) {
  throw Error(Errc::DELTA_CONFLICT, why, std::move(detail));
}

void apply_one(WorkflowGraph& g, const json& op) {
  std::string type = op.at("op").get<std::string>();
  if (type == "INSERT_AFTER") {
    std::string after = op.at("after").get<std::string>();
    if (after.find('.') != std::string::npos)
      conflict("INSERT_AFTER targets top-level nodes only");
    ActivityDef def = meta::activity_from_json(op.at("node"));
    if (g.node(def.id)) conflict("node " + def.id + " already exists");
    ActivityDef* anchor = nullptr;
    for (ActivityDef& n : g.nodes)
      if (n.id == after) anchor = &n;
    if (!anchor) conflict("no node " + after);
    // the new node takes over the anchor's outgoing edges and split
    def.split = anchor->split;
    def.join = SplitKind::NONE;
    anchor->split = SplitKind::NONE;
    for (TransitionDef& e : g.edges)
      if (e.from == after) e.from = def.id;
    g.edges.push_back({after, def.id, std::nullopt, false});
    g.nodes.push_back(std::move(def));
  } else if (type == "SKIP_ACTIVITY") {
    std::string id = op.at("id").get<std::string>();
    const ActivityDef* n = g.node(id);
    if (!n) conflict("no node " + id);
    if (id == g.start || id == g.end) conflict("cannot skip " + id);
    // marking-only op; the graph is unchanged
  } else if (type == "REPLACE_GUARD") {
    std::string from = op.at("from").get<std::string>();
    std::string to = op.at("to").get<std::string>();
    std::string text = op.at("expr").get<std::string>();
    (void)expr::parse_expr(text);
    for (TransitionDef& e : g.edges) {
      if (e.from == from && e.to == to) {
        if (!e.guard) conflict("edge " + from + "->" + to + " has no guard");
        e.guard = text;
        return;
      }
    }
    conflict("no edge " + from + "->" + to);
  } else {
    conflict("unknown delta op " + type);
  }
}

std::string op_subject(const json& op) {
  std::string type = op.at("op").get<std::string>();
  if (type == "INSERT_AFTER") return op.at("node").at("id").get<std::string>();
  if (type == "SKIP_ACTIVITY") return op.at("id").get<std::string>();
  if (type == "REPLACE_GUARD")
    return op.at("from").get<std::string>() + "->" +
           op.at("to").get<std::string>();
  return "";
}

}  // namespace

WorkflowGraph apply_delta(const WorkflowGraph& base,
                          const std::vector<json>& delta) {
  WorkflowGraph g = base;
  for (const json& op : delta) apply_one(g, op);
  auto violations = meta::validate_graph(g);
  if (!violations.empty()) {
    json detail = json::array();
    for (const auto& v : violations)
      detail.push_back({{"code", v.code}, {"subject", v.subject}});
    conflict("delta produces an invalid graph", detail);
  }
  return g;
}

WorkflowGraph effective_graph(const Item& item,
                              const meta::DescriptionRepo& repo) {
  return apply_delta(repo.resolve(item.described_by).graph(),
                     item.adhoc_delta);
}

void apply_adhoc_state(Item& item, const json& op,
                       const meta::DescriptionRepo& repo) {
  WorkflowGraph base = repo.resolve(item.described_by).graph();
  std::vector<json> next = item.adhoc_delta;
  next.push_back(op);
  WorkflowGraph eff = apply_delta(base, next);

  std::string type = op.at("op").get<std::string>();
  if (type == "SKIP_ACTIVITY") {
    std::string id = op.at("id").get<std::string>();
    ActivityState st = item.states.at(id);
    if (st != ActivityState::WAITING && st != ActivityState::ENABLED)
      throw Error(Errc::ILLEGAL_TRANSITION,
                  "cannot skip " + id + " in state " +
                      enact::activity_state_name(st));
    Engine eng(item, eff);
    eng.skip(id);
  } else if (type == "INSERT_AFTER") {
    std::string after = op.at("after").get<std::string>();
    std::string nid = op.at("node").at("id").get<std::string>();
    item.states[nid] = ActivityState::WAITING;
    // tokens parked on the anchor's former outgoing edges now belong to
    // the anchor -> new-node edge
    int moved = 0;
    for (const TransitionDef* e : eff.out_edges(nid)) {
      auto it = item.tokens.find(edge_key("", after, e->to));
      if (it != item.tokens.end()) {
        moved += it->second;
        item.tokens.erase(it);
      }
    }
    if (moved) item.tokens[edge_key("", after, nid)] += moved;
    Engine eng(item, eff);
    eng.try_enable(nid);
  }
  item.adhoc_delta.push_back(op);
  Engine(item, eff).recompute_status();
}

enact::Event apply_adhoc(Item& item, const json& op,
                         const meta::DescriptionRepo& repo) {
  auto states = item.states;
  auto tokens = item.tokens;
  auto status = item.status;
  try {
    apply_adhoc_state(item, op, repo);
  } catch (...) {
    item.states = std::move(states);
    item.tokens = std::move(tokens);
    item.status = status;
    throw;
  }
  enact::Event e;
  e.seq = item.log.size() + 1;
  e.item_id = item.id;
  e.activity_id = op_subject(op);
  e.kind = EventKind::ADHOC;
  e.agent = "system";
  e.desc_version = item.described_by;
  e.detail = op;
  item.log.push_back(e);
  return e;
}

// ---------------------------------------------------------------------------
// Migration: trace-directed replay over the target effective graph with
// XOR splits treated as free choice and guards ignored.

namespace {

struct SimState {
  std::map<std::string, ActivityState> states;
  std::map<std::string, int> tokens;
  std::map<std::string, int> completes;

  std::string key() const {
    std::string out;
    for (const auto& [q, s] : states) {
      out += q;
      out += char('0' + int(s));
    }
    out += '|';
    for (const auto& [k, n] : tokens) {
      out += k;
      out += ':';
      out += std::to_string(n);
      out += ';';
    }
    out += '|';
    for (const auto& [k, n] : completes) {
      out += k;
      out += ':';
      out += std::to_string(n);
      out += ';';
    }
    return out;
  }
};

// Guard-free nondeterministic simulator mirroring the engine semantics.
class ChoiceSim {
 public:
  ChoiceSim(const WorkflowGraph& top, int loop_depth)
      : top_(top), k_(loop_depth) {}

  std::vector<SimState> initial() const {
    SimState s;
    reset_scope(s, "", top_);
    std::vector<SimState> out;
    SimState base = s;
    base.states[top_.start] = ActivityState::COMPLETED;
    run_split(std::move(base), "", top_, top_.start, false, out);
    return out;
  }

  bool can_complete(const SimState& s, const std::string& qid) const {
    auto it = s.states.find(qid);
    if (it == s.states.end() || it->second != ActivityState::ENABLED)
      return false;
    auto cit = s.completes.find(qid);
    return (cit == s.completes.end() ? 0 : cit->second) < k_;
  }

  std::vector<std::string> completable(const SimState& s) const {
    std::vector<std::string> out;
    for (const auto& [qid, st] : s.states)
      if (can_complete(s, qid)) out.push_back(qid);
    return out;
  }

  std::vector<SimState> complete(const SimState& s,
                                 const std::string& qid) const {
    auto [prefix, local] = split_qid(qid);
    const WorkflowGraph* g = scope_graph(top_, prefix);
    SimState base = s;
    base.states[qid] = ActivityState::COMPLETED;
    ++base.completes[qid];
    std::vector<SimState> out;
    run_split(std::move(base), prefix, *g, local, false, out);
    std::vector<SimState> rechecked;
    for (SimState& t : out) run_join(std::move(t), prefix, *g, local, rechecked);
    return rechecked;
  }

 private:
  static void reset_scope(SimState& s, const std::string& prefix,
                          const WorkflowGraph& g) {
    for (const ActivityDef& n : g.nodes) {
      s.states[prefix + n.id] = ActivityState::WAITING;
      if (n.subgraph) reset_scope(s, prefix + n.id + ".", *n.subgraph);
    }
    for (const TransitionDef& e : g.edges)
      s.tokens.erase(edge_key(prefix, e.from, e.to));
  }

  // Fires the split of a completed node; forks on XOR.
  void run_split(SimState s, const std::string& prefix, const WorkflowGraph& g,
                 const std::string& local, bool skip_mode,
                 std::vector<SimState>& out) const {
    const ActivityDef* n = g.node(local);
    auto outs = g.out_edges(local);
    if (outs.empty()) {
      out.push_back(std::move(s));
      return;
    }
    if (n->split == SplitKind::XOR && !skip_mode) {
      for (const TransitionDef* e : outs) {
        SimState t = s;
        ++t.tokens[edge_key(prefix, e->from, e->to)];
        run_join(std::move(t), prefix, g, e->to, out);
      }
      return;
    }
    std::vector<const TransitionDef*> fired;
    if (n->split == SplitKind::XOR) {  // skip mode: default edge
      const TransitionDef* def = nullptr;
      for (const TransitionDef* e : outs)
        if (e->is_default) def = e;
      fired = {def ? def : outs.front()};
    } else {
      fired = outs;
    }
    // place tokens one at a time so each join cascade (which may itself
    // fork) sees the marking left by the previous one
    place_chain(std::move(s), prefix, g, fired, 0, out);
  }

  void place_chain(SimState s, const std::string& prefix,
                   const WorkflowGraph& g,
                   const std::vector<const TransitionDef*>& edges, size_t i,
                   std::vector<SimState>& out) const {
    if (i == edges.size()) {
      out.push_back(std::move(s));
      return;
    }
    const TransitionDef* e = edges[i];
    ++s.tokens[edge_key(prefix, e->from, e->to)];
    std::vector<SimState> mid;
    run_join(std::move(s), prefix, g, e->to, mid);
    for (SimState& t : mid) place_chain(std::move(t), prefix, g, edges, i + 1, out);
  }

  void run_join(SimState s, const std::string& prefix, const WorkflowGraph& g,
                const std::string& local, std::vector<SimState>& out) const {
    const ActivityDef* n = g.node(local);
    std::string qid = prefix + local;
    ActivityState st = s.states.at(qid);
    if (st == ActivityState::ENABLED || st == ActivityState::STARTED) {
      out.push_back(std::move(s));
      return;
    }
    if (!join_satisfied(s, prefix, g, *n)) {
      out.push_back(std::move(s));
      return;
    }
    consume(s, prefix, g, *n);
    if (local == g.end) {
      s.states[qid] = ActivityState::COMPLETED;
      scope_completed(std::move(s), prefix, out);
      return;
    }
    if (st == ActivityState::SKIPPED) {
      run_split(std::move(s), prefix, g, local, true, out);
      return;
    }
    if (n->kind == ActivityDef::Kind::COMPOSITE) {
      s.states[qid] = ActivityState::STARTED;
      reset_scope(s, qid + ".", *n->subgraph);
      s.states[qid + "." + n->subgraph->start] = ActivityState::COMPLETED;
      run_split(std::move(s), qid + ".", *n->subgraph, n->subgraph->start,
                false, out);
      return;
    }
    s.states[qid] = ActivityState::ENABLED;
    out.push_back(std::move(s));
  }

  void scope_completed(SimState s, const std::string& prefix,
                       std::vector<SimState>& out) const {
    if (prefix.empty()) {
      out.push_back(std::move(s));
      return;
    }
    std::string comp = prefix.substr(0, prefix.size() - 1);
    auto [pp, local] = split_qid(comp);
    const WorkflowGraph* pg = scope_graph(top_, pp);
    s.states[comp] = ActivityState::COMPLETED;
    std::vector<SimState> mid;
    run_split(std::move(s), pp, *pg, local, false, mid);
    for (SimState& t : mid) run_join(std::move(t), pp, *pg, local, out);
  }

  bool join_satisfied(const SimState& s, const std::string& prefix,
                      const WorkflowGraph& g, const ActivityDef& n) const {
    auto ins = g.in_edges(n.id);
    if (ins.empty()) return false;
    if (n.join == SplitKind::AND) {
      for (const TransitionDef* e : ins)
        if (tok(s, prefix, *e) == 0) return false;
      return true;
    }
    for (const TransitionDef* e : ins)
      if (tok(s, prefix, *e) > 0) return true;
    return false;
  }

  static int tok(const SimState& s, const std::string& prefix,
                 const TransitionDef& e) {
    auto it = s.tokens.find(edge_key(prefix, e.from, e.to));
    return it == s.tokens.end() ? 0 : it->second;
  }

  void consume(SimState& s, const std::string& prefix, const WorkflowGraph& g,
               const ActivityDef& n) const {
    auto ins = g.in_edges(n.id);
    auto take = [&](const TransitionDef& e) {
      std::string k = edge_key(prefix, e.from, e.to);
      if (--s.tokens.at(k) == 0) s.tokens.erase(k);
    };
    if (n.join == SplitKind::AND) {
      for (const TransitionDef* e : ins) take(*e);
      return;
    }
    for (const TransitionDef* e : ins)
      if (tok(s, prefix, *e) > 0) {
        take(*e);
        return;
      }
  }

  const WorkflowGraph& top_;
  int k_;
};

bool search_trace(const ChoiceSim& sim, const std::vector<std::string>& trace,
                  size_t i, const SimState& s,
                  std::set<std::pair<size_t, std::string>>& seen,
                  SimState& witness) {
  if (i == trace.size()) {
    witness = s;
    return true;
  }
  if (!seen.insert({i, s.key()}).second) return false;
  if (!sim.can_complete(s, trace[i])) return false;
  for (const SimState& t : sim.complete(s, trace[i]))
    if (search_trace(sim, trace, i + 1, t, seen, witness)) return true;
  return false;
}

}  // namespace

json MigrationReport::to_json() const {
  json mapping = json::object();
  for (const auto& [qid, st] : state_mapping)
    mapping[qid] = enact::activity_state_name(st);
  return json{{"from", from.str()},
              {"item", item_id},
              {"reasons", reasons},
              {"state_mapping", std::move(mapping)},
              {"to", to.str()},
              {"verdict", valid ? "VALID" : "INVALID"}};
}

MigrationReport migration_report(const Item& item,
                                 const meta::VersionRef& target,
                                 const meta::DescriptionRepo& repo,
                                 int loop_depth) {
  if (target.name != item.described_by.name)
    throw Error(Errc::NAME_MISMATCH, "item is described by " +
                                         item.described_by.name + ", not " +
                                         target.name);
  meta::DescriptionRecord rec = repo.resolve(target);  // NOT_FOUND if absent

  MigrationReport rep;
  rep.item_id = item.id;
  rep.from = item.described_by;
  rep.to = target;

  WorkflowGraph eff;
  try {
    eff = apply_delta(rec.graph(), item.adhoc_delta);
  } catch (const Error& e) {
    rep.reasons.push_back(std::string("DELTA_CONFLICT(") + e.what() + ")");
    return rep;
  }

  for (const auto& [qid, st] : item.states) {
    if (st != ActivityState::STARTED) continue;
    auto [prefix, local] = split_qid(qid);
    const WorkflowGraph* g = scope_graph(eff, prefix);
    const ActivityDef* n = g ? g->node(local) : nullptr;
    if (!n || n->kind != ActivityDef::Kind::ELEMENTARY ||
        local == g->start || local == g->end)
      rep.reasons.push_back("STARTED_ACTIVITY_REMOVED(" + qid + ")");
  }

  // completions before the latest re-arm belong to an earlier pass of the
  // behaviour (connectors re-arm per message); only the current pass must
  // be replayable in the target graph
  std::vector<std::string> trace;
  for (const enact::Event& e : item.log) {
    if (e.kind == EventKind::ENABLE && e.detail.is_object() &&
        e.detail.value("rearm", false))
      trace.clear();
    else if (e.kind == EventKind::COMPLETE)
      trace.push_back(e.activity_id);
  }
  ChoiceSim sim(eff, loop_depth);
  SimState witness;
  bool found = false;
  std::set<std::pair<size_t, std::string>> seen;
  for (const SimState& s0 : sim.initial()) {
    if (search_trace(sim, trace, 0, s0, seen, witness)) {
      found = true;
      break;
    }
  }
  if (!found) rep.reasons.push_back("TRACE_NOT_REPLAYABLE");
  if (!rep.reasons.empty()) return rep;

  rep.valid = true;
  rep.state_mapping = witness.states;
  rep.token_mapping = witness.tokens;
  // surviving STARTED activities stay started
  for (const auto& [qid, st] : item.states)
    if (st == ActivityState::STARTED && rep.state_mapping.count(qid))
      rep.state_mapping[qid] = ActivityState::STARTED;
  return rep;
}

enact::Event migrate(Item& item, const meta::VersionRef& target,
                     const meta::DescriptionRepo& repo, int loop_depth) {
  MigrationReport rep = migration_report(item, target, repo, loop_depth);
  if (!rep.valid)
    throw Error(Errc::MIGRATION_INVALID,
                "migration of " + item.id + " to " + target.str() +
                    " is invalid",
                rep.to_json());
  meta::VersionRef from = item.described_by;
  item.described_by = target;
  item.states.clear();
  for (const auto& [qid, st] : rep.state_mapping) item.states[qid] = st;
  item.tokens.clear();
  for (const auto& [k, n] : rep.token_mapping) item.tokens[k] = n;
  WorkflowGraph eff = effective_graph(item, repo);
  Engine(item, eff).recompute_status();

  enact::Event e;
  e.seq = item.log.size() + 1;
  e.item_id = item.id;
  e.activity_id = "";
  e.kind = EventKind::MIGRATE;
  e.agent = "system";
  e.desc_version = item.described_by;
  e.detail = json{{"from", {{"name", from.name}, {"version", from.version}}},
                  {"loop_depth", loop_depth},
                  {"to", {{"name", target.name}, {"version", target.version}}}};
  item.log.push_back(e);
  return e;
}

}  // namespace ddsflow::evo
