#include "ddsflow/graph.hpp"

#include <deque>
#include <map>

#include "ddsflow/expr.hpp"

namespace ddsflow::meta {

using nlohmann::json;
using doc::Violation;

const char* split_kind_name(SplitKind k) {
  switch (k) {
    case SplitKind::NONE: return "NONE";
    case SplitKind::AND: return "AND";
    case SplitKind::XOR: return "XOR";
  }
  return "?";
}

SplitKind split_kind_from(const std::string& s) {
  if (s == "NONE") return SplitKind::NONE;
  if (s == "AND") return SplitKind::AND;
  if (s == "XOR") return SplitKind::XOR;
  throw Error(Errc::PARSE_ERROR, "unknown split/join kind " + s);
}

const ActivityDef* WorkflowGraph::node(const std::string& id) const {
  for (const ActivityDef& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

std::vector<const TransitionDef*> WorkflowGraph::out_edges(
    const std::string& id) const {
  std::vector<const TransitionDef*> out;
  for (const TransitionDef& e : edges)
    if (e.from == id) out.push_back(&e);
  return out;
}

std::vector<const TransitionDef*> WorkflowGraph::in_edges(
    const std::string& id) const {
  std::vector<const TransitionDef*> out;
  for (const TransitionDef& e : edges)
    if (e.to == id) out.push_back(&e);
  return out;
}

namespace {

void collect_ids(const WorkflowGraph& g, const std::string& prefix,
                 std::map<std::string, int>& counts) {
  for (const ActivityDef& n : g.nodes) {
    ++counts[n.id];
    if (n.subgraph) collect_ids(*n.subgraph, prefix + n.id + ".", counts);
  }
}

void validate_into(const WorkflowGraph& g, const std::string& prefix,
                   std::vector<Violation>& out) {
  auto subj = [&](const std::string& s) { return prefix + s; };
  auto edge_subj = [&](const TransitionDef& e) {
    return prefix + e.from + "->" + e.to;
  };

  std::set<std::string> ids;
  for (const ActivityDef& n : g.nodes) {
    if (!ids.insert(n.id).second)
      out.push_back({"DUPLICATE_NODE", subj(n.id)});
  }
  if (g.start.empty() || !ids.count(g.start))
    out.push_back({"MISSING_START", subj(g.start)});
  if (g.end.empty() || !ids.count(g.end))
    out.push_back({"MISSING_END", subj(g.end)});

  bool endpoints_ok = true;
  for (const TransitionDef& e : g.edges) {
    if (!ids.count(e.from) || !ids.count(e.to)) {
      out.push_back({"EDGE_ENDPOINT_MISSING", edge_subj(e)});
      endpoints_ok = false;
    }
  }
  if (!ids.count(g.start) || !ids.count(g.end) || !endpoints_ok) return;

  if (!g.in_edges(g.start).empty())
    out.push_back({"START_HAS_INCOMING", subj(g.start)});
  if (!g.out_edges(g.end).empty())
    out.push_back({"END_HAS_OUTGOING", subj(g.end)});

  // forward reachability from start
  std::set<std::string> fwd{g.start};
  std::deque<std::string> q{g.start};
  while (!q.empty()) {
    std::string cur = q.front();
    q.pop_front();
    for (const TransitionDef* e : g.out_edges(cur))
      if (fwd.insert(e->to).second) q.push_back(e->to);
  }
  // backward reachability from end
  std::set<std::string> bwd{g.end};
  q = {g.end};
  while (!q.empty()) {
    std::string cur = q.front();
    q.pop_front();
    for (const TransitionDef* e : g.in_edges(cur))
      if (bwd.insert(e->from).second) q.push_back(e->from);
  }
  for (const ActivityDef& n : g.nodes) {
    if (!fwd.count(n.id)) out.push_back({"UNREACHABLE", subj(n.id)});
    else if (!bwd.count(n.id)) out.push_back({"NO_PATH_TO_END", subj(n.id)});
  }

  for (const ActivityDef& n : g.nodes) {
    auto outs = g.out_edges(n.id);
    auto ins = g.in_edges(n.id);
    bool split_ok = n.split == SplitKind::NONE ? outs.size() <= 1
                                               : outs.size() >= 2;
    bool join_ok = n.join == SplitKind::NONE ? ins.size() <= 1
                                             : ins.size() >= 2;
    if (!split_ok) out.push_back({"SPLIT_MISMATCH", subj(n.id)});
    if (!join_ok) out.push_back({"JOIN_MISMATCH", subj(n.id)});

    if (n.split == SplitKind::XOR && split_ok) {
      int defaults = 0;
      for (const TransitionDef* e : outs) {
        if (e->is_default) {
          ++defaults;
          if (e->guard) out.push_back({"GUARD_ON_DEFAULT", edge_subj(*e)});
        } else if (!e->guard) {
          out.push_back({"MISSING_GUARD", edge_subj(*e)});
        }
      }
      if (defaults == 0) out.push_back({"NO_DEFAULT", subj(n.id)});
      if (defaults > 1) out.push_back({"MULTIPLE_DEFAULT", subj(n.id)});
    } else {
      for (const TransitionDef* e : outs) {
        if (e->guard) out.push_back({"GUARD_ON_NON_XOR", edge_subj(*e)});
        if (e->is_default) out.push_back({"DEFAULT_ON_NON_XOR", edge_subj(*e)});
      }
    }

    if (n.kind == ActivityDef::Kind::ELEMENTARY && n.subgraph)
      out.push_back({"SUBGRAPH_ON_ELEMENTARY", subj(n.id)});
    if (n.kind == ActivityDef::Kind::COMPOSITE) {
      if (n.outcome_schema) out.push_back({"SCHEMA_ON_COMPOSITE", subj(n.id)});
      if (!n.subgraph) out.push_back({"SUBGRAPH_MISSING", subj(n.id)});
      else validate_into(*n.subgraph, prefix + n.id + ".", out);
    }
  }

  for (const TransitionDef& e : g.edges) {
    if (e.guard) {
      try {
        (void)expr::parse_expr(*e.guard);
      } catch (const Error&) {
        out.push_back({"GUARD_PARSE_ERROR", edge_subj(e)});
      }
    }
  }
}

}  // namespace

std::vector<Violation> validate_graph(const WorkflowGraph& g) {
  std::vector<Violation> out;
  validate_into(g, "", out);
  // node ids must be unique across the whole nested structure so that
  // items can address activities by flat id
  std::map<std::string, int> counts;
  collect_ids(g, "", counts);
  for (const auto& [id, n] : counts)
    if (n > 1 && !std::count_if(out.begin(), out.end(), [&](const Violation& v) {
          return v.code == "DUPLICATE_NODE" && v.subject.size() >= id.size() &&
                 v.subject.compare(v.subject.size() - id.size(), id.size(),
                                   id) == 0;
        }))
      out.push_back({"DUPLICATE_NODE", id});
  return out;
}

json activity_to_json(const ActivityDef& n) {
  json j = json::object();
  j["id"] = n.id;
  j["kind"] = n.kind == ActivityDef::Kind::ELEMENTARY ? "ELEMENTARY"
                                                      : "COMPOSITE";
  j["join"] = split_kind_name(n.join);
  j["split"] = split_kind_name(n.split);
  if (!n.role.empty()) j["role"] = n.role;
  if (n.outcome_schema)
    j["schema"] = {{"name", n.outcome_schema->name},
                   {"version", n.outcome_schema->version}};
  if (n.subgraph) j["subgraph"] = graph_to_json(*n.subgraph);
  return j;
}

json graph_to_json(const WorkflowGraph& g) {
  json nodes = json::array();
  for (const ActivityDef& n : g.nodes) nodes.push_back(activity_to_json(n));
  json edges = json::array();
  for (const TransitionDef& e : g.edges) {
    json je = json::object();
    je["from"] = e.from;
    je["to"] = e.to;
    if (e.guard) je["guard"] = *e.guard;
    if (e.is_default) je["default"] = true;
    edges.push_back(std::move(je));
  }
  return json{{"edges", std::move(edges)},
              {"end", g.end},
              {"nodes", std::move(nodes)},
              {"start", g.start}};
}

ActivityDef activity_from_json(const json& j) {
  ActivityDef n;
  n.id = j.at("id").get<std::string>();
  std::string kind = j.value("kind", "ELEMENTARY");
  if (kind == "ELEMENTARY") n.kind = ActivityDef::Kind::ELEMENTARY;
  else if (kind == "COMPOSITE") n.kind = ActivityDef::Kind::COMPOSITE;
  else throw Error(Errc::PARSE_ERROR, "unknown activity kind " + kind);
  n.role = j.value("role", "");
  n.split = split_kind_from(j.value("split", "NONE"));
  n.join = split_kind_from(j.value("join", "NONE"));
  if (j.contains("schema"))
    n.outcome_schema = VersionRef{j["schema"].at("name").get<std::string>(),
                                  j["schema"].at("version").get<int>()};
  if (j.contains("subgraph"))
    n.subgraph = std::make_shared<WorkflowGraph>(graph_from_json(j["subgraph"]));
  return n;
}

WorkflowGraph graph_from_json(const json& j) {
  if (!j.is_object() || !j.contains("nodes") || !j.contains("edges"))
    throw Error(Errc::PARSE_ERROR, "graph needs nodes and edges");
  WorkflowGraph g;
  g.start = j.value("start", "");
  g.end = j.value("end", "");
  for (const json& n : j["nodes"]) g.nodes.push_back(activity_from_json(n));
  for (const json& e : j["edges"]) {
    TransitionDef t;
    t.from = e.at("from").get<std::string>();
    t.to = e.at("to").get<std::string>();
    if (e.contains("guard")) t.guard = e["guard"].get<std::string>();
    t.is_default = e.value("default", false);
    g.edges.push_back(std::move(t));
  }
  return g;
}

ChangeSet diff_graphs(const WorkflowGraph& a, const WorkflowGraph& b) {
  ChangeSet c;
  std::map<std::string, const ActivityDef*> an, bn;
  for (const ActivityDef& n : a.nodes) an[n.id] = &n;
  for (const ActivityDef& n : b.nodes) bn[n.id] = &n;
  for (const auto& [id, n] : bn)
    if (!an.count(id)) c.added_nodes.insert(id);
  for (const auto& [id, n] : an) {
    if (!bn.count(id)) {
      c.removed_nodes.insert(id);
      continue;
    }
    const ActivityDef* other = bn[id];
    if (activity_to_json(*n).dump() != activity_to_json(*other).dump())
      c.modified_nodes.insert(id);
    if (n->outcome_schema != other->outcome_schema)
      c.schema_changes.emplace_back(id, n->outcome_schema,
                                    other->outcome_schema);
  }
  std::set<std::pair<std::string, std::string>> ae, be;
  for (const TransitionDef& e : a.edges) ae.insert({e.from, e.to});
  for (const TransitionDef& e : b.edges) be.insert({e.from, e.to});
  for (const auto& e : be)
    if (!ae.count(e)) c.added_edges.insert(e);
  for (const auto& e : ae)
    if (!be.count(e)) c.removed_edges.insert(e);
  return c;
}

json changeset_to_json(const ChangeSet& c) {
  auto edges = [](const std::set<std::pair<std::string, std::string>>& s) {
    json a = json::array();
    for (const auto& [f, t] : s) a.push_back({{"from", f}, {"to", t}});
    return a;
  };
  json schema = json::array();
  for (const auto& [id, oldref, newref] : c.schema_changes) {
    json e = json::object();
    e["node"] = id;
    e["old"] = oldref ? json(oldref->str()) : json(nullptr);
    e["new"] = newref ? json(newref->str()) : json(nullptr);
    schema.push_back(std::move(e));
  }
  return json{{"added_edges", edges(c.added_edges)},
              {"added_nodes", c.added_nodes},
              {"modified_nodes", c.modified_nodes},
              {"removed_edges", edges(c.removed_edges)},
              {"removed_nodes", c.removed_nodes},
              {"schema_changes", std::move(schema)}};
}

WorkflowGraph sequence_graph(const std::vector<std::string>& activities) {
  WorkflowGraph g;
  g.start = "start";
  g.end = "end";
  g.nodes.push_back({.id = "start"});
  std::string prev = "start";
  for (const std::string& a : activities) {
    g.nodes.push_back({.id = a});
    g.edges.push_back({prev, a, std::nullopt, false});
    prev = a;
  }
  g.nodes.push_back({.id = "end"});
  g.edges.push_back({prev, "end", std::nullopt, false});
  return g;
}

}  // namespace ddsflow::meta
