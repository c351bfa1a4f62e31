#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <queue>

#include "support.hpp"

using namespace ddsflow;
using namespace support;
using meta::ActivityDef;
using meta::SplitKind;
using meta::WorkflowGraph;

static bool has_code(const std::vector<doc::Violation>& vs,
                     const std::string& code) {
  for (auto& v : vs)
    if (v.code == code) return true;
  return false;
}

// Brute-force well-formedness check, written independently of the
// validator: explicit BFS both ways plus literal degree counting.
static bool ref_graph_ok(const WorkflowGraph& g) {
  std::map<std::string, int> seen;
  for (auto& n : g.nodes) ++seen[n.id];
  for (auto& [id, c] : seen)
    if (c > 1) return false;
  if (!seen.count(g.start) || !seen.count(g.end)) return false;
  for (auto& e : g.edges)
    if (!seen.count(e.from) || !seen.count(e.to)) return false;

  std::map<std::string, int> ins, outs;
  for (auto& e : g.edges) ++outs[e.from], ++ins[e.to];
  if (ins[g.start] > 0 || outs[g.end] > 0) return false;

  for (auto& n : g.nodes) {
    bool split_many = n.split != SplitKind::NONE;
    if (split_many != (outs[n.id] >= 2)) return false;
    bool join_many = n.join != SplitKind::NONE;
    if (join_many != (ins[n.id] >= 2)) return false;
    if (n.kind == ActivityDef::Kind::ELEMENTARY && n.subgraph) return false;
    if (n.kind == ActivityDef::Kind::COMPOSITE &&
        (!n.subgraph || n.outcome_schema))
      return false;
    if (n.split == SplitKind::XOR) {
      int defaults = 0;
      for (auto& e : g.edges)
        if (e.from == n.id) {
          if (e.is_default) {
            ++defaults;
            if (e.guard) return false;
          } else if (!e.guard) {
            return false;
          } else {
            try {
              expr::parse_expr(*e.guard);
            } catch (const Error&) {
              return false;
            }
          }
        }
      if (defaults != 1) return false;
    } else {
      for (auto& e : g.edges)
        if (e.from == n.id && (e.guard || e.is_default)) return false;
    }
  }

  auto bfs = [&](const std::string& from, bool forward) {
    std::set<std::string> hit{from};
    std::queue<std::string> q;
    q.push(from);
    while (!q.empty()) {
      std::string cur = q.front();
      q.pop();
      for (auto& e : g.edges) {
        const std::string& next = forward ? e.to : e.from;
        if ((forward ? e.from : e.to) == cur && hit.insert(next).second)
          q.push(next);
      }
    }
    return hit;
  };
  auto fwd = bfs(g.start, true), back = bfs(g.end, false);
  for (auto& n : g.nodes) {
    if (!fwd.count(n.id) || !back.count(n.id)) return false;
    if (n.subgraph && !ref_graph_ok(*n.subgraph)) return false;
  }
  return true;
}

// Messy graphs: mostly broken, for validator-vs-checker agreement.
static WorkflowGraph sloppy_graph(Rng& rng) {
  WorkflowGraph g;
  int n = 2 + (int)(rng() % 8);
  for (int i = 0; i < n; ++i) {
    ActivityDef a{.id = std::string(1, (char)('a' + (int)(rng() % n)))};
    a.split = (SplitKind)(rng() % 3);
    a.join = (SplitKind)(rng() % 3);
    g.nodes.push_back(a);
  }
  g.start = g.nodes.front().id;
  g.end = g.nodes.back().id;
  int edges = (int)(rng() % (2 * n));
  for (int i = 0; i < edges; ++i) {
    meta::TransitionDef e;
    e.from = g.nodes[rng() % g.nodes.size()].id;
    e.to = g.nodes[rng() % g.nodes.size()].id;
    if (rng() % 4 == 0) e.guard = "$o.pick == \"x\"";
    if (rng() % 5 == 0) e.is_default = true;
    g.edges.push_back(e);
  }
  return g;
}

TEST_CASE("validate_graph basics") {
  CHECK(meta::validate_graph(meta::sequence_graph({"A"})).empty());

  WorkflowGraph g = meta::sequence_graph({"A"});
  g.nodes.push_back({.id = "B"});  // floating node
  auto vs = meta::validate_graph(g);
  CHECK(has_code(vs, "UNREACHABLE"));

  WorkflowGraph x = meta::sequence_graph({"S"});
  x.nodes.push_back({.id = "L"});
  x.nodes.push_back({.id = "R"});
  x.nodes.push_back({.id = "J"});
  auto& split = *const_cast<ActivityDef*>(x.node("S"));
  split.split = SplitKind::XOR;
  auto& join = *const_cast<ActivityDef*>(x.node("J"));
  join.join = SplitKind::XOR;
  // two guarded edges, no default
  x.edges.pop_back();  // S -> end
  x.edges.push_back({"S", "L", "$o.k == \"l\"", false});
  x.edges.push_back({"S", "R", "$o.k == \"r\"", false});
  x.edges.push_back({"L", "J", std::nullopt, false});
  x.edges.push_back({"R", "J", std::nullopt, false});
  x.edges.push_back({"J", "end", std::nullopt, false});
  CHECK(has_code(meta::validate_graph(x), "NO_DEFAULT"));
  x.edges[2].guard.reset();
  x.edges[2].is_default = true;
  CHECK(meta::validate_graph(x).empty());
}

TEST_CASE("fuzz: validator agrees with the brute-force checker") {
  Rng rng(31);
  int valid_seen = 0;
  for (int i = 0; i < 500; ++i) {
    WorkflowGraph g = (i % 3 == 0) ? random_graph(rng, 8) : sloppy_graph(rng);
    bool ok = meta::validate_graph(g).empty();
    CAPTURE(meta::graph_to_json(g).dump());
    CHECK(ok == ref_graph_ok(g));
    valid_seen += ok;
  }
  CHECK(valid_seen > 100);  // the generator really exercises both sides
}

TEST_CASE("publish versions densely and immutably") {
  TempDir tmp;
  store::Store st(tmp.path);
  meta::DescriptionRepo repo(st);

  auto v1 = repo.publish(meta::DescKind::ITEM_DESC, "PartDescription",
                         meta::graph_to_json(meta::sequence_graph({"A", "B"})));
  CHECK(v1.version == 1);
  std::string v1_bytes = repo.resolve(v1).serialize();

  auto v2 = repo.publish(meta::DescKind::ITEM_DESC, "PartDescription",
                         meta::graph_to_json(meta::sequence_graph({"A", "C", "B"})));
  CHECK(v2.version == 2);
  CHECK(repo.latest("PartDescription") == 2);
  CHECK(repo.resolve("PartDescription", meta::LATEST).ref == v2);
  CHECK(repo.resolve("PartDescription", 1).serialize() == v1_bytes);
  CHECK(repo.resolve(v1).graph().node("C") == nullptr);
  CHECK(repo.resolve(v2).graph().node("C") != nullptr);

  WorkflowGraph bad = meta::sequence_graph({"A"});
  bad.nodes.push_back({.id = "X"});
  CHECK_THROWS_AS(repo.publish(meta::DescKind::ITEM_DESC, "Broken",
                               meta::graph_to_json(bad)),
                  Error);
  try {
    repo.publish(meta::DescKind::ITEM_DESC, "Broken", meta::graph_to_json(bad));
  } catch (const Error& e) {
    CHECK(e.code() == Errc::VALIDATION_FAILED);
  }

  try {
    repo.publish(meta::DescKind::OUTCOME_SCHEMA, "PartDescription",
                 nlohmann::json{{"required", nlohmann::json::array()}});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::KIND_MISMATCH);
  }

  try {
    repo.resolve("NoSuch", 1);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NOT_FOUND);
  }
  CHECK_THROWS_AS(repo.resolve("PartDescription", 3), Error);
}

TEST_CASE("immutability survives interleaved publishes") {
  TempDir tmp;
  store::Store st(tmp.path);
  meta::DescriptionRepo repo(st);
  Rng rng(5);
  auto ref = repo.publish(meta::DescKind::ITEM_DESC, "Anchor",
                          meta::graph_to_json(random_graph(rng, 6)));
  std::string bytes = repo.resolve(ref).serialize();
  for (int i = 0; i < 20; ++i) {
    std::string name = i % 2 ? "Anchor" : "Other" + std::to_string(i);
    repo.publish(meta::DescKind::ITEM_DESC, name,
                 meta::graph_to_json(random_graph(rng, 6)));
    CHECK(repo.resolve(ref).serialize() == bytes);
  }
  for (int v = 1; v <= repo.latest("Anchor"); ++v)
    CHECK(repo.resolve("Anchor", v).ref.version == v);  // dense
}

TEST_CASE("diff matches the hand-computed change set") {
  TempDir tmp;
  store::Store st(tmp.path);
  meta::DescriptionRepo repo(st);
  repo.publish(meta::DescKind::ITEM_DESC, "D",
               meta::graph_to_json(meta::sequence_graph({"A", "B"})));
  repo.publish(meta::DescKind::ITEM_DESC, "D",
               meta::graph_to_json(meta::sequence_graph({"A", "C", "B"})));

  CHECK(repo.diff("D", 1, 1).empty());

  meta::ChangeSet c = repo.diff("D", 1, 2);
  CHECK(c.added_nodes == std::set<std::string>{"C"});
  CHECK(c.removed_nodes.empty());
  CHECK(c.removed_edges ==
        std::set<std::pair<std::string, std::string>>{{"A", "B"}});
  CHECK(c.added_edges == std::set<std::pair<std::string, std::string>>{
                             {"A", "C"}, {"C", "B"}});
}

TEST_CASE("fuzz: diff antisymmetry") {
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    WorkflowGraph a = random_graph(rng, 8);
    WorkflowGraph b = mutate_graph(a, rng);
    meta::ChangeSet ab = meta::diff_graphs(a, b);
    meta::ChangeSet ba = meta::diff_graphs(b, a);
    CHECK(ab.added_nodes == ba.removed_nodes);
    CHECK(ab.removed_nodes == ba.added_nodes);
    CHECK(ab.added_edges == ba.removed_edges);
    CHECK(ab.removed_edges == ba.added_edges);
    CHECK(ab.modified_nodes == ba.modified_nodes);
    CHECK(meta::diff_graphs(a, a).empty());
  }
}
