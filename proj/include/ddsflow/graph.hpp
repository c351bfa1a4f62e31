#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ddsflow/doc.hpp"

namespace ddsflow::meta {

struct VersionRef {
  std::string name;
  int version = 1;
  bool operator==(const VersionRef&) const = default;
  bool operator<(const VersionRef& o) const {
    return std::tie(name, version) < std::tie(o.name, o.version);
  }
  std::string str() const { return name + "@" + std::to_string(version); }
};

enum class SplitKind { NONE, AND, XOR };

const char* split_kind_name(SplitKind k);
SplitKind split_kind_from(const std::string& s);

struct WorkflowGraph;

struct ActivityDef {
  std::string id;
  enum class Kind { ELEMENTARY, COMPOSITE } kind = Kind::ELEMENTARY;
  std::optional<VersionRef> outcome_schema;   // ELEMENTARY only
  std::shared_ptr<WorkflowGraph> subgraph;    // COMPOSITE only
  std::string role;                           // empty = any agent
  SplitKind split = SplitKind::NONE;
  SplitKind join = SplitKind::NONE;
};

struct TransitionDef {
  std::string from;
  std::string to;
  std::optional<std::string> guard;  // expression text
  bool is_default = false;
};

// Edge order is significant: XOR guards are evaluated in declared order.
struct WorkflowGraph {
  std::vector<ActivityDef> nodes;
  std::vector<TransitionDef> edges;
  std::string start;
  std::string end;

  const ActivityDef* node(const std::string& id) const;
  std::vector<const TransitionDef*> out_edges(const std::string& id) const;
  std::vector<const TransitionDef*> in_edges(const std::string& id) const;
};

std::vector<doc::Violation> validate_graph(const WorkflowGraph& g);

struct ChangeSet {
  std::set<std::string> added_nodes, removed_nodes, modified_nodes;
  std::set<std::pair<std::string, std::string>> added_edges, removed_edges;
  std::vector<std::tuple<std::string, std::optional<VersionRef>,
                         std::optional<VersionRef>>>
      schema_changes;
  bool empty() const {
    return added_nodes.empty() && removed_nodes.empty() &&
           modified_nodes.empty() && added_edges.empty() &&
           removed_edges.empty() && schema_changes.empty();
  }
};

ChangeSet diff_graphs(const WorkflowGraph& a, const WorkflowGraph& b);
nlohmann::json changeset_to_json(const ChangeSet& c);

nlohmann::json graph_to_json(const WorkflowGraph& g);
WorkflowGraph graph_from_json(const nlohmann::json& j);
nlohmann::json activity_to_json(const ActivityDef& n);
ActivityDef activity_from_json(const nlohmann::json& j);

// Convenience builders used all over the tests.
WorkflowGraph sequence_graph(const std::vector<std::string>& activities);

}  // namespace ddsflow::meta
