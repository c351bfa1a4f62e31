#pragma once

#include "ddsflow/item.hpp"

namespace ddsflow::evo {

// Per-instance workflow modification, stored with the item.
// JSON forms:
//   {"op":"INSERT_AFTER","after":"A","node":{...activity...}}
//   {"op":"SKIP_ACTIVITY","id":"B"}
//   {"op":"REPLACE_GUARD","from":"A","to":"B","expr":"..."}
nlohmann::json make_insert_after(const meta::ActivityDef& def,
                                 const std::string& after);
nlohmann::json make_skip_activity(const std::string& id);
nlohmann::json make_replace_guard(const std::string& from,
                                  const std::string& to,
                                  const std::string& expr_text);

// Description graph with the item's ad-hoc delta applied in order.
meta::WorkflowGraph effective_graph(const enact::Item& item,
                                    const meta::DescriptionRepo& repo);
meta::WorkflowGraph apply_delta(const meta::WorkflowGraph& base,
                                const std::vector<nlohmann::json>& delta);

struct MigrationReport {
  std::string item_id;
  meta::VersionRef from;
  meta::VersionRef to;
  bool valid = false;
  std::vector<std::string> reasons;
  std::map<std::string, enact::ActivityState> state_mapping;
  std::map<std::string, int> token_mapping;  // marking to adopt

  nlohmann::json to_json() const;
};

inline constexpr int DEFAULT_LOOP_DEPTH = 2;

MigrationReport migration_report(const enact::Item& item,
                                 const meta::VersionRef& target,
                                 const meta::DescriptionRepo& repo,
                                 int loop_depth = DEFAULT_LOOP_DEPTH);

enact::Event migrate(enact::Item& item, const meta::VersionRef& target,
                     const meta::DescriptionRepo& repo,
                     int loop_depth = DEFAULT_LOOP_DEPTH);

enact::Event apply_adhoc(enact::Item& item, const nlohmann::json& delta_op,
                         const meta::DescriptionRepo& repo);

// State effects of one delta op, without logging; replay uses this.
void apply_adhoc_state(enact::Item& item, const nlohmann::json& delta_op,
                       const meta::DescriptionRepo& repo);

// Brute-force oracle: every completion-id sequence reachable within
// max_events, XOR choices free, loops unrolled to depth K. Exposed for
// tests; max_events is capped to keep the search bounded.
std::set<std::vector<std::string>> enumerate_executions(
    const meta::WorkflowGraph& graph, int max_events,
    int loop_depth = DEFAULT_LOOP_DEPTH);

}  // namespace ddsflow::evo
