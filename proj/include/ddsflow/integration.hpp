#pragma once

#include "ddsflow/repo.hpp"
#include "ddsflow/transport.hpp"

namespace ddsflow::eai {

// Declaration order is the evaluation order; first true guard wins.
struct RoutingRule {
  expr::ExprPtr guard;
  std::string guard_text;
  std::string target;
};

// Everything a connector is: parse format, behaviour workflow,
// transform rules, routing table, inbound binding. Serialized as the
// body of a CONNECTOR_DESC.
struct ConnectorSpec {
  bus::CommMode comm_mode = bus::CommMode::INPROC;
  doc::Format data_format = doc::Format::CANONICAL;
  meta::WorkflowGraph behaviour;
  std::vector<doc::TransformRule> transform;
  std::vector<RoutingRule> routes;
  std::string inbound_endpoint;

  nlohmann::json to_json() const;
  static ConnectorSpec from_json(const nlohmann::json& j);
};

// First rule whose guard evaluates to true; "dead-letter" when none.
// ERROR guard values count as not-true; their messages go to *errors.
std::string route(const std::vector<RoutingRule>& routes,
                  const doc::CanonicalDoc& d,
                  std::vector<std::string>* errors = nullptr);

}  // namespace ddsflow::eai
