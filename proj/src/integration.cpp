#include "ddsflow/integration.hpp"

namespace ddsflow::eai {

using nlohmann::json;

json ConnectorSpec::to_json() const {
  json routes_j = json::array();
  for (const RoutingRule& r : routes)
    routes_j.push_back({{"guard", r.guard_text}, {"target", r.target}});
  json transform_j = json::array();
  for (const doc::TransformRule& t : transform)
    transform_j.push_back(doc::transform_rule_to_json(t));
  return json{{"behaviour", meta::graph_to_json(behaviour)},
              {"comm_mode", bus::comm_mode_name(comm_mode)},
              {"data_format",
               data_format == doc::Format::CANONICAL ? "CANONICAL"
                                                     : "FLAT_RECORD"},
              {"inbound_endpoint", inbound_endpoint},
              {"routes", routes_j},
              {"transform", transform_j}};
}

ConnectorSpec ConnectorSpec::from_json(const json& j) {
  try {
    ConnectorSpec s;
    s.comm_mode = bus::comm_mode_from(j.at("comm_mode").get<std::string>());
    std::string fmt = j.at("data_format").get<std::string>();
    if (fmt == "CANONICAL")
      s.data_format = doc::Format::CANONICAL;
    else if (fmt == "FLAT_RECORD")
      s.data_format = doc::Format::FLAT_RECORD;
    else
      throw Error(Errc::PARSE_ERROR, "bad data_format " + fmt);
    s.behaviour = meta::graph_from_json(j.at("behaviour"));
    for (const json& t : j.at("transform"))
      s.transform.push_back(doc::transform_rule_from_json(t));
    for (const json& r : j.at("routes")) {
      RoutingRule rule;
      rule.guard_text = r.at("guard").get<std::string>();
      rule.guard = expr::parse_expr(rule.guard_text);
      rule.target = r.at("target").get<std::string>();
      s.routes.push_back(std::move(rule));
    }
    s.inbound_endpoint = j.at("inbound_endpoint").get<std::string>();
    return s;
  } catch (const json::exception& e) {
    throw Error(Errc::PARSE_ERROR, std::string("bad connector spec: ") + e.what());
  }
}

std::string route(const std::vector<RoutingRule>& routes,
                  const doc::CanonicalDoc& d,
                  std::vector<std::string>* errors) {
  for (const RoutingRule& r : routes) {
    expr::Value v = expr::eval_expr(r.guard, d);
    if (v.is_true()) return r.target;
    if (v.is_error() && errors)
      errors->push_back(r.guard_text + ": " + v.str);
  }
  return bus::DEAD_LETTER;
}

}  // namespace ddsflow::eai
