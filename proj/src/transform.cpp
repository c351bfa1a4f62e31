#include "ddsflow/transform.hpp"

namespace ddsflow::doc {

using expr::Value;

static void write_path(CanonicalDoc& out, const Path& p, const std::string& v) {
  // p.parts[0] is the output root; intermediate parts are child
  // elements, the final part becomes an attribute.
  Node* cur = &out;
  for (size_t i = 1; i + 1 < p.parts.size(); ++i) {
    Node* next = nullptr;
    for (Node& c : cur->children)
      if (c.name == p.parts[i]) { next = &c; break; }
    if (!next) {
      cur->children.push_back(Node{p.parts[i], {}, {}, std::nullopt});
      next = &cur->children.back();
    }
    cur = next;
  }
  cur->attrs[p.parts.back()] = v;
}

TransformResult apply_transform(const std::vector<TransformRule>& rules,
                                const CanonicalDoc& source) {
  TransformResult res;
  res.output.name = rules.empty() ? "out" : rules[0].target_path.parts[0];
  for (size_t i = 0; i < rules.size(); ++i) {
    const TransformRule& r = rules[i];
    if (r.target_path.parts.size() < 2 ||
        r.target_path.parts[0] != res.output.name) {
      res.errors.push_back({i, "bad target path " + r.target_path.str()});
      continue;
    }
    Value v = expr::eval_expr(r.rule, source);
    if (v.is_error()) {
      res.errors.push_back({i, v.str});
      continue;
    }
    std::string text;
    switch (v.tag) {
      case Value::Tag::STR: text = v.str; break;
      case Value::Tag::NUM: text = format_number(v.num); break;
      case Value::Tag::BOOL: text = v.boolean ? "true" : "false"; break;
      default: break;
    }
    write_path(res.output, r.target_path, text);
  }
  return res;
}

TransformRule transform_rule_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("path") || !j.contains("expr"))
    throw Error(Errc::PARSE_ERROR, "transform rule needs path and expr");
  TransformRule r;
  r.target_path = Path::parse(j["path"].get<std::string>());
  r.rule_text = j["expr"].get<std::string>();
  r.rule = expr::parse_expr(r.rule_text);
  return r;
}

nlohmann::json transform_rule_to_json(const TransformRule& r) {
  return {{"expr", r.rule_text}, {"path", r.target_path.str()}};
}

}  // namespace ddsflow::doc
