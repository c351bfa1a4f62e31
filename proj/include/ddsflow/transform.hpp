#pragma once

#include "ddsflow/expr.hpp"

namespace ddsflow::doc {

// A stateless mapping from a source document into a fresh output
// document. Rules read the source only, never prior outputs.
struct TransformRule {
  Path target_path;
  expr::ExprPtr rule;
  std::string rule_text;  // printed form, for serialization
};

struct TransformError {
  size_t rule_index;
  std::string detail;
};

struct TransformResult {
  CanonicalDoc output;
  std::vector<TransformError> errors;
};

TransformResult apply_transform(const std::vector<TransformRule>& rules,
                                const CanonicalDoc& source);

TransformRule transform_rule_from_json(const nlohmann::json& j);
nlohmann::json transform_rule_to_json(const TransformRule& r);

}  // namespace ddsflow::doc
