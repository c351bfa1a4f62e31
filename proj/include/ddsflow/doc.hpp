#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ddsflow/error.hpp"

namespace ddsflow::doc {

// Canonical hierarchical document. Attribute values are stored as
// strings; numeric contexts coerce via the decimal grammar.
struct Node {
  std::string name;
  std::map<std::string, std::string> attrs;
  std::vector<Node> children;
  std::optional<std::string> text;

  bool operator==(const Node&) const = default;
};

using CanonicalDoc = Node;

enum class Format { CANONICAL, FLAT_RECORD };

// $root.part.part — parts[0] names the root element.
struct Path {
  std::vector<std::string> parts;
  bool operator==(const Path&) const = default;
  bool operator<(const Path& o) const { return parts < o.parts; }
  std::string str() const;
  static Path parse(const std::string& text);  // throws PARSE_ERROR
};

enum class ValueType { STRING, NUMBER, BOOLEAN, NODE };

const char* value_type_name(ValueType t);

struct Violation {
  std::string code;
  std::string subject;
  bool operator==(const Violation&) const = default;
  bool operator<(const Violation& o) const {
    return std::tie(code, subject) < std::tie(o.code, o.subject);
  }
};

struct OutcomeSchema {
  std::vector<std::pair<Path, ValueType>> required;
  bool operator==(const OutcomeSchema&) const = default;
};

// Path lookup result: scalar string, element node, or absent.
struct PathValue {
  enum class Tag { MISSING, SCALAR, ELEMENT } tag = Tag::MISSING;
  std::string scalar;
  const Node* element = nullptr;
};

PathValue lookup(const CanonicalDoc& d, const Path& p);

// Deterministic text encoding: restricted JSON subset, sorted keys,
// reserved keys name/attrs/children/text. Doubles as the byte-identity
// basis for immutability checks.
std::string serialize_doc(const CanonicalDoc& d);
CanonicalDoc parse_doc(const std::string& text, Format format);

nlohmann::json doc_to_json(const CanonicalDoc& d);
CanonicalDoc doc_from_json(const nlohmann::json& j);

std::vector<Violation> validate_outcome(const CanonicalDoc& d,
                                        const OutcomeSchema& schema);

// Decimal grammar used everywhere a string is coerced to a number.
std::optional<double> coerce_number(const std::string& s);
std::string format_number(double v);  // shortest round-trip form

OutcomeSchema schema_from_json(const nlohmann::json& j);
nlohmann::json schema_to_json(const OutcomeSchema& s);

}  // namespace ddsflow::doc
