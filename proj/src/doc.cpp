#include "ddsflow/doc.hpp"

#include <charconv>
#include <cstdio>

namespace ddsflow::doc {

using nlohmann::json;

const char* errc_names_unused = nullptr;

std::string Path::str() const {
  std::string out = "$";
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += '.';
    out += parts[i];
  }
  return out;
}

static bool ident_char(char c, bool first) {
  if (std::isalpha((unsigned char)c) || c == '_' || c == '#' || c == '-')
    return true;
  return !first && std::isdigit((unsigned char)c);
}

Path Path::parse(const std::string& text) {
  if (text.empty() || text[0] != '$')
    throw Error(Errc::PARSE_ERROR, "path must start with '$': " + text);
  Path p;
  std::string cur;
  for (size_t i = 1; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '.') {
      if (cur.empty())
        throw Error(Errc::PARSE_ERROR, "empty path segment in " + text);
      p.parts.push_back(cur);
      cur.clear();
    } else if (ident_char(text[i], cur.empty())) {
      cur += text[i];
    } else {
      throw Error(Errc::PARSE_ERROR, "bad path character in " + text);
    }
  }
  return p;
}

const char* value_type_name(ValueType t) {
  switch (t) {
    case ValueType::STRING: return "STRING";
    case ValueType::NUMBER: return "NUMBER";
    case ValueType::BOOLEAN: return "BOOLEAN";
    case ValueType::NODE: return "NODE";
  }
  return "?";
}

PathValue lookup(const CanonicalDoc& d, const Path& p) {
  if (p.parts.empty() || p.parts[0] != d.name) return {};
  const Node* cur = &d;
  for (size_t i = 1; i < p.parts.size(); ++i) {
    const std::string& part = p.parts[i];
    auto it = cur->attrs.find(part);
    if (it != cur->attrs.end()) {
      if (i + 1 != p.parts.size()) return {};  // scalars have no children
      return {PathValue::Tag::SCALAR, it->second, nullptr};
    }
    const Node* next = nullptr;
    for (const Node& c : cur->children) {
      if (c.name == part) {
        next = &c;
        break;
      }
    }
    if (!next) return {};
    cur = next;
  }
  return {PathValue::Tag::ELEMENT, "", cur};
}

json doc_to_json(const CanonicalDoc& d) {
  json j = json::object();
  j["name"] = d.name;
  if (!d.attrs.empty()) {
    json a = json::object();
    for (const auto& [k, v] : d.attrs) a[k] = v;
    j["attrs"] = std::move(a);
  }
  if (!d.children.empty()) {
    json c = json::array();
    for (const Node& ch : d.children) c.push_back(doc_to_json(ch));
    j["children"] = std::move(c);
  }
  if (d.text) j["text"] = *d.text;
  return j;
}

CanonicalDoc doc_from_json(const json& j) {
  if (!j.is_object() || !j.contains("name") || !j["name"].is_string())
    throw Error(Errc::PARSE_ERROR, "document node needs a string 'name'");
  Node n;
  n.name = j["name"].get<std::string>();
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k != "name" && k != "attrs" && k != "children" && k != "text")
      throw Error(Errc::PARSE_ERROR, "unknown document key '" + k + "'");
  }
  if (j.contains("attrs")) {
    if (!j["attrs"].is_object())
      throw Error(Errc::PARSE_ERROR, "'attrs' must be an object");
    for (auto it = j["attrs"].begin(); it != j["attrs"].end(); ++it) {
      if (!it.value().is_string())
        throw Error(Errc::PARSE_ERROR, "attribute '" + it.key() +
                                           "' must be a string scalar");
      n.attrs[it.key()] = it.value().get<std::string>();
    }
  }
  if (j.contains("children")) {
    if (!j["children"].is_array())
      throw Error(Errc::PARSE_ERROR, "'children' must be an array");
    for (const json& c : j["children"]) n.children.push_back(doc_from_json(c));
  }
  if (j.contains("text")) {
    if (!j["text"].is_string())
      throw Error(Errc::PARSE_ERROR, "'text' must be a string");
    n.text = j["text"].get<std::string>();
  }
  return n;
}

std::string serialize_doc(const CanonicalDoc& d) { return doc_to_json(d).dump(); }

static std::pair<int, int> line_col(const std::string& text, size_t byte) {
  int line = 1, col = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

static CanonicalDoc parse_flat_record(const std::string& text) {
  Node root;
  root.name = "record";
  int line = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string ln = text.substr(pos, nl == std::string::npos ? nl : nl - pos);
    ++line;
    if (!ln.empty() && ln.back() == '\r') ln.pop_back();
    if (!ln.empty()) {
      size_t eq = ln.find('=');
      if (eq == std::string::npos || eq == 0)
        throw Error(Errc::PARSE_ERROR,
                    "line " + std::to_string(line) + ": expected key=value");
      std::string key = ln.substr(0, eq);
      if (root.attrs.count(key))
        throw Error(Errc::PARSE_ERROR, "line " + std::to_string(line) +
                                           ": duplicate key '" + key + "'");
      root.attrs[key] = ln.substr(eq + 1);
    }
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return root;
}

CanonicalDoc parse_doc(const std::string& text, Format format) {
  if (format == Format::FLAT_RECORD) return parse_flat_record(text);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    // re-parse with exceptions to recover the error position
    try {
      auto ignored = json::parse(text);
      (void)ignored;
    } catch (const json::parse_error& e) {
      auto [line, col] = line_col(text, e.byte ? e.byte - 1 : 0);
      throw Error(Errc::PARSE_ERROR, "line " + std::to_string(line) +
                                         ", column " + std::to_string(col) +
                                         ": malformed document");
    }
    throw Error(Errc::PARSE_ERROR, "malformed document");
  }
  return doc_from_json(j);
}

std::optional<double> coerce_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  double out = 0;
  auto r = std::from_chars(b, e, out);
  if (r.ec != std::errc() || r.ptr != e) return std::nullopt;
  return out;
}

std::string format_number(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::vector<Violation> validate_outcome(const CanonicalDoc& d,
                                        const OutcomeSchema& schema) {
  std::vector<Violation> out;
  for (const auto& [path, type] : schema.required) {
    PathValue v = lookup(d, path);
    if (v.tag == PathValue::Tag::MISSING) {
      out.push_back({"MISSING", path.str()});
      continue;
    }
    bool ok = false;
    switch (type) {
      case ValueType::STRING:
        ok = v.tag == PathValue::Tag::SCALAR;
        break;
      case ValueType::NUMBER:
        ok = v.tag == PathValue::Tag::SCALAR && coerce_number(v.scalar);
        break;
      case ValueType::BOOLEAN:
        ok = v.tag == PathValue::Tag::SCALAR &&
             (v.scalar == "true" || v.scalar == "false");
        break;
      case ValueType::NODE:
        ok = v.tag == PathValue::Tag::ELEMENT;
        break;
    }
    if (!ok) out.push_back({"TYPE_MISMATCH", path.str()});
  }
  return out;
}

OutcomeSchema schema_from_json(const json& j) {
  if (!j.is_object() || !j.contains("required") || !j["required"].is_array())
    throw Error(Errc::PARSE_ERROR, "outcome schema needs 'required' array");
  OutcomeSchema s;
  for (const json& e : j["required"]) {
    if (!e.is_object() || !e.contains("path") || !e.contains("type"))
      throw Error(Errc::PARSE_ERROR, "schema entry needs path and type");
    Path p = Path::parse(e["path"].get<std::string>());
    std::string t = e["type"].get<std::string>();
    ValueType vt;
    if (t == "STRING") vt = ValueType::STRING;
    else if (t == "NUMBER") vt = ValueType::NUMBER;
    else if (t == "BOOLEAN") vt = ValueType::BOOLEAN;
    else if (t == "NODE") vt = ValueType::NODE;
    else throw Error(Errc::PARSE_ERROR, "unknown schema type " + t);
    for (const auto& [q, _] : s.required)
      if (q == p) throw Error(Errc::PARSE_ERROR, "duplicate path " + p.str());
    s.required.emplace_back(std::move(p), vt);
  }
  return s;
}

json schema_to_json(const OutcomeSchema& s) {
  json req = json::array();
  for (const auto& [p, t] : s.required)
    req.push_back({{"path", p.str()}, {"type", value_type_name(t)}});
  return json{{"required", std::move(req)}};
}

}  // namespace ddsflow::doc

namespace ddsflow {
const char* errc_name(Errc c) {
  switch (c) {
    case Errc::NOT_FOUND: return "NOT_FOUND";
    case Errc::DUPLICATE_ITEM: return "DUPLICATE_ITEM";
    case Errc::KIND_MISMATCH: return "KIND_MISMATCH";
    case Errc::NAME_MISMATCH: return "NAME_MISMATCH";
    case Errc::VALIDATION_FAILED: return "VALIDATION_FAILED";
    case Errc::PARSE_ERROR: return "PARSE_ERROR";
    case Errc::ILLEGAL_TRANSITION: return "ILLEGAL_TRANSITION";
    case Errc::SCHEMA_VIOLATION: return "SCHEMA_VIOLATION";
    case Errc::ROLE_MISMATCH: return "ROLE_MISMATCH";
    case Errc::GUARD_ERROR: return "GUARD_ERROR";
    case Errc::DELTA_CONFLICT: return "DELTA_CONFLICT";
    case Errc::MIGRATION_INVALID: return "MIGRATION_INVALID";
    case Errc::CORRUPT_LOG: return "CORRUPT_LOG";
    case Errc::DUPLICATE_ENDPOINT: return "DUPLICATE_ENDPOINT";
    case Errc::ENDPOINT_IN_USE: return "ENDPOINT_IN_USE";
    case Errc::IO_ERROR: return "IO_ERROR";
    case Errc::CORRUPT_ARCHIVE: return "CORRUPT_ARCHIVE";
    case Errc::BOUND_EXCEEDED: return "BOUND_EXCEEDED";
    case Errc::USAGE: return "USAGE";
  }
  return "UNKNOWN";
}
}  // namespace ddsflow
