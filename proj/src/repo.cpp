#include "ddsflow/repo.hpp"

#include "ddsflow/expr.hpp"

namespace ddsflow::meta {

using nlohmann::json;

const char* desc_kind_name(DescKind k) {
  switch (k) {
    case DescKind::ITEM_DESC: return "ITEM_DESC";
    case DescKind::ACTIVITY_DESC: return "ACTIVITY_DESC";
    case DescKind::OUTCOME_SCHEMA: return "OUTCOME_SCHEMA";
    case DescKind::CONNECTOR_DESC: return "CONNECTOR_DESC";
  }
  return "?";
}

DescKind desc_kind_from(const std::string& s) {
  if (s == "ITEM_DESC") return DescKind::ITEM_DESC;
  if (s == "ACTIVITY_DESC") return DescKind::ACTIVITY_DESC;
  if (s == "OUTCOME_SCHEMA") return DescKind::OUTCOME_SCHEMA;
  if (s == "CONNECTOR_DESC") return DescKind::CONNECTOR_DESC;
  throw Error(Errc::PARSE_ERROR, "unknown description kind " + s);
}

std::string DescriptionRecord::serialize() const {
  json j = json::object();
  j["body"] = body;
  j["kind"] = desc_kind_name(kind);
  j["name"] = ref.name;
  if (predecessor) j["predecessor"] = *predecessor;
  j["published_at"] = published_at;
  j["version"] = ref.version;
  return j.dump();
}

DescriptionRecord DescriptionRecord::deserialize(const std::string& bytes) {
  json j = json::parse(bytes);
  DescriptionRecord r;
  r.ref = {j.at("name").get<std::string>(), j.at("version").get<int>()};
  r.kind = desc_kind_from(j.at("kind").get<std::string>());
  r.body = j.at("body");
  if (j.contains("predecessor")) r.predecessor = j["predecessor"].get<int>();
  r.published_at = j.at("published_at").get<uint64_t>();
  return r;
}

WorkflowGraph DescriptionRecord::graph() const {
  if (kind == DescKind::ITEM_DESC || kind == DescKind::ACTIVITY_DESC)
    return graph_from_json(body);
  if (kind == DescKind::CONNECTOR_DESC)
    return graph_from_json(body.at("behaviour"));
  throw Error(Errc::KIND_MISMATCH, ref.str() + " carries no workflow graph");
}

doc::OutcomeSchema DescriptionRecord::outcome_schema() const {
  if (kind != DescKind::OUTCOME_SCHEMA)
    throw Error(Errc::KIND_MISMATCH, ref.str() + " is not an outcome schema");
  return doc::schema_from_json(body);
}

DescriptionRepo::DescriptionRepo(store::Store& backing) : store_(backing) {
  for (const std::string& key : store_.index_keys("desc/")) {
    // key = desc/<name>/<version>
    auto records = store_.read_all(key);
    if (records.empty()) continue;
    DescriptionRecord r = DescriptionRecord::deserialize(records.front());
    kinds_[r.ref.name] = r.kind;
    latest_[r.ref.name] = std::max(latest_[r.ref.name], r.ref.version);
    clock_ = std::max(clock_, r.published_at);
  }
}

void DescriptionRepo::validate_body(DescKind kind, const json& body) {
  auto fail = [](const std::string& why, json detail = nullptr) {
    throw Error(Errc::VALIDATION_FAILED, why, std::move(detail));
  };
  switch (kind) {
    case DescKind::ITEM_DESC:
    case DescKind::ACTIVITY_DESC: {
      WorkflowGraph g = graph_from_json(body);
      auto violations = validate_graph(g);
      if (!violations.empty()) {
        json detail = json::array();
        for (const auto& v : violations)
          detail.push_back({{"code", v.code}, {"subject", v.subject}});
        fail("workflow graph is not well-formed", detail);
      }
      break;
    }
    case DescKind::OUTCOME_SCHEMA:
      (void)doc::schema_from_json(body);
      break;
    case DescKind::CONNECTOR_DESC: {
      for (const char* k : {"behaviour", "comm_mode", "data_format",
                            "inbound_endpoint", "routes", "transform"})
        if (!body.contains(k)) fail(std::string("connector spec missing ") + k);
      std::string mode = body["comm_mode"].get<std::string>();
      if (mode != "INPROC" && mode != "FILE") fail("bad comm_mode " + mode);
      std::string fmt = body["data_format"].get<std::string>();
      if (fmt != "CANONICAL" && fmt != "FLAT_RECORD")
        fail("bad data_format " + fmt);
      WorkflowGraph g = graph_from_json(body["behaviour"]);
      auto violations = validate_graph(g);
      if (!violations.empty()) fail("connector behaviour graph invalid");
      for (const json& r : body["routes"]) {
        (void)expr::parse_expr(r.at("guard").get<std::string>());
        if (!r.contains("target")) fail("route missing target");
      }
      for (const json& t : body["transform"])
        (void)doc::transform_rule_from_json(t);
      break;
    }
  }
}

VersionRef DescriptionRepo::publish(DescKind kind, const std::string& name,
                                    json body) {
  if (name.empty() || name.find('/') != std::string::npos)
    throw Error(Errc::VALIDATION_FAILED, "bad description name '" + name + "'");
  validate_body(kind, body);
  std::unique_lock lock(mu_);
  auto kit = kinds_.find(name);
  if (kit != kinds_.end() && kit->second != kind)
    throw Error(Errc::KIND_MISMATCH,
                name + " already published as " + desc_kind_name(kit->second));
  int version = latest_[name] + 1;
  DescriptionRecord rec;
  rec.ref = {name, version};
  rec.kind = kind;
  rec.body = std::move(body);
  if (version > 1) rec.predecessor = version - 1;
  rec.published_at = ++clock_;

  std::string key = "desc/" + name + "/" + std::to_string(version);
  store_.append(key, rec.serialize());
  store_.put_index(key, key + ".rec");
  kinds_[name] = kind;
  latest_[name] = version;
  cache_[key] = rec;
  return rec.ref;
}

DescriptionRecord DescriptionRepo::resolve(const std::string& name,
                                           int selector) const {
  std::shared_lock lock(mu_);
  auto lit = latest_.find(name);
  if (lit == latest_.end() || lit->second == 0)
    throw Error(Errc::NOT_FOUND, "no description named " + name);
  int version = selector == LATEST ? lit->second : selector;
  if (version < 1 || version > lit->second)
    throw Error(Errc::NOT_FOUND,
                name + "@" + std::to_string(version) + " does not exist");
  std::string key = "desc/" + name + "/" + std::to_string(version);
  auto cit = cache_.find(key);
  if (cit != cache_.end()) return cit->second;
  auto records = store_.read_all(key);
  if (records.empty())
    throw Error(Errc::NOT_FOUND, "missing record for " + key);
  DescriptionRecord rec = DescriptionRecord::deserialize(records.front());
  cache_[key] = rec;
  return rec;
}

int DescriptionRepo::latest(const std::string& name) const {
  std::shared_lock lock(mu_);
  auto it = latest_.find(name);
  return it == latest_.end() ? 0 : it->second;
}

std::vector<std::string> DescriptionRepo::names() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [n, v] : latest_) out.push_back(n);
  return out;
}

DescKind DescriptionRepo::kind_of(const std::string& name) const {
  std::shared_lock lock(mu_);
  auto it = kinds_.find(name);
  if (it == kinds_.end())
    throw Error(Errc::NOT_FOUND, "no description named " + name);
  return it->second;
}

ChangeSet DescriptionRepo::diff(const std::string& name, int va, int vb) const {
  DescriptionRecord a = resolve(name, va);
  DescriptionRecord b = resolve(name, vb);
  if (a.kind == DescKind::OUTCOME_SCHEMA)
    throw Error(Errc::KIND_MISMATCH, name + " is not a graph-bearing kind");
  return diff_graphs(a.graph(), b.graph());
}

json DescriptionRepo::meta_schema(DescKind kind) {
  switch (kind) {
    case DescKind::ITEM_DESC:
    case DescKind::ACTIVITY_DESC:
      return json{{"kind", desc_kind_name(kind)},
                  {"body", "workflow graph"},
                  {"required", {"nodes", "edges", "start", "end"}},
                  {"rules",
                   {"single start and end", "all nodes reachable from start",
                    "end reachable from all nodes",
                    "split/join kinds match degrees",
                    "XOR splits carry ordered guards and one default"}}};
    case DescKind::OUTCOME_SCHEMA:
      return json{{"kind", "OUTCOME_SCHEMA"},
                  {"body", "required (path, type) pairs"},
                  {"required", {"required"}},
                  {"types", {"STRING", "NUMBER", "BOOLEAN", "NODE"}}};
    case DescKind::CONNECTOR_DESC:
      return json{{"kind", "CONNECTOR_DESC"},
                  {"body", "connector spec"},
                  {"required",
                   {"behaviour", "comm_mode", "data_format", "inbound_endpoint",
                    "routes", "transform"}}};
  }
  return nullptr;
}

std::vector<json> DescriptionRepo::layering_records() {
  // The layer above the kind meta-schemas is fixed; these records
  // document it and are not user-mutable.
  return {
      json{{"layer", "meta-meta"},
           {"defines", "the four description kinds and their meta-schemas"}},
      json{{"layer", "meta"},
           {"defines", "published description records (versioned meta-objects)"}},
      json{{"layer", "base"},
           {"defines", "items enacting the descriptions they reference"}},
  };
}

}  // namespace ddsflow::meta
