#pragma once

#include <shared_mutex>

#include "ddsflow/graph.hpp"
#include "ddsflow/store.hpp"
#include "ddsflow/transform.hpp"

namespace ddsflow::meta {

enum class DescKind { ITEM_DESC, ACTIVITY_DESC, OUTCOME_SCHEMA, CONNECTOR_DESC };

const char* desc_kind_name(DescKind k);
DescKind desc_kind_from(const std::string& s);

// Immutable, versioned meta-object. `body` is the kind-specific payload
// kept in canonical JSON form; typed views are parsed on demand.
struct DescriptionRecord {
  VersionRef ref;
  DescKind kind;
  nlohmann::json body;
  std::optional<int> predecessor;
  uint64_t published_at = 0;  // logical clock, not wall time

  std::string serialize() const;
  static DescriptionRecord deserialize(const std::string& bytes);

  WorkflowGraph graph() const;          // ITEM_DESC / ACTIVITY_DESC
  doc::OutcomeSchema outcome_schema() const;  // OUTCOME_SCHEMA
};

inline constexpr int LATEST = -1;

// Single-writer, multi-reader description store. Publishes are
// serialized; versions per name are dense integers starting at 1.
class DescriptionRepo {
 public:
  explicit DescriptionRepo(store::Store& backing);

  VersionRef publish(DescKind kind, const std::string& name,
                     nlohmann::json body);
  DescriptionRecord resolve(const std::string& name,
                            int selector = LATEST) const;
  DescriptionRecord resolve(const VersionRef& ref) const {
    return resolve(ref.name, ref.version);
  }
  int latest(const std::string& name) const;  // 0 if unknown
  std::vector<std::string> names() const;
  DescKind kind_of(const std::string& name) const;

  ChangeSet diff(const std::string& name, int va, int vb) const;

  // Built-in meta-schema per kind, introspectable but not mutable.
  static nlohmann::json meta_schema(DescKind kind);
  // Fixed documentation records standing in for the meta-meta layer.
  static std::vector<nlohmann::json> layering_records();

  static void validate_body(DescKind kind, const nlohmann::json& body);

 private:
  store::Store& store_;
  std::map<std::string, DescKind> kinds_;
  std::map<std::string, int> latest_;
  mutable std::map<std::string, DescriptionRecord> cache_;
  uint64_t clock_ = 0;
  mutable std::shared_mutex mu_;
};

}  // namespace ddsflow::meta
