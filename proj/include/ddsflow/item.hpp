#pragma once

#include "ddsflow/repo.hpp"

namespace ddsflow::enact {

enum class ActivityState { WAITING, ENABLED, STARTED, COMPLETED, SKIPPED };
enum class ItemStatus { ACTIVE, COMPLETED, ABORTED };
enum class EventKind { ENABLE, START, COMPLETE, SKIP, MIGRATE, ADHOC };

const char* activity_state_name(ActivityState s);
const char* item_status_name(ItemStatus s);
const char* event_kind_name(EventKind k);
EventKind event_kind_from(const std::string& s);

struct Event {
  uint64_t seq = 0;
  std::string item_id;
  std::string activity_id;  // qualified id ("comp.inner" inside composites)
  EventKind kind;
  std::string agent;
  std::optional<doc::CanonicalDoc> outcome;
  meta::VersionRef desc_version;        // description in force when fired
  nlohmann::json detail;                // MIGRATE/ADHOC payload

  std::string serialize() const;
  static Event deserialize(const std::string& bytes);
};

// Base-level instance. Activity states are keyed by qualified node id;
// tokens are edge markings keyed "<scope><from>><to>".
struct Item {
  std::string id;
  meta::VersionRef described_by;
  std::vector<nlohmann::json> adhoc_delta;
  std::map<std::string, ActivityState> states;
  std::map<std::string, int> tokens;
  ItemStatus status = ItemStatus::ACTIVE;
  std::vector<Event> log;

  // serialized state used for byte-identity checks; excludes the log
  std::string state_bytes() const;
  nlohmann::json state_json() const;
};

Item instantiate(const std::string& item_id, const meta::VersionRef& desc,
                 const meta::DescriptionRepo& repo);

std::vector<std::string> enabled(const Item& item);

Event fire(Item& item, const meta::DescriptionRepo& repo,
           const std::string& activity_id, EventKind kind,
           const std::string& agent,
           const std::optional<doc::CanonicalDoc>& outcome = std::nullopt);

// Re-arm a completed item back to its initial marking, logging the
// resulting ENABLE events (the same shape instantiate produces).
// Connectors use this between messages.
std::vector<Event> rearm(Item& item, const meta::DescriptionRepo& repo);

Item replay(const std::vector<Event>& log, const meta::DescriptionRepo& repo);

// Completed elementary activity ids, in log order.
std::vector<std::string> trace_of(const Item& item);

}  // namespace ddsflow::enact
