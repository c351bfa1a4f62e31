#include "ddsflow/item.hpp"

#include <deque>

#include "engine.hpp"

namespace ddsflow::enact {

using engine_detail::Engine;
using engine_detail::scope_graph;
using engine_detail::split_qid;
using meta::ActivityDef;
using meta::WorkflowGraph;
using nlohmann::json;

const char* activity_state_name(ActivityState s) {
  switch (s) {
    case ActivityState::WAITING: return "WAITING";
    case ActivityState::ENABLED: return "ENABLED";
    case ActivityState::STARTED: return "STARTED";
    case ActivityState::COMPLETED: return "COMPLETED";
    case ActivityState::SKIPPED: return "SKIPPED";
  }
  return "?";
}

const char* item_status_name(ItemStatus s) {
  switch (s) {
    case ItemStatus::ACTIVE: return "ACTIVE";
    case ItemStatus::COMPLETED: return "COMPLETED";
    case ItemStatus::ABORTED: return "ABORTED";
  }
  return "?";
}

const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::ENABLE: return "ENABLE";
    case EventKind::START: return "START";
    case EventKind::COMPLETE: return "COMPLETE";
    case EventKind::SKIP: return "SKIP";
    case EventKind::MIGRATE: return "MIGRATE";
    case EventKind::ADHOC: return "ADHOC";
  }
  return "?";
}

EventKind event_kind_from(const std::string& s) {
  if (s == "ENABLE") return EventKind::ENABLE;
  if (s == "START") return EventKind::START;
  if (s == "COMPLETE") return EventKind::COMPLETE;
  if (s == "SKIP") return EventKind::SKIP;
  if (s == "MIGRATE") return EventKind::MIGRATE;
  if (s == "ADHOC") return EventKind::ADHOC;
  throw Error(Errc::PARSE_ERROR, "unknown event kind " + s);
}

std::string Event::serialize() const {
  json j = json::object();
  j["activity"] = activity_id;
  j["agent"] = agent;
  j["desc"] = {{"name", desc_version.name}, {"version", desc_version.version}};
  if (!detail.is_null()) j["detail"] = detail;
  j["item"] = item_id;
  j["kind"] = event_kind_name(kind);
  if (outcome) j["outcome"] = doc::doc_to_json(*outcome);
  j["seq"] = seq;
  return j.dump();
}

Event Event::deserialize(const std::string& bytes) {
  json j = json::parse(bytes);
  Event e;
  e.seq = j.at("seq").get<uint64_t>();
  e.item_id = j.at("item").get<std::string>();
  e.activity_id = j.at("activity").get<std::string>();
  e.kind = event_kind_from(j.at("kind").get<std::string>());
  e.agent = j.at("agent").get<std::string>();
  e.desc_version = {j.at("desc").at("name").get<std::string>(),
                    j.at("desc").at("version").get<int>()};
  if (j.contains("detail")) e.detail = j["detail"];
  if (j.contains("outcome")) e.outcome = doc::doc_from_json(j["outcome"]);
  return e;
}

json Item::state_json() const {
  json states_j = json::object();
  for (const auto& [qid, st] : states) states_j[qid] = activity_state_name(st);
  json tokens_j = json::object();
  for (const auto& [k, n] : tokens) tokens_j[k] = n;
  json delta_j = json::array();
  for (const json& d : adhoc_delta) delta_j.push_back(d);
  return json{{"delta", std::move(delta_j)},
              {"described_by",
               {{"name", described_by.name}, {"version", described_by.version}}},
              {"id", id},
              {"last_seq", log.empty() ? 0 : log.back().seq},
              {"states", std::move(states_j)},
              {"status", item_status_name(status)},
              {"tokens", std::move(tokens_j)}};
}

std::string Item::state_bytes() const { return state_json().dump(); }

namespace {

struct StateSnapshot {
  std::map<std::string, ActivityState> states;
  std::map<std::string, int> tokens;
  ItemStatus status;

  static StateSnapshot of(const Item& item) {
    return {item.states, item.tokens, item.status};
  }
  void restore(Item& item) const {
    item.states = states;
    item.tokens = tokens;
    item.status = status;
  }
};

Event append_event(Item& item, const std::string& activity, EventKind kind,
                   const std::string& agent,
                   std::optional<doc::CanonicalDoc> outcome = std::nullopt,
                   json detail = nullptr) {
  Event e;
  e.seq = item.log.size() + 1;
  e.item_id = item.id;
  e.activity_id = activity;
  e.kind = kind;
  e.agent = agent;
  e.outcome = std::move(outcome);
  e.desc_version = item.described_by;
  e.detail = std::move(detail);
  item.log.push_back(e);
  return e;
}

doc::OutcomeSchema schema_in_force(const ActivityDef& def,
                                   const meta::DescriptionRepo& repo) {
  if (!def.outcome_schema) return {};
  return repo.resolve(*def.outcome_schema).outcome_schema();
}

const ActivityDef* find_def(const WorkflowGraph& top, const std::string& qid) {
  auto [prefix, local] = split_qid(qid);
  const WorkflowGraph* g = scope_graph(top, prefix);
  return g ? g->node(local) : nullptr;
}

bool is_boundary(const WorkflowGraph& top, const std::string& qid) {
  auto [prefix, local] = split_qid(qid);
  const WorkflowGraph* g = scope_graph(top, prefix);
  return g && (local == g->start || local == g->end);
}

// Core of fire(): validates and applies one transition; used for both
// live operation and log replay so the two stay byte-identical.
void apply_fire(Item& item, const meta::DescriptionRepo& repo,
                const WorkflowGraph& graph, const std::string& activity_id,
                EventKind kind, const std::string& agent,
                const std::optional<doc::CanonicalDoc>& outcome) {
  auto sit = item.states.find(activity_id);
  if (sit == item.states.end())
    throw Error(Errc::NOT_FOUND, "no activity " + activity_id);
  const ActivityDef* def = find_def(graph, activity_id);
  if (!def) throw Error(Errc::NOT_FOUND, "no activity " + activity_id);
  if (def->kind == ActivityDef::Kind::COMPOSITE ||
      is_boundary(graph, activity_id))
    throw Error(Errc::ILLEGAL_TRANSITION,
                activity_id + " is not directly fireable");
  if (!def->role.empty() && def->role != agent)
    throw Error(Errc::ROLE_MISMATCH, "activity " + activity_id +
                                         " requires role " + def->role);
  ActivityState st = sit->second;
  Engine eng(item, graph);
  switch (kind) {
    case EventKind::START:
      if (st != ActivityState::ENABLED)
        throw Error(Errc::ILLEGAL_TRANSITION,
                    "START from " + std::string(activity_state_name(st)));
      item.states[activity_id] = ActivityState::STARTED;
      break;
    case EventKind::COMPLETE: {
      if (st != ActivityState::STARTED)
        throw Error(Errc::ILLEGAL_TRANSITION,
                    "COMPLETE from " + std::string(activity_state_name(st)));
      doc::OutcomeSchema schema = schema_in_force(*def, repo);
      static const doc::CanonicalDoc empty{"", {}, {}, std::nullopt};
      const doc::CanonicalDoc& d = outcome ? *outcome : empty;
      auto violations = doc::validate_outcome(d, schema);
      if (!violations.empty()) {
        json detail = json::array();
        for (const auto& v : violations)
          detail.push_back({{"code", v.code}, {"subject", v.subject}});
        throw Error(Errc::SCHEMA_VIOLATION,
                    "outcome does not satisfy schema for " + activity_id,
                    detail);
      }
      StateSnapshot before = StateSnapshot::of(item);
      try {
        eng.complete(activity_id, outcome ? &*outcome : nullptr);
      } catch (...) {
        before.restore(item);
        throw;
      }
      break;
    }
    case EventKind::SKIP: {
      if (st != ActivityState::WAITING && st != ActivityState::ENABLED)
        throw Error(Errc::ILLEGAL_TRANSITION,
                    "SKIP from " + std::string(activity_state_name(st)));
      StateSnapshot before = StateSnapshot::of(item);
      try {
        eng.skip(activity_id);
      } catch (...) {
        before.restore(item);
        throw;
      }
      break;
    }
    default:
      throw Error(Errc::ILLEGAL_TRANSITION,
                  std::string(event_kind_name(kind)) + " is not fireable");
  }
}

}  // namespace

Item instantiate(const std::string& item_id, const meta::VersionRef& desc,
                 const meta::DescriptionRepo& repo) {
  if (item_id.empty() || item_id.find('/') != std::string::npos ||
      item_id.find('.') != std::string::npos)
    throw Error(Errc::VALIDATION_FAILED, "bad item id '" + item_id + "'");
  meta::DescriptionRecord rec = repo.resolve(desc);
  if (rec.kind != meta::DescKind::ITEM_DESC &&
      rec.kind != meta::DescKind::CONNECTOR_DESC)
    throw Error(Errc::KIND_MISMATCH,
                desc.str() + " is not an instantiable description");
  Item item;
  item.id = item_id;
  item.described_by = desc;
  WorkflowGraph g = rec.graph();
  Engine eng(item, g);
  for (const std::string& qid : eng.init())
    append_event(item, qid, EventKind::ENABLE, "system");
  return item;
}

std::vector<std::string> enabled(const Item& item) {
  std::vector<std::string> out;
  for (const auto& [qid, st] : item.states)
    if (st == ActivityState::ENABLED) out.push_back(qid);
  return out;
}

Event fire(Item& item, const meta::DescriptionRepo& repo,
           const std::string& activity_id, EventKind kind,
           const std::string& agent,
           const std::optional<doc::CanonicalDoc>& outcome) {
  WorkflowGraph g = evo::effective_graph(item, repo);
  apply_fire(item, repo, g, activity_id, kind, agent, outcome);
  return append_event(item, activity_id, kind, agent, outcome);
}

std::vector<Event> rearm(Item& item, const meta::DescriptionRepo& repo) {
  if (item.status != ItemStatus::COMPLETED)
    throw Error(Errc::ILLEGAL_TRANSITION, "rearm requires a completed item");
  WorkflowGraph g = evo::effective_graph(item, repo);
  Engine eng(item, g);
  std::vector<Event> out;
  // tagged so migration checking can tell a fresh pass from history
  for (const std::string& qid : eng.init())
    out.push_back(append_event(item, qid, EventKind::ENABLE, "system",
                               std::nullopt, json{{"rearm", true}}));
  return out;
}

Item replay(const std::vector<Event>& log, const meta::DescriptionRepo& repo) {
  if (log.empty())
    throw Error(Errc::CORRUPT_LOG, "empty log (offending seq 1)");
  for (size_t i = 0; i < log.size(); ++i)
    if (log[i].seq != i + 1)
      throw Error(Errc::CORRUPT_LOG, "sequence gap at seq " +
                                         std::to_string(log[i].seq),
                  json{{"seq", log[i].seq}});

  Item item;
  item.id = log.front().item_id;
  item.described_by = log.front().desc_version;
  {
    WorkflowGraph g = repo.resolve(item.described_by).graph();
    Engine eng(item, g);
    std::deque<std::string> pending;
    for (const std::string& qid : eng.init()) pending.push_back(qid);

    for (const Event& e : log) {
      if (e.item_id != item.id)
        throw Error(Errc::CORRUPT_LOG,
                    "foreign item id at seq " + std::to_string(e.seq));
      try {
        switch (e.kind) {
          case EventKind::ENABLE: {
            if (pending.empty() && item.status == ItemStatus::COMPLETED) {
              WorkflowGraph eg = evo::effective_graph(item, repo);
              Engine r(item, eg);
              for (const std::string& qid : r.init()) pending.push_back(qid);
            }
            if (pending.empty() || pending.front() != e.activity_id)
              throw Error(Errc::CORRUPT_LOG, "unexpected ENABLE for " +
                                                 e.activity_id + " at seq " +
                                                 std::to_string(e.seq));
            pending.pop_front();
            break;
          }
          case EventKind::START:
          case EventKind::COMPLETE:
          case EventKind::SKIP: {
            WorkflowGraph eg = evo::effective_graph(item, repo);
            apply_fire(item, repo, eg, e.activity_id, e.kind, e.agent,
                       e.outcome);
            break;
          }
          case EventKind::MIGRATE: {
            meta::VersionRef target{e.detail.at("to").at("name"),
                                    e.detail.at("to").at("version")};
            evo::MigrationReport rep = evo::migration_report(
                item, target, repo, e.detail.value("loop_depth",
                                                   evo::DEFAULT_LOOP_DEPTH));
            if (!rep.valid)
              throw Error(Errc::CORRUPT_LOG, "logged migration no longer valid");
            item.described_by = target;
            item.states.clear();
            for (const auto& [qid, st] : rep.state_mapping)
              item.states[qid] = st;
            item.tokens.clear();
            for (const auto& [k, n] : rep.token_mapping) item.tokens[k] = n;
            WorkflowGraph eg = evo::effective_graph(item, repo);
            Engine(item, eg).recompute_status();
            break;
          }
          case EventKind::ADHOC: {
            WorkflowGraph base =
                repo.resolve(item.described_by).graph();
            std::vector<json> next = item.adhoc_delta;
            next.push_back(e.detail);
            (void)evo::apply_delta(base, next);  // throws DELTA_CONFLICT
            evo::apply_adhoc_state(item, e.detail, repo);
            break;
          }
        }
      } catch (const Error& err) {
        if (err.code() == Errc::CORRUPT_LOG) throw;
        throw Error(Errc::CORRUPT_LOG,
                    "event at seq " + std::to_string(e.seq) +
                        " not applicable: " + err.what());
      }
      item.log.push_back(e);
    }
  }
  return item;
}

std::vector<std::string> trace_of(const Item& item) {
  std::vector<std::string> out;
  for (const Event& e : item.log)
    if (e.kind == EventKind::COMPLETE) out.push_back(e.activity_id);
  return out;
}

}  // namespace ddsflow::enact
