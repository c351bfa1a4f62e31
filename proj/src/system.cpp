#include "ddsflow/system.hpp"

namespace ddsflow {

using nlohmann::json;

static std::string item_log_key(const std::string& id) {
  return "item/" + id + "/log";
}

System::System(std::filesystem::path root)
    : root_(std::move(root)),
      store_(root_ / "store"),
      repo_(store_),
      bus_(root_ / "spool") {
  for (const std::string& key : store_.index_keys("endpoint/")) {
    std::string name = key.substr(9);
    if (name == bus::DEAD_LETTER) continue;  // always open
    bus_.open_endpoint(name,
                       bus::comm_mode_from(*store_.get_index(key)));
  }
  for (const std::string& key : store_.index_keys("item/")) {
    // keys look like item/<id>/log
    if (key.size() < 10 || key.compare(key.size() - 4, 4, "/log") != 0)
      continue;
    std::string id = key.substr(5, key.size() - 9);
    std::vector<enact::Event> log;
    for (const std::string& rec : store_.read_all(key))
      log.push_back(enact::Event::deserialize(rec));
    enact::Item it = enact::replay(log, repo_);
    for (const enact::Event& e : log)
      if (e.kind == enact::EventKind::COMPLETE && e.detail.contains("msg-id"))
        processed_[id].insert(e.detail["msg-id"].get<std::string>());
    items_.emplace(id, std::move(it));
  }
  for (const std::string& key : store_.index_keys("connector/")) {
    std::string name = key.substr(10);
    bindings_[name] = *store_.get_index(key);
    bind_connector(name, bindings_[name]);
  }
}

enact::Item& System::create_item(const std::string& id,
                                 const meta::VersionRef& desc) {
  if (items_.count(id) || store_.log_exists(item_log_key(id)))
    throw Error(Errc::DUPLICATE_ITEM, "item " + id + " already exists");
  enact::Item it = enact::instantiate(id, desc, repo_);
  auto [pos, _] = items_.emplace(id, std::move(it));
  persist_events(pos->second, 0);
  return pos->second;
}

enact::Item& System::item(const std::string& id) {
  auto it = items_.find(id);
  if (it == items_.end())
    throw Error(Errc::NOT_FOUND, "no item " + id);
  return it->second;
}

const enact::Item& System::item(const std::string& id) const {
  return const_cast<System*>(this)->item(id);
}

bool System::has_item(const std::string& id) const {
  return items_.count(id) != 0;
}

std::vector<std::string> System::item_ids() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : items_) out.push_back(k);
  return out;
}

void System::persist_events(const enact::Item& it, size_t from_index) {
  for (size_t i = from_index; i < it.log.size(); ++i) {
    if (write_hook) write_hook();
    store_.append(item_log_key(it.id), it.log[i].serialize());
  }
}

enact::Event System::fire(const std::string& id, const std::string& activity,
                          enact::EventKind kind, const std::string& agent,
                          const std::optional<doc::CanonicalDoc>& outcome) {
  enact::Item& it = item(id);
  size_t before = it.log.size();
  enact::Event ev = enact::fire(it, repo_, activity, kind, agent, outcome);
  persist_events(it, before);
  return ev;
}

evo::MigrationReport System::report(const std::string& id,
                                    const meta::VersionRef& target,
                                    int loop_depth) const {
  return evo::migration_report(item(id), target, repo_, loop_depth);
}

enact::Event System::migrate(const std::string& id,
                             const meta::VersionRef& target, int loop_depth) {
  enact::Item& it = item(id);
  size_t before = it.log.size();
  enact::Event ev = evo::migrate(it, target, repo_, loop_depth);
  persist_events(it, before);
  return ev;
}

enact::Event System::adhoc(const std::string& id, const json& delta_op) {
  enact::Item& it = item(id);
  size_t before = it.log.size();
  enact::Event ev = evo::apply_adhoc(it, delta_op, repo_);
  persist_events(it, before);
  return ev;
}

void System::open_endpoint(const std::string& name, bus::CommMode mode) {
  bus_.open_endpoint(name, mode);
  store_.put_index("endpoint/" + name, bus::comm_mode_name(mode));
}

uint64_t System::send(const bus::Message& msg) { return bus_.send(msg); }

std::vector<bus::Bus::Delivery> System::step(uint64_t seed) {
  return bus_.step(seed);
}

std::vector<bus::Bus::Delivery> System::run_to_quiescence(uint64_t seed) {
  return bus_.run_to_quiescence(seed);
}

void System::bind_connector(const std::string& name,
                            const std::string& endpoint) {
  bus_.bind(endpoint, [this, name](const bus::Message& m) {
    return process_message(name, m);
  });
}

enact::Item& System::deploy_connector(const std::string& name,
                                      const eai::ConnectorSpec& spec) {
  for (const auto& [other, ep] : bindings_)
    if (other != name && ep == spec.inbound_endpoint)
      throw Error(Errc::ENDPOINT_IN_USE,
                  "endpoint " + spec.inbound_endpoint + " bound to " + other);
  if (!bus_.has_endpoint(spec.inbound_endpoint))
    open_endpoint(spec.inbound_endpoint, spec.comm_mode);
  meta::VersionRef ref =
      repo_.publish(meta::DescKind::CONNECTOR_DESC, name, spec.to_json());
  if (!has_item(name)) create_item(name, ref);
  // redeploy keeps the live instance on its old version; migrate moves it
  if (auto old = bindings_.find(name);
      old != bindings_.end() && old->second != spec.inbound_endpoint)
    bus_.unbind(old->second);
  bindings_[name] = spec.inbound_endpoint;
  store_.put_index("connector/" + name, spec.inbound_endpoint);
  bind_connector(name, spec.inbound_endpoint);
  return item(name);
}

bus::Message System::dead_letter_for(const std::string& connector,
                                     const bus::Message& msg,
                                     const std::string& why) {
  bus::Message out = msg;
  out.id = connector + ":" + msg.id;
  out.endpoint = bus::DEAD_LETTER;
  out.set_header("msg-id", out.id);
  out.set_header("error", why);
  return out;
}

bus::Message System::outbound_for(const std::string& connector,
                                  const eai::ConnectorSpec& spec,
                                  const bus::Message& msg,
                                  const doc::CanonicalDoc& parsed) const {
  doc::CanonicalDoc routed =
      spec.transform.empty()
          ? parsed
          : doc::apply_transform(spec.transform, parsed).output;
  bus::Message out;
  out.id = connector + ":" + msg.id;
  out.endpoint = eai::route(spec.routes, routed);
  out.payload = doc::serialize_doc(routed);
  out.format = "CANONICAL";
  out.set_header("msg-id", out.id);
  out.set_header("format", "CANONICAL");
  return out;
}

std::vector<bus::Message> System::process_message(const std::string& connector,
                                                  const bus::Message& msg) {
  enact::Item& it = item(connector);
  eai::ConnectorSpec spec =
      eai::ConnectorSpec::from_json(repo_.resolve(it.described_by).body);

  doc::CanonicalDoc parsed;
  try {
    parsed = doc::parse_doc(msg.payload, spec.data_format);
  } catch (const Error& e) {
    return {dead_letter_for(connector, msg, e.what())};
  }

  // at-least-once redelivery: recompute outputs, never a second COMPLETE
  if (processed_[connector].count(msg.id))
    return {outbound_for(connector, spec, msg, parsed)};

  // run the behaviour pass on a scratch copy so a guard failure leaves
  // the connector state untouched
  enact::Item scratch = it;
  size_t before = scratch.log.size();
  try {
    if (scratch.status == enact::ItemStatus::COMPLETED)
      enact::rearm(scratch, repo_);
    bool tagged = false;
    for (int hops = 0; scratch.status == enact::ItemStatus::ACTIVE; ++hops) {
      if (hops > 64)
        throw Error(Errc::BOUND_EXCEEDED, "behaviour did not quiesce");
      std::vector<std::string> ready = enact::enabled(scratch);
      if (ready.empty()) break;
      const std::string& act = ready.front();
      enact::fire(scratch, repo_, act, enact::EventKind::START, "connector");
      enact::fire(scratch, repo_, act, enact::EventKind::COMPLETE, "connector",
                  parsed);
      if (!tagged) {
        scratch.log.back().detail["msg-id"] = msg.id;
        tagged = true;
      }
    }
  } catch (const Error& e) {
    return {dead_letter_for(connector, msg, e.what())};
  }

  it = std::move(scratch);
  persist_events(it, before);
  processed_[connector].insert(msg.id);
  return {outbound_for(connector, spec, msg, parsed)};
}

void System::snapshot(const std::filesystem::path& archive) const {
  store::archive_tree(root_, archive);
}

void System::restore(const std::filesystem::path& archive,
                     const std::filesystem::path& root) {
  store::restore_tree(archive, root);
}

}  // namespace ddsflow
