#pragma once

#include "ddsflow/evolution.hpp"
#include "ddsflow/integration.hpp"

namespace ddsflow {

// One process worth of engine: store + description repo + live items +
// transport bus, with every event persisted as it happens. Construction
// over an existing root recovers the full state (items are replayed
// from their logs, connectors re-bound, FILE spools rescanned).
class System {
 public:
  explicit System(std::filesystem::path root);

  store::Store& store() { return store_; }
  meta::DescriptionRepo& repo() { return repo_; }
  bus::Bus& bus() { return bus_; }
  const std::filesystem::path& root() const { return root_; }

  enact::Item& create_item(const std::string& id,
                           const meta::VersionRef& desc);
  enact::Item& item(const std::string& id);
  const enact::Item& item(const std::string& id) const;
  bool has_item(const std::string& id) const;
  std::vector<std::string> item_ids() const;

  enact::Event fire(const std::string& id, const std::string& activity,
                    enact::EventKind kind, const std::string& agent,
                    const std::optional<doc::CanonicalDoc>& outcome =
                        std::nullopt);
  evo::MigrationReport report(const std::string& id,
                              const meta::VersionRef& target,
                              int loop_depth = evo::DEFAULT_LOOP_DEPTH) const;
  enact::Event migrate(const std::string& id, const meta::VersionRef& target,
                       int loop_depth = evo::DEFAULT_LOOP_DEPTH);
  enact::Event adhoc(const std::string& id, const nlohmann::json& delta_op);

  void open_endpoint(const std::string& name, bus::CommMode mode);
  uint64_t send(const bus::Message& msg);
  std::vector<bus::Bus::Delivery> step(uint64_t seed);
  std::vector<bus::Bus::Delivery> run_to_quiescence(uint64_t seed);

  enact::Item& deploy_connector(const std::string& name,
                                const eai::ConnectorSpec& spec);
  // Exposed for tests; the bus invokes this for bound endpoints.
  std::vector<bus::Message> process_message(const std::string& connector,
                                            const bus::Message& msg);

  void snapshot(const std::filesystem::path& archive) const;
  static void restore(const std::filesystem::path& archive,
                      const std::filesystem::path& root);

  // Invoked before each event append; crash-simulation hook.
  std::function<void()> write_hook;

 private:
  void persist_events(const enact::Item& it, size_t from_index);
  void bind_connector(const std::string& name, const std::string& endpoint);
  bus::Message outbound_for(const std::string& connector,
                            const eai::ConnectorSpec& spec,
                            const bus::Message& msg,
                            const doc::CanonicalDoc& parsed) const;
  static bus::Message dead_letter_for(const std::string& connector,
                                      const bus::Message& msg,
                                      const std::string& why);

  std::filesystem::path root_;
  store::Store store_;
  meta::DescriptionRepo repo_;
  bus::Bus bus_;
  std::map<std::string, enact::Item> items_;
  std::map<std::string, std::string> bindings_;  // connector -> endpoint
  std::map<std::string, std::set<std::string>> processed_;  // msg-id dedupe
};

}  // namespace ddsflow
