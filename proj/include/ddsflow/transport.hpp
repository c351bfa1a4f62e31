#pragma once

#include <deque>
#include <filesystem>
#include <functional>

#include "ddsflow/doc.hpp"

namespace ddsflow::bus {

enum class CommMode { INPROC, FILE };

CommMode comm_mode_from(const std::string& s);
const char* comm_mode_name(CommMode m);

// The unit that crosses parse, transform and route. Headers keep
// declaration order; reserved keys: msg-id, format, error.
struct Message {
  std::string id;
  std::string endpoint;
  std::string payload;
  std::string format;
  std::vector<std::pair<std::string, std::string>> headers;

  const std::string* header(const std::string& key) const;
  void set_header(const std::string& key, const std::string& value);
  bool operator==(const Message&) const = default;
};

std::string serialize_message(const Message& m);
Message parse_message(const std::string& text);  // throws PARSE_ERROR

// Outputs a handler wants delivered, keyed by the inbound message.
using Handler = std::function<std::vector<Message>(const Message&)>;

constexpr const char* DEAD_LETTER = "dead-letter";

// Simulated transport. INPROC endpoints live in memory; FILE endpoints
// spool NNNNNN.msg files under root/<endpoint>/ and survive a process
// drop (at-least-once: unrenamed files are redelivered on rescan).
class Bus {
 public:
  explicit Bus(std::filesystem::path file_root);

  void open_endpoint(const std::string& name, CommMode mode);
  bool has_endpoint(const std::string& name) const;
  CommMode mode_of(const std::string& name) const;
  std::vector<std::string> endpoint_names() const;

  uint64_t send(const Message& msg);  // msg.endpoint is the target

  // One handler per endpoint; handlers consume, everything else queues.
  void bind(const std::string& endpoint, Handler handler);
  void unbind(const std::string& endpoint);

  struct Delivery {
    std::string endpoint;
    Message msg;
  };

  // Delivers at most one pending message per bound endpoint. Order
  // across endpoints is a pure function of the seed; per endpoint FIFO.
  std::vector<Delivery> step(uint64_t seed);
  std::vector<Delivery> run_to_quiescence(uint64_t seed, int max_steps = 10000);

  size_t pending_count(const std::string& endpoint) const;
  // Invoked before every durable write (spool write, spool consume).
  // Test hook for crash simulation; empty by default.
  std::function<void()> write_hook;
  // Consumes and returns everything queued at an unbound endpoint.
  std::vector<Message> drain(const std::string& endpoint);
  // Peek without consuming (INPROC queue / unconsumed spool files).
  std::vector<Message> peek(const std::string& endpoint) const;

 private:
  struct Endpoint {
    CommMode mode = CommMode::INPROC;
    std::deque<Message> queue;            // INPROC
    std::filesystem::path dir;            // FILE
    uint64_t next_receipt = 1;
  };

  Endpoint& ep(const std::string& name);
  const Endpoint& ep(const std::string& name) const;
  std::vector<std::filesystem::path> spool_files(const Endpoint& e) const;
  // Peek the front message without consuming it; FILE mode reports the
  // spool file so consumption can be deferred until after handling.
  bool front(Endpoint& e, Message& out, std::filesystem::path& spool_file);
  void commit(Endpoint& e, const std::filesystem::path& spool_file);
  bool take(Endpoint& e, Message& out);  // front + commit

  std::filesystem::path file_root_;
  std::map<std::string, Endpoint> endpoints_;
  std::map<std::string, Handler> handlers_;
};

}  // namespace ddsflow::bus
