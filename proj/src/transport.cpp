#include "ddsflow/transport.hpp"

#include <algorithm>
#include <fstream>
#include <random>

namespace ddsflow::bus {

namespace fs = std::filesystem;
using nlohmann::json;

CommMode comm_mode_from(const std::string& s) {
  if (s == "INPROC") return CommMode::INPROC;
  if (s == "FILE") return CommMode::FILE;
  throw Error(Errc::PARSE_ERROR, "unknown comm mode " + s);
}

const char* comm_mode_name(CommMode m) {
  return m == CommMode::INPROC ? "INPROC" : "FILE";
}

const std::string* Message::header(const std::string& key) const {
  for (const auto& [k, v] : headers)
    if (k == key) return &v;
  return nullptr;
}

void Message::set_header(const std::string& key, const std::string& value) {
  for (auto& [k, v] : headers)
    if (k == key) {
      v = value;
      return;
    }
  headers.emplace_back(key, value);
}

std::string serialize_message(const Message& m) {
  json headers = json::array();
  for (const auto& [k, v] : m.headers) headers.push_back(json::array({k, v}));
  json j{{"endpoint", m.endpoint},
         {"format", m.format},
         {"headers", headers},
         {"id", m.id},
         {"payload", m.payload}};
  return j.dump();
}

Message parse_message(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw Error(Errc::PARSE_ERROR, "bad message encoding");
  try {
    Message m;
    m.id = j.at("id").get<std::string>();
    m.endpoint = j.at("endpoint").get<std::string>();
    m.payload = j.at("payload").get<std::string>();
    m.format = j.at("format").get<std::string>();
    for (const json& h : j.at("headers"))
      m.headers.emplace_back(h.at(0).get<std::string>(),
                             h.at(1).get<std::string>());
    return m;
  } catch (const json::exception& e) {
    throw Error(Errc::PARSE_ERROR, std::string("bad message: ") + e.what());
  }
}

Bus::Bus(fs::path file_root) : file_root_(std::move(file_root)) {
  open_endpoint(DEAD_LETTER, CommMode::INPROC);
}

void Bus::open_endpoint(const std::string& name, CommMode mode) {
  if (endpoints_.count(name))
    throw Error(Errc::DUPLICATE_ENDPOINT, "endpoint " + name + " already open");
  Endpoint e;
  e.mode = mode;
  if (mode == CommMode::FILE) {
    e.dir = file_root_ / name;
    std::error_code ec;
    fs::create_directories(e.dir, ec);
    if (ec) throw Error(Errc::IO_ERROR, "cannot create spool " + e.dir.string());
    // resume numbering past anything already spooled (consumed or not)
    for (const auto& f : fs::directory_iterator(e.dir)) {
      std::string stem = f.path().stem().string();
      uint64_t n = std::strtoull(stem.c_str(), nullptr, 10);
      e.next_receipt = std::max(e.next_receipt, n + 1);
    }
  }
  endpoints_.emplace(name, std::move(e));
}

bool Bus::has_endpoint(const std::string& name) const {
  return endpoints_.count(name) != 0;
}

CommMode Bus::mode_of(const std::string& name) const { return ep(name).mode; }

std::vector<std::string> Bus::endpoint_names() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : endpoints_) out.push_back(k);
  return out;
}

Bus::Endpoint& Bus::ep(const std::string& name) {
  auto it = endpoints_.find(name);
  if (it == endpoints_.end())
    throw Error(Errc::NOT_FOUND, "endpoint " + name + " not open");
  return it->second;
}

const Bus::Endpoint& Bus::ep(const std::string& name) const {
  return const_cast<Bus*>(this)->ep(name);
}

uint64_t Bus::send(const Message& msg) {
  Endpoint& e = ep(msg.endpoint);
  if (write_hook) write_hook();
  uint64_t receipt = e.next_receipt++;
  if (e.mode == CommMode::INPROC) {
    e.queue.push_back(msg);
    return receipt;
  }
  char name[32];
  std::snprintf(name, sizeof name, "%06llu.msg", (unsigned long long)receipt);
  fs::path final_path = e.dir / name;
  fs::path tmp = e.dir / (std::string(name) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << serialize_message(msg);
    out.flush();
    if (!out) throw Error(Errc::IO_ERROR, "spool write failed " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, final_path, ec);
  if (ec) throw Error(Errc::IO_ERROR, "spool rename failed " + final_path.string());
  return receipt;
}

void Bus::bind(const std::string& endpoint, Handler handler) {
  ep(endpoint);  // must exist
  handlers_[endpoint] = std::move(handler);
}

void Bus::unbind(const std::string& endpoint) { handlers_.erase(endpoint); }

std::vector<fs::path> Bus::spool_files(const Endpoint& e) const {
  std::vector<fs::path> files;
  for (const auto& f : fs::directory_iterator(e.dir))
    if (f.path().extension() == ".msg") files.push_back(f.path());
  std::sort(files.begin(), files.end());
  return files;
}

bool Bus::front(Endpoint& e, Message& out, fs::path& spool_file) {
  spool_file.clear();
  if (e.mode == CommMode::INPROC) {
    if (e.queue.empty()) return false;
    out = e.queue.front();
    return true;
  }
  auto files = spool_files(e);
  if (files.empty()) return false;
  std::ifstream in(files.front(), std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  out = parse_message(text);
  spool_file = files.front();
  return true;
}

void Bus::commit(Endpoint& e, const fs::path& spool_file) {
  if (e.mode == CommMode::INPROC) {
    e.queue.pop_front();
    return;
  }
  if (write_hook) write_hook();
  fs::path done = spool_file;
  done.replace_extension(".done");
  std::error_code ec;
  fs::rename(spool_file, done, ec);
  if (ec) throw Error(Errc::IO_ERROR, "spool consume failed");
}

bool Bus::take(Endpoint& e, Message& out) {
  fs::path f;
  if (!front(e, out, f)) return false;
  commit(e, f);
  return true;
}

size_t Bus::pending_count(const std::string& endpoint) const {
  const Endpoint& e = ep(endpoint);
  if (e.mode == CommMode::INPROC) return e.queue.size();
  return spool_files(e).size();
}

std::vector<Message> Bus::drain(const std::string& endpoint) {
  Endpoint& e = ep(endpoint);
  std::vector<Message> out;
  Message m;
  while (take(e, m)) out.push_back(m);
  return out;
}

std::vector<Message> Bus::peek(const std::string& endpoint) const {
  const Endpoint& e = ep(endpoint);
  std::vector<Message> out;
  if (e.mode == CommMode::INPROC) {
    out.assign(e.queue.begin(), e.queue.end());
    return out;
  }
  for (const fs::path& f : spool_files(e)) {
    std::ifstream in(f, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    out.push_back(parse_message(text));
  }
  return out;
}

std::vector<Bus::Delivery> Bus::step(uint64_t seed) {
  std::vector<std::string> bound;
  for (const auto& [name, _] : handlers_) bound.push_back(name);
  std::mt19937_64 rng(seed);
  std::shuffle(bound.begin(), bound.end(), rng);

  std::vector<Delivery> deliveries;
  for (const std::string& name : bound) {
    Endpoint& e = ep(name);
    Message m;
    fs::path spool_file;
    if (!front(e, m, spool_file)) continue;
    deliveries.push_back({name, m});
    // handle before consuming: a crash here redelivers (at-least-once)
    std::vector<Message> outs = handlers_.at(name)(m);
    for (const Message& out : outs) send(out);
    commit(e, spool_file);
  }
  return deliveries;
}

std::vector<Bus::Delivery> Bus::run_to_quiescence(uint64_t seed, int max_steps) {
  std::vector<Delivery> all;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < max_steps; ++i) {
    auto batch = step(rng());
    if (batch.empty()) return all;
    all.insert(all.end(), batch.begin(), batch.end());
  }
  throw Error(Errc::BOUND_EXCEEDED, "bus did not quiesce");
}

}  // namespace ddsflow::bus
