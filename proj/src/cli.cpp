#include "ddsflow/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <random>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

namespace ddsflow::cli {

using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IO_ERROR, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_json_file(const std::string& path) {
  json j = json::parse(slurp(path), nullptr, false);
  if (j.is_discarded())
    throw Error(Errc::PARSE_ERROR, "bad JSON in " + path);
  return j;
}

meta::VersionRef parse_ref(const std::string& text) {
  size_t at = text.find('@');
  if (at == std::string::npos)
    throw Error(Errc::PARSE_ERROR, "expected <name>@<version>: " + text);
  std::string ver = text.substr(at + 1);
  int v = ver == "latest" ? meta::LATEST : std::atoi(ver.c_str());
  if (v == 0) throw Error(Errc::PARSE_ERROR, "bad version in " + text);
  return {text.substr(0, at), v};
}

void print_enabled(std::ostream& out, const enact::Item& it) {
  for (const std::string& a : enact::enabled(it))
    out << "enabled " << a << "\n";
}

bus::Message message_from_json(const json& j) {
  bus::Message m;
  m.id = j.at("id").get<std::string>();
  m.payload = j.at("payload").get<std::string>();
  m.format = j.value("format", std::string("CANONICAL"));
  if (j.contains("headers"))
    for (const json& h : j["headers"])
      m.headers.emplace_back(h.at(0).get<std::string>(),
                             h.at(1).get<std::string>());
  m.set_header("msg-id", m.id);
  return m;
}

int run_script(const std::string& store_root, const std::string& path,
               std::ostream& out, std::ostream& err);

struct Args {
  std::string store_root;
  // one field per positional/flag across all verbs
  std::string file, id, ref, activity, verb_kind, agent, outcome_file;
  std::string name, va, vb, endpoint, archive, delta_file;
  int version = 0;
  bool dry_run = false;
  uint64_t seed = 0;
  int count = 1;
};

int dispatch(const Args& a, CLI::App& app, std::ostream& out) {
  auto sys = [&] { return std::make_unique<System>(a.store_root); };

  if (app.got_subcommand("desc")) {
    CLI::App* desc = app.get_subcommand("desc");
    if (desc->got_subcommand("publish")) {
      json j = parse_json_file(a.file);
      System s(a.store_root);
      meta::VersionRef ref = s.repo().publish(
          meta::desc_kind_from(j.at("kind").get<std::string>()),
          j.at("name").get<std::string>(), j.at("body"));
      out << "published " << ref.str() << "\n";
    } else if (desc->got_subcommand("list")) {
      System s(a.store_root);
      for (const std::string& n : s.repo().names())
        out << n << "@" << s.repo().latest(n) << " "
            << meta::desc_kind_name(s.repo().kind_of(n)) << "\n";
    } else {  // diff
      System s(a.store_root);
      meta::ChangeSet cs =
          s.repo().diff(a.name, std::atoi(a.va.c_str()), std::atoi(a.vb.c_str()));
      out << meta::changeset_to_json(cs).dump() << "\n";
    }
    return 0;
  }

  if (app.got_subcommand("item")) {
    CLI::App* item = app.get_subcommand("item");
    System s(a.store_root);
    if (item->got_subcommand("create")) {
      enact::Item& it = s.create_item(a.id, parse_ref(a.ref));
      out << "created " << it.id << " " << it.described_by.str() << "\n";
      print_enabled(out, it);
    } else if (item->got_subcommand("enabled")) {
      print_enabled(out, s.item(a.id));
    } else if (item->got_subcommand("fire")) {
      std::optional<doc::CanonicalDoc> outcome;
      if (!a.outcome_file.empty())
        outcome = doc::parse_doc(slurp(a.outcome_file), doc::Format::CANONICAL);
      std::string kind = a.verb_kind;
      for (char& c : kind) c = (char)std::toupper((unsigned char)c);
      enact::Event ev =
          s.fire(a.id, a.activity, enact::event_kind_from(kind),
                 a.agent.empty() ? "cli" : a.agent, outcome);
      out << "seq=" << ev.seq << " " << enact::event_kind_name(ev.kind) << " "
          << ev.activity_id << "\n";
      out << "status " << enact::item_status_name(s.item(a.id).status) << "\n";
    } else if (item->got_subcommand("migrate")) {
      meta::VersionRef target{s.item(a.id).described_by.name, a.version};
      if (a.dry_run) {
        out << s.report(a.id, target).to_json().dump() << "\n";
      } else {
        enact::Event ev = s.migrate(a.id, target);
        out << "migrated " << a.id << " to " << ev.desc_version.str() << "\n";
      }
    } else {  // adhoc
      enact::Event ev = s.adhoc(a.id, parse_json_file(a.delta_file));
      out << "adhoc seq=" << ev.seq << " " << ev.activity_id << "\n";
    }
    return 0;
  }

  if (app.got_subcommand("connector")) {
    json j = parse_json_file(a.file);
    System s(a.store_root);
    std::string name = j.at("name").get<std::string>();
    eai::ConnectorSpec spec = eai::ConnectorSpec::from_json(j);
    enact::Item& it = s.deploy_connector(name, spec);
    out << "deployed " << it.described_by.str() << " on "
        << spec.inbound_endpoint << "\n";
    return 0;
  }

  if (app.got_subcommand("bus")) {
    CLI::App* b = app.get_subcommand("bus");
    System s(a.store_root);
    if (b->got_subcommand("open")) {
      s.open_endpoint(a.endpoint, bus::comm_mode_from(a.verb_kind));
      out << "opened " << a.endpoint << "\n";
    } else if (b->got_subcommand("send")) {
      bus::Message m = message_from_json(parse_json_file(a.file));
      m.endpoint = a.endpoint;
      out << "receipt=" << s.send(m) << "\n";
    } else {  // step
      std::mt19937_64 rng(a.seed);
      for (int i = 0; i < a.count; ++i)
        for (const auto& d : s.step(rng()))
          out << "delivered " << d.endpoint << " " << d.msg.id << "\n";
    }
    return 0;
  }

  if (app.got_subcommand("replay")) {
    System s(a.store_root);
    const enact::Item& live = s.item(a.id);
    enact::Item rebuilt = enact::replay(live.log, s.repo());
    if (rebuilt.state_bytes() != live.state_bytes())
      throw Error(Errc::CORRUPT_LOG, "replay mismatch for " + a.id);
    out << "replay ok " << a.id << " events=" << live.log.size() << "\n";
    return 0;
  }

  if (app.got_subcommand("snapshot")) {
    sys()->snapshot(a.archive);
    out << "snapshot written\n";
    return 0;
  }

  if (app.got_subcommand("restore")) {
    System::restore(a.archive, a.store_root);
    out << "restored\n";
    return 0;
  }

  return 2;
}

int run_script(const std::string& store_root, const std::string& path,
               std::ostream& out, std::ostream& err) {
  std::istringstream lines(slurp(path));
  std::string line, last_output;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("expect:", 0) == 0) {
      std::string want = line.substr(7);
      while (!want.empty() && want.front() == ' ') want.erase(want.begin());
      if (last_output.find(want) == std::string::npos) {
        err << "script:" << lineno << ": expectation failed: " << want << "\n";
        return 1;
      }
      continue;
    }
    std::istringstream tok(line);
    std::vector<std::string> args{"--store", store_root};
    std::string t;
    while (tok >> t) args.push_back(t);
    std::ostringstream capture;
    int rc = run_command(args, capture, err);
    last_output = capture.str();
    out << "> " << line << "\n" << last_output;
    if (rc != 0) {
      err << "script:" << lineno << ": exit " << rc << "\n";
      return rc;
    }
  }
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err) {
  Args a;
  CLI::App app{"description-driven workflow engine"};
  app.require_subcommand(1);
  app.add_option("--store", a.store_root, "store root directory");

  CLI::App* desc = app.add_subcommand("desc", "description repository");
  desc->require_subcommand(1);
  CLI::App* dp = desc->add_subcommand("publish", "publish a description");
  dp->add_option("file", a.file)->required();
  desc->add_subcommand("list", "list descriptions");
  CLI::App* dd = desc->add_subcommand("diff", "diff two versions");
  dd->add_option("name", a.name)->required();
  dd->add_option("va", a.va)->required();
  dd->add_option("vb", a.vb)->required();

  CLI::App* item = app.add_subcommand("item", "item instances");
  item->require_subcommand(1);
  CLI::App* ic = item->add_subcommand("create", "instantiate an item");
  ic->add_option("id", a.id)->required();
  ic->add_option("ref", a.ref)->required();
  CLI::App* ie = item->add_subcommand("enabled", "list enabled activities");
  ie->add_option("id", a.id)->required();
  CLI::App* ifi = item->add_subcommand("fire", "fire an activity event");
  ifi->add_option("id", a.id)->required();
  ifi->add_option("activity", a.activity)->required();
  ifi->add_option("kind", a.verb_kind)->required();
  ifi->add_option("--outcome", a.outcome_file);
  ifi->add_option("--agent", a.agent);
  CLI::App* im = item->add_subcommand("migrate", "migrate to a version");
  im->add_option("id", a.id)->required();
  im->add_option("version", a.version)->required();
  im->add_flag("--dry-run", a.dry_run);
  CLI::App* ia = item->add_subcommand("adhoc", "apply an ad-hoc delta");
  ia->add_option("id", a.id)->required();
  ia->add_option("delta", a.delta_file)->required();

  CLI::App* conn = app.add_subcommand("connector", "EAI connectors");
  conn->require_subcommand(1);
  CLI::App* cd = conn->add_subcommand("deploy", "deploy a connector");
  cd->add_option("file", a.file)->required();

  CLI::App* b = app.add_subcommand("bus", "transport bus");
  b->require_subcommand(1);
  CLI::App* bo = b->add_subcommand("open", "open an endpoint");
  bo->add_option("endpoint", a.endpoint)->required();
  bo->add_option("mode", a.verb_kind)->required();
  CLI::App* bs = b->add_subcommand("send", "send a message");
  bs->add_option("endpoint", a.endpoint)->required();
  bs->add_option("file", a.file)->required();
  CLI::App* bst = b->add_subcommand("step", "deliver pending messages");
  bst->add_option("--seed", a.seed);
  bst->add_option("--count", a.count);

  CLI::App* rp = app.add_subcommand("replay", "verify log replay");
  rp->add_option("id", a.id)->required();

  CLI::App* sn = app.add_subcommand("snapshot", "archive the system");
  sn->add_option("archive", a.archive)->required();
  CLI::App* rs = app.add_subcommand("restore", "restore from archive");
  rs->add_option("archive", a.archive)->required();

  CLI::App* sc = app.add_subcommand("script", "run a scenario script");
  sc->add_option("file", a.file)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      out << app.help();
      return 0;
    }
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  if (a.store_root.empty()) {
    const char* env = std::getenv("DDSFLOW_STORE");
    if (env) a.store_root = env;
  }
  if (a.store_root.empty()) {
    err << "usage error: no store (--store or DDSFLOW_STORE)\n";
    return 2;
  }

  try {
    if (app.got_subcommand("script"))
      return run_script(a.store_root, a.file, out, err);
    return dispatch(a, app, out);
  } catch (const Error& e) {
    err << "error " << errc_name(e.code()) << ": " << e.what() << "\n";
    if (!e.detail().is_null()) err << e.detail().dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ddsflow::cli
