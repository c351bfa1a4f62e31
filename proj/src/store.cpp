#include "ddsflow/store.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ddsflow/error.hpp"

namespace ddsflow::store {

namespace fs = std::filesystem;

Store::Store(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw Error(Errc::IO_ERROR, "cannot create " + root_.string());
  load_index();
  recover();
}

fs::path Store::log_path(const std::string& log_key) const {
  return root_ / (log_key + ".rec");
}

static std::string frame(const std::string& record) {
  char head[16];
  std::snprintf(head, sizeof head, "%010zu\n", record.size());
  return std::string(head) + record + "\n";
}

uint64_t Store::append(const std::string& log_key, const std::string& record) {
  std::lock_guard lock(mu_);
  fs::path p = log_path(log_key);
  fs::create_directories(p.parent_path());
  uint64_t seq = 0;
  {
    // count existing records for the returned sequence number
    std::ifstream in(p, std::ios::binary);
    std::string head(11, '\0');
    while (in.read(head.data(), 11)) {
      size_t len = std::stoul(head.substr(0, 10));
      in.seekg((std::streamoff)len + 1, std::ios::cur);
      if (!in) break;
      ++seq;
    }
  }
  std::ofstream out(p, std::ios::binary | std::ios::app);
  if (!out) throw Error(Errc::IO_ERROR, "cannot open " + p.string());
  out << frame(record);
  out.flush();
  if (!out) throw Error(Errc::IO_ERROR, "write failed on " + p.string());
  return seq + 1;
}

std::vector<std::string> Store::read_all(const std::string& log_key) const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  std::ifstream in(log_path(log_key), std::ios::binary);
  if (!in) return out;
  std::string head(11, '\0');
  while (in.read(head.data(), 11)) {
    if (head[10] != '\n') break;  // torn tail, ignore
    size_t len = 0;
    try {
      len = std::stoul(head.substr(0, 10));
    } catch (...) {
      break;
    }
    std::string rec(len, '\0');
    if (!in.read(rec.data(), (std::streamsize)len)) break;
    char nl = 0;
    if (!in.get(nl) || nl != '\n') break;
    out.push_back(std::move(rec));
  }
  return out;
}

bool Store::log_exists(const std::string& log_key) const {
  return fs::exists(log_path(log_key));
}

void Store::put_index(const std::string& key, const std::string& ref) {
  std::lock_guard lock(mu_);
  index_[key] = ref;
  flush_index();
}

std::optional<std::string> Store::get_index(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Store::index_keys(const std::string& prefix) const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [k, v] : index_)
    if (k.compare(0, prefix.size(), prefix) == 0) out.push_back(k);
  return out;
}

void Store::load_index() {
  index_.clear();
  std::ifstream in(root_ / "index.dir");
  std::string line;
  while (std::getline(in, line)) {
    size_t tab = line.find('\t');
    if (tab == std::string::npos) continue;
    index_[line.substr(0, tab)] = line.substr(tab + 1);
  }
}

void Store::flush_index() const {
  fs::path tmp = root_ / "index.dir.tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    for (const auto& [k, v] : index_) out << k << '\t' << v << '\n';
    out.flush();
    if (!out) throw Error(Errc::IO_ERROR, "cannot write index");
  }
  std::error_code ec;
  fs::rename(tmp, root_ / "index.dir", ec);
  if (ec) throw Error(Errc::IO_ERROR, "cannot replace index");
}

void Store::recover() {
  std::lock_guard lock(mu_);
  bool dirty = false;
  for (auto it = fs::recursive_directory_iterator(root_);
       it != fs::recursive_directory_iterator(); ++it) {
    if (!it->is_regular_file() || it->path().extension() != ".rec") continue;
    std::string key =
        fs::relative(it->path(), root_).generic_string();
    key = key.substr(0, key.size() - 4);
    if (!index_.count(key)) {
      index_[key] = key + ".rec";
      dirty = true;
    }
  }
  if (dirty) flush_index();
}

void Store::snapshot(const fs::path& archive) const {
  std::lock_guard lock(mu_);
  archive_tree(root_, archive);
}

void Store::restore(const fs::path& archive, const fs::path& root) {
  restore_tree(archive, root);
}

void archive_tree(const fs::path& root, const fs::path& archive) {
  std::vector<fs::path> files;
  for (auto it = fs::recursive_directory_iterator(root);
       it != fs::recursive_directory_iterator(); ++it)
    if (it->is_regular_file()) files.push_back(it->path());
  std::sort(files.begin(), files.end());

  std::ofstream out(archive, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IO_ERROR, "cannot write " + archive.string());
  out << "DDSNAP1\n";
  for (const fs::path& f : files) {
    std::ifstream in(f, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string data = buf.str();
    std::string rel = fs::relative(f, root).generic_string();
    out << "F " << rel.size() << " " << data.size() << "\n" << rel << data;
  }
  out << "E\n";
  out.flush();
  if (!out) throw Error(Errc::IO_ERROR, "snapshot write failed");
}

void restore_tree(const fs::path& archive, const fs::path& root) {
  std::ifstream in(archive, std::ios::binary);
  if (!in) throw Error(Errc::IO_ERROR, "cannot read " + archive.string());
  std::string magic;
  if (!std::getline(in, magic) || magic != "DDSNAP1")
    throw Error(Errc::CORRUPT_ARCHIVE, "bad archive header");
  std::error_code ec;
  fs::remove_all(root, ec);
  fs::create_directories(root);
  std::string line;
  bool terminated = false;
  while (std::getline(in, line)) {
    if (line == "E") {
      terminated = true;
      break;
    }
    size_t plen = 0, dlen = 0;
    if (std::sscanf(line.c_str(), "F %zu %zu", &plen, &dlen) != 2)
      throw Error(Errc::CORRUPT_ARCHIVE, "bad entry header");
    std::string path(plen, '\0'), data(dlen, '\0');
    if (!in.read(path.data(), (std::streamsize)plen) ||
        !in.read(data.data(), (std::streamsize)dlen))
      throw Error(Errc::CORRUPT_ARCHIVE, "truncated archive");
    if (path.find("..") != std::string::npos)
      throw Error(Errc::CORRUPT_ARCHIVE, "bad entry path");
    fs::path dst = root / path;
    fs::create_directories(dst.parent_path());
    std::ofstream out(dst, std::ios::binary | std::ios::trunc);
    out << data;
    if (!out) throw Error(Errc::IO_ERROR, "restore write failed");
  }
  if (!terminated) throw Error(Errc::CORRUPT_ARCHIVE, "missing end marker");
}

}  // namespace ddsflow::store
