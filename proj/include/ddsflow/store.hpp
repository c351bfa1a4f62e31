#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace ddsflow::store {

// DDSNAP1 archive of a directory tree (sorted, deterministic).
void archive_tree(const std::filesystem::path& root,
                  const std::filesystem::path& archive);
void restore_tree(const std::filesystem::path& archive,
                  const std::filesystem::path& root);

// Append-only record logs on plain files plus a directory index.
// Layout: <root>/<log_key>.rec (length-prefixed records) and
// <root>/index.dir (sorted "key\tref" lines, replaced atomically).
// The record write is the commit point; recovery re-indexes records
// that have no index entry.
class Store {
 public:
  explicit Store(std::filesystem::path root);

  uint64_t append(const std::string& log_key, const std::string& record);
  std::vector<std::string> read_all(const std::string& log_key) const;
  bool log_exists(const std::string& log_key) const;

  void put_index(const std::string& key, const std::string& storage_ref);
  std::optional<std::string> get_index(const std::string& key) const;
  std::vector<std::string> index_keys(const std::string& prefix) const;

  void recover();

  void snapshot(const std::filesystem::path& archive) const;
  static void restore(const std::filesystem::path& archive,
                      const std::filesystem::path& root);

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path log_path(const std::string& log_key) const;
  void load_index();
  void flush_index() const;

  std::filesystem::path root_;
  std::map<std::string, std::string> index_;
  mutable std::mutex mu_;
};

}  // namespace ddsflow::store
