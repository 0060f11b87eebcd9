#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace patchloom::repo {

class RepositoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommitRecord {
  std::string id;
  std::int64_t author_time = 0;  // seconds since the Unix epoch, UTC
  std::string message;
  std::vector<std::string> parent_ids;

  int year() const;
  bool is_merge() const { return parent_ids.size() > 1; }
};

int year_of(std::int64_t unix_seconds);

enum class ChangeKind { added, modified, deleted, renamed };

/// One file touched by a commit, relative to its first parent.
struct FileChange {
  ChangeKind kind = ChangeKind::modified;
  std::string path;      // path in the commit (old path for deletions)
  std::string old_path;  // set for renames
};

/// Read-only view of a version-control history. Implementations must be
/// safe for concurrent const calls.
class Repository {
 public:
  virtual ~Repository() = default;

  /// Every commit reachable from the tip, in any order.
  virtual std::vector<CommitRecord> commits() const = 0;

  /// Files changed by `commit` against its first parent. A root commit
  /// reports every file as added.
  virtual std::vector<FileChange> changes(const CommitRecord& commit) const = 0;

  virtual std::optional<std::string> read_file(const std::string& commit,
                                               const std::string& path) const = 0;
};

/// Commits sorted by (author_time, id): the deterministic traversal order.
std::vector<CommitRecord> ordered_commits(const Repository& repo);

/// In-memory history with full snapshots per commit. Backs the tests and the
/// synthetic repository generator.
class MemoryRepository final : public Repository {
 public:
  struct CommitSpec {
    std::string id;
    std::int64_t author_time = 0;
    std::string message;
    std::vector<std::string> parent_ids;
    /// path -> new content; nullopt deletes the file.
    std::map<std::string, std::optional<std::string>> writes;
    /// new path -> old path; content follows the old file unless also written.
    std::map<std::string, std::string> renames;
  };

  /// Parents must be added before children.
  void add_commit(CommitSpec spec);

  std::vector<CommitRecord> commits() const override;
  std::vector<FileChange> changes(const CommitRecord& commit) const override;
  std::optional<std::string> read_file(const std::string& commit,
                                       const std::string& path) const override;

 private:
  struct Stored {
    CommitRecord record;
    std::map<std::string, std::shared_ptr<const std::string>> tree;
    std::vector<FileChange> changes;
  };
  const Stored& find(const std::string& id) const;

  std::vector<Stored> commits_;
  std::map<std::string, std::size_t> index_;
};

/// Shells out to the `git` executable with fixed flags. Every call spawns its
/// own process, so concurrent reads are safe.
class GitRepository final : public Repository {
 public:
  /// Throws RepositoryError when `path` is not a readable git work tree.
  explicit GitRepository(std::string path);

  std::vector<CommitRecord> commits() const override;
  std::vector<FileChange> changes(const CommitRecord& commit) const override;
  std::optional<std::string> read_file(const std::string& commit,
                                       const std::string& path) const override;

 private:
  std::string path_;
};

/// Runs argv (no shell) and returns (exit status, stdout).
std::pair<int, std::string> run_process(const std::vector<std::string>& argv);

}  // namespace patchloom::repo
