#pragma once

#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "patchloom/repo/repository.hpp"

namespace patchloom::repo {

/// A paired deletion/addition region of one commit, with the provenance the
/// corpus builder needs. `commit_pre_origin` is empty for pure additions.
struct ChangeHunk {
  std::vector<std::string> deleted_lines;
  std::vector<std::string> added_lines;
  std::string file_path;
  std::string commit_post;
  std::string commit_pre_origin;
  int year_pre = 0;
  int year_post = 0;
  bool method_scoped = false;

  bool is_pair() const { return !deleted_lines.empty() && !added_lines.empty(); }
  bool operator==(const ChangeHunk&) const = default;
};

struct BlameOrigin {
  std::string commit;
  int year = 0;
};

/// Line-level blame over the first-parent history of a repository. Results
/// are memoized per (commit, path); lookups are serialized internally.
class BlameIndex {
 public:
  explicit BlameIndex(const Repository& repo);

  /// Origin of raw line `line_index` of `path` as it exists in the parent of
  /// `commit_post`. nullopt means origin-unknown: the history crosses a
  /// rename, the line is blank or out of range, or the file is absent.
  std::optional<BlameOrigin> blame_origin(const std::string& commit_post,
                                          const std::string& path,
                                          std::size_t line_index);

  /// Origin of raw line `line_index` of `path` at `commit` itself.
  std::optional<BlameOrigin> origin_at(const std::string& commit,
                                       const std::string& path,
                                       std::size_t line_index);

 private:
  static constexpr int kUnknown = -1;
  using LineOrigins = std::vector<int>;  // per normalized line: commit index

  const LineOrigins& blame_file(std::size_t commit, const std::string& path);
  const std::vector<FileChange>& changes_of(std::size_t commit);

  const Repository& repo_;
  std::vector<CommitRecord> commits_;
  std::map<std::string, std::size_t> index_;
  std::map<std::size_t, std::vector<FileChange>> changes_cache_;
  std::map<std::pair<std::size_t, std::string>, LineOrigins> memo_;
  std::mutex mutex_;
};

/// Free-function form of BlameIndex::blame_origin for one-off queries.
std::optional<BlameOrigin> blame_origin(const Repository& repo,
                                        const std::string& commit_post,
                                        const std::string& path,
                                        std::size_t line_index);

struct MiningOptions {
  std::optional<int> since;
  std::optional<int> until;
  unsigned jobs = 1;
  /// Only files with this suffix are mined; empty mines everything.
  std::string suffix = ".java";
};

struct MiningReport {
  std::size_t commits_seen = 0;
  std::size_t commits_in_range = 0;
  std::size_t merges_skipped = 0;
  std::size_t files_modified = 0;
  std::size_t hunks = 0;
  std::size_t pair_hunks = 0;
  std::size_t origin_unknown = 0;
  std::size_t renames_skipped = 0;
  std::size_t scope_parse_warnings = 0;
};

/// Hunks of every modified file of every non-merge commit whose year lies in
/// [since, until], in (author_time, id, path, position) order. The output is
/// identical for every `jobs` value.
std::vector<ChangeHunk> mine_hunks(const Repository& repo, const MiningOptions& options,
                                   MiningReport* report = nullptr);

struct FixLink {
  std::string fixing_commit;
  std::string inducing_commit;

  auto operator<=>(const FixLink&) const = default;
};

/// Keyword step of SZZ: flags messages mentioning fix/bug/defect/patch as a
/// word (case-insensitive), or an issue key like ABC-123 next to "fix".
bool is_fix_message(const std::string& message);

std::set<std::string> identify_fix_commits(const std::vector<CommitRecord>& commits);

/// Hunks whose commit_post is a fixing commit.
std::vector<ChangeHunk> select_fix_hunks(const std::vector<ChangeHunk>& hunks,
                                         const std::set<std::string>& fixing);

/// One link per distinct (fixing commit, blamed origin) pair, sorted. Hunks
/// without a resolved origin are skipped.
std::vector<FixLink> link_inducing(const std::vector<ChangeHunk>& fix_hunks);

}  // namespace patchloom::repo
