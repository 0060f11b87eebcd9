#include "patchloom/repo/repository.hpp"

#include <algorithm>
#include <chrono>

namespace patchloom::repo {

int year_of(std::int64_t unix_seconds) {
  using namespace std::chrono;
  const sys_seconds tp{seconds{unix_seconds}};
  const year_month_day ymd{floor<days>(tp)};
  return static_cast<int>(ymd.year());
}

int CommitRecord::year() const { return year_of(author_time); }

std::vector<CommitRecord> ordered_commits(const Repository& repo) {
  auto commits = repo.commits();
  std::sort(commits.begin(), commits.end(),
            [](const CommitRecord& a, const CommitRecord& b) {
              if (a.author_time != b.author_time) return a.author_time < b.author_time;
              return a.id < b.id;
            });
  return commits;
}

void MemoryRepository::add_commit(CommitSpec spec) {
  if (spec.id.empty()) throw RepositoryError("commit id must be non-empty");
  if (index_.count(spec.id)) throw RepositoryError("duplicate commit " + spec.id);

  Stored stored;
  stored.record = {spec.id, spec.author_time, spec.message, spec.parent_ids};
  if (!spec.parent_ids.empty()) {
    stored.tree = find(spec.parent_ids.front()).tree;
  }
  const bool root = spec.parent_ids.empty();

  for (const auto& [new_path, old_path] : spec.renames) {
    auto it = stored.tree.find(old_path);
    if (it == stored.tree.end()) {
      throw RepositoryError("rename source missing: " + old_path);
    }
    auto content = it->second;
    stored.tree.erase(it);
    stored.tree[new_path] = std::move(content);
    stored.changes.push_back({ChangeKind::renamed, new_path, old_path});
  }
  for (auto& [path, content] : spec.writes) {
    const bool existed = stored.tree.count(path) > 0;
    if (!content) {
      if (!existed) throw RepositoryError("delete of missing file: " + path);
      stored.tree.erase(path);
      stored.changes.push_back({ChangeKind::deleted, path, {}});
      continue;
    }
    stored.tree[path] = std::make_shared<const std::string>(std::move(*content));
    if (spec.renames.count(path)) continue;
    stored.changes.push_back(
        {existed && !root ? ChangeKind::modified : ChangeKind::added, path, {}});
  }
  std::sort(stored.changes.begin(), stored.changes.end(),
            [](const FileChange& a, const FileChange& b) { return a.path < b.path; });
  index_[spec.id] = commits_.size();
  commits_.push_back(std::move(stored));
}

const MemoryRepository::Stored& MemoryRepository::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw RepositoryError("unknown commit " + id);
  return commits_[it->second];
}

std::vector<CommitRecord> MemoryRepository::commits() const {
  std::vector<CommitRecord> out;
  out.reserve(commits_.size());
  for (const auto& c : commits_) out.push_back(c.record);
  return out;
}

std::vector<FileChange> MemoryRepository::changes(const CommitRecord& commit) const {
  return find(commit.id).changes;
}

std::optional<std::string> MemoryRepository::read_file(const std::string& commit,
                                                       const std::string& path) const {
  const auto& tree = find(commit).tree;
  auto it = tree.find(path);
  if (it == tree.end()) return std::nullopt;
  return *it->second;
}

}  // namespace patchloom::repo
