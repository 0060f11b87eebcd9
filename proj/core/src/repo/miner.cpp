#include "patchloom/repo/miner.hpp"

#include <algorithm>
#include <atomic>
#include <regex>
#include <thread>

#include "patchloom/repo/diff.hpp"
#include "patchloom/repo/method_scope.hpp"

namespace patchloom::repo {

// ---------------------------------------------------------------- blame

BlameIndex::BlameIndex(const Repository& repo) : repo_(repo), commits_(ordered_commits(repo)) {
  for (std::size_t i = 0; i < commits_.size(); ++i) index_[commits_[i].id] = i;
}

const std::vector<FileChange>& BlameIndex::changes_of(std::size_t commit) {
  auto it = changes_cache_.find(commit);
  if (it != changes_cache_.end()) return it->second;
  return changes_cache_.emplace(commit, repo_.changes(commits_[commit])).first->second;
}

namespace {

NormalizedLines normalized_file(const Repository& repo, const std::string& commit,
                                const std::string& path) {
  auto content = repo.read_file(commit, path);
  if (!content) return {};
  return normalize_lines(split_lines(*content));
}

}  // namespace

const BlameIndex::LineOrigins& BlameIndex::blame_file(std::size_t commit,
                                                      const std::string& path) {
  // Walk back along first parents until a memoized entry or a base case,
  // then replay the diffs forward.
  std::vector<std::size_t> pending;
  std::size_t cur = commit;
  for (;;) {
    if (memo_.count({cur, path})) break;
    const auto& rec = commits_[cur];
    const auto& changes = changes_of(cur);
    auto fc = std::find_if(changes.begin(), changes.end(), [&](const FileChange& c) {
      return c.path == path && c.kind != ChangeKind::deleted;
    });
    std::optional<std::size_t> parent;
    if (!rec.parent_ids.empty()) {
      auto pit = index_.find(rec.parent_ids.front());
      if (pit != index_.end()) parent = pit->second;
    }
    const bool touched = fc != changes.end();
    if (touched && fc->kind == ChangeKind::renamed) {
      const auto lines = normalized_file(repo_, rec.id, path);
      memo_[{cur, path}] = LineOrigins(lines.lines.size(), kUnknown);
      break;
    }
    if ((touched && fc->kind == ChangeKind::added) || rec.parent_ids.empty()) {
      const auto lines = normalized_file(repo_, rec.id, path);
      memo_[{cur, path}] = LineOrigins(lines.lines.size(), static_cast<int>(cur));
      break;
    }
    if (!parent) {
      const auto lines = normalized_file(repo_, rec.id, path);
      memo_[{cur, path}] = LineOrigins(lines.lines.size(), kUnknown);
      break;
    }
    if (touched) pending.push_back(cur);
    cur = *parent;
  }

  const LineOrigins* prev = &memo_[{cur, path}];
  std::string prev_commit = commits_[cur].id;
  for (auto it = pending.rbegin(); it != pending.rend(); ++it) {
    const std::size_t c = *it;
    const auto before = normalized_file(repo_, prev_commit, path);
    const auto after = normalized_file(repo_, commits_[c].id, path);
    LineOrigins origins(after.lines.size(), static_cast<int>(c));
    const auto hunks = histogram_diff(before.lines, after.lines);
    for (auto [a, b] : unchanged_pairs(hunks, before.lines.size(), after.lines.size())) {
      origins[b] = a < prev->size() ? (*prev)[a] : kUnknown;
    }
    prev = &(memo_[{c, path}] = std::move(origins));
    prev_commit = commits_[c].id;
  }
  // `commit` may be an untouched descendant of `cur` or of the last pending.
  return *prev;
}

std::optional<BlameOrigin> BlameIndex::origin_at(const std::string& commit,
                                                 const std::string& path,
                                                 std::size_t line_index) {
  std::lock_guard lock(mutex_);
  auto cit = index_.find(commit);
  if (cit == index_.end()) return std::nullopt;
  const auto lines = normalized_file(repo_, commit, path);
  auto pos = std::lower_bound(lines.origin.begin(), lines.origin.end(), line_index);
  if (pos == lines.origin.end() || *pos != line_index) return std::nullopt;
  const auto norm_index = static_cast<std::size_t>(pos - lines.origin.begin());
  const auto& origins = blame_file(cit->second, path);
  if (norm_index >= origins.size() || origins[norm_index] == kUnknown) return std::nullopt;
  const auto& rec = commits_[static_cast<std::size_t>(origins[norm_index])];
  return BlameOrigin{rec.id, rec.year()};
}

std::optional<BlameOrigin> BlameIndex::blame_origin(const std::string& commit_post,
                                                    const std::string& path,
                                                    std::size_t line_index) {
  std::string parent;
  {
    std::lock_guard lock(mutex_);
    auto cit = index_.find(commit_post);
    if (cit == index_.end() || commits_[cit->second].parent_ids.empty()) {
      return std::nullopt;
    }
    parent = commits_[cit->second].parent_ids.front();
  }
  return origin_at(parent, path, line_index);
}

std::optional<BlameOrigin> blame_origin(const Repository& repo, const std::string& commit_post,
                                        const std::string& path, std::size_t line_index) {
  BlameIndex index(repo);
  return index.blame_origin(commit_post, path, line_index);
}

// ---------------------------------------------------------------- mining

namespace {

struct PendingHunk {
  ChangeHunk hunk;
  std::optional<std::size_t> first_deleted_raw;
};

struct CommitResult {
  std::vector<PendingHunk> hunks;
  std::size_t files_modified = 0;
  std::size_t renames_skipped = 0;
  std::size_t scope_parse_warnings = 0;
};

bool has_suffix(const std::string& path, const std::string& suffix) {
  return path.size() >= suffix.size() &&
         path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
}

CommitResult mine_commit(const Repository& repo, const CommitRecord& commit,
                         const std::string& suffix) {
  CommitResult result;
  auto changes = repo.changes(commit);
  std::sort(changes.begin(), changes.end(),
            [](const FileChange& a, const FileChange& b) { return a.path < b.path; });
  const std::string& parent = commit.parent_ids.front();
  for (const auto& fc : changes) {
    if (!has_suffix(fc.path, suffix)) continue;
    if (fc.kind == ChangeKind::renamed) {
      ++result.renames_skipped;
      continue;
    }
    if (fc.kind != ChangeKind::modified) continue;
    auto pre_text = repo.read_file(parent, fc.path);
    auto post_text = repo.read_file(commit.id, fc.path);
    if (!pre_text || !post_text) continue;
    ++result.files_modified;

    const auto pre_raw = split_lines(*pre_text);
    const auto post_raw = split_lines(*post_text);
    const auto pre = normalize_lines(pre_raw);
    const auto post = normalize_lines(post_raw);
    const auto pre_methods = scan_methods(pre_raw);
    const auto post_methods = scan_methods(post_raw);
    const bool scopes_ok = pre_methods && post_methods;
    if (!scopes_ok) ++result.scope_parse_warnings;

    for (const auto& raw : histogram_diff(pre.lines, post.lines)) {
      PendingHunk ph;
      auto& h = ph.hunk;
      h.file_path = fc.path;
      h.commit_post = commit.id;
      h.year_post = commit.year();
      std::vector<std::size_t> del_idx, add_idx;
      for (std::size_t k = 0; k < raw.del_count; ++k) {
        const auto idx = pre.origin[raw.del_start + k];
        del_idx.push_back(idx);
        h.deleted_lines.push_back(pre_raw[idx]);
      }
      for (std::size_t k = 0; k < raw.add_count; ++k) {
        const auto idx = post.origin[raw.add_start + k];
        add_idx.push_back(idx);
        h.added_lines.push_back(post_raw[idx]);
      }
      if (!del_idx.empty()) ph.first_deleted_raw = del_idx.front();
      if (scopes_ok) {
        const MethodRange* before = enclosing_method(*pre_methods, del_idx);
        const MethodRange* after = enclosing_method(*post_methods, add_idx);
        if (del_idx.empty()) {
          h.method_scoped = after != nullptr;
        } else if (add_idx.empty()) {
          h.method_scoped = before != nullptr;
        } else {
          h.method_scoped = before && after && before->name == after->name;
        }
      }
      result.hunks.push_back(std::move(ph));
    }
  }
  return result;
}

}  // namespace

std::vector<ChangeHunk> mine_hunks(const Repository& repo, const MiningOptions& options,
                                   MiningReport* report) {
  MiningReport local;
  MiningReport& rep = report ? *report : local;
  rep = {};

  const auto commits = ordered_commits(repo);
  rep.commits_seen = commits.size();
  std::vector<const CommitRecord*> selected;
  for (const auto& c : commits) {
    const int y = c.year();
    if (options.since && y < *options.since) continue;
    if (options.until && y > *options.until) continue;
    ++rep.commits_in_range;
    if (c.is_merge()) {
      ++rep.merges_skipped;
      continue;
    }
    if (c.parent_ids.empty()) continue;  // root commits only add files
    selected.push_back(&c);
  }

  std::vector<CommitResult> results(selected.size());
  const unsigned jobs = std::max(1u, options.jobs);
  if (jobs == 1 || selected.size() < 2) {
    for (std::size_t i = 0; i < selected.size(); ++i) {
      results[i] = mine_commit(repo, *selected[i], options.suffix);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < selected.size(); i = next++) {
          results[i] = mine_commit(repo, *selected[i], options.suffix);
        }
      });
    }
    for (auto& t : workers) t.join();
  }

  // Blame runs serially in commit order so memoization is deterministic.
  BlameIndex blame(repo);
  std::vector<ChangeHunk> out;
  for (auto& r : results) {
    rep.files_modified += r.files_modified;
    rep.renames_skipped += r.renames_skipped;
    rep.scope_parse_warnings += r.scope_parse_warnings;
    for (auto& ph : r.hunks) {
      auto& h = ph.hunk;
      if (ph.first_deleted_raw) {
        auto origin = blame.blame_origin(h.commit_post, h.file_path, *ph.first_deleted_raw);
        if (!origin) {
          ++rep.origin_unknown;
          continue;
        }
        h.commit_pre_origin = origin->commit;
        h.year_pre = std::min(origin->year, h.year_post);
      } else {
        h.year_pre = h.year_post;
      }
      ++rep.hunks;
      if (h.is_pair()) ++rep.pair_hunks;
      out.push_back(std::move(h));
    }
  }
  return out;
}

// ---------------------------------------------------------------- SZZ

bool is_fix_message(const std::string& message) {
  static const std::regex keyword(
      R"(\b(fix(e[sd]|ing)?|bugs?|defects?|patch(e[sd]|ing)?)\b)",
      std::regex::icase | std::regex::ECMAScript);
  static const std::regex issue_key(R"(\b[A-Z]+-[0-9]+\b)");
  static const std::regex fix_fragment("fix", std::regex::icase);
  if (std::regex_search(message, keyword)) return true;
  return std::regex_search(message, issue_key) && std::regex_search(message, fix_fragment);
}

std::set<std::string> identify_fix_commits(const std::vector<CommitRecord>& commits) {
  std::set<std::string> fixing;
  for (const auto& c : commits) {
    if (is_fix_message(c.message)) fixing.insert(c.id);
  }
  return fixing;
}

std::vector<ChangeHunk> select_fix_hunks(const std::vector<ChangeHunk>& hunks,
                                         const std::set<std::string>& fixing) {
  std::vector<ChangeHunk> out;
  for (const auto& h : hunks) {
    if (fixing.count(h.commit_post)) out.push_back(h);
  }
  return out;
}

std::vector<FixLink> link_inducing(const std::vector<ChangeHunk>& fix_hunks) {
  std::set<FixLink> links;
  for (const auto& h : fix_hunks) {
    if (h.commit_pre_origin.empty()) continue;
    links.insert({h.commit_post, h.commit_pre_origin});
  }
  return {links.begin(), links.end()};
}

}  // namespace patchloom::repo
