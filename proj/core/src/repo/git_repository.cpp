#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstdlib>
#include <fcntl.h>

#include "patchloom/repo/repository.hpp"

namespace patchloom::repo {

std::pair<int, std::string> run_process(const std::vector<std::string>& argv) {
  if (argv.empty()) throw RepositoryError("empty command");
  int fds[2];
  if (pipe(fds) != 0) throw RepositoryError("pipe() failed");

  const pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    throw RepositoryError("fork() failed");
  }
  if (pid == 0) {
    dup2(fds[1], STDOUT_FILENO);
    const int devnull = open("/dev/null", O_WRONLY);
    if (devnull >= 0) dup2(devnull, STDERR_FILENO);
    close(fds[0]);
    close(fds[1]);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execvp(args[0], args.data());
    _exit(127);
  }
  close(fds[1]);
  std::string out;
  std::array<char, 65536> buf{};
  for (;;) {
    const ssize_t n = read(fds[0], buf.data(), buf.size());
    if (n > 0) {
      out.append(buf.data(), static_cast<std::size_t>(n));
    } else if (n == 0 || errno != EINTR) {
      break;
    }
  }
  close(fds[0]);
  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, std::move(out)};
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    auto end = text.find(sep, start);
    if (end == std::string::npos) {
      parts.push_back(text.substr(start));
      break;
    }
    parts.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \n\r\t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \n\r\t");
  return s.substr(b, e - b + 1);
}

}  // namespace

GitRepository::GitRepository(std::string path) : path_(std::move(path)) {
  auto [code, out] =
      run_process({"git", "-C", path_, "rev-parse", "--is-inside-work-tree"});
  if (code != 0 || trim(out) != "true") {
    throw RepositoryError("not a readable git repository: " + path_);
  }
}

std::vector<CommitRecord> GitRepository::commits() const {
  auto [code, out] = run_process({"git", "-C", path_, "log", "HEAD",
                                  "--format=%H%x1f%at%x1f%P%x1f%B%x1e"});
  if (code != 0) throw RepositoryError("git log failed in " + path_);
  std::vector<CommitRecord> commits;
  for (auto& record : split(out, '\x1e')) {
    record = trim(record);
    if (record.empty()) continue;
    auto fields = split(record, '\x1f');
    if (fields.size() < 4) throw RepositoryError("malformed git log record");
    CommitRecord c;
    c.id = fields[0];
    c.author_time = std::strtoll(fields[1].c_str(), nullptr, 10);
    for (auto& p : split(trim(fields[2]), ' ')) {
      if (!p.empty()) c.parent_ids.push_back(p);
    }
    c.message = trim(fields[3]);
    commits.push_back(std::move(c));
  }
  return commits;
}

std::vector<FileChange> GitRepository::changes(const CommitRecord& commit) const {
  std::vector<std::string> argv = {"git", "-C", path_, "diff-tree", "-r",
                                   "--no-commit-id", "--name-status", "-M", "-z"};
  if (commit.parent_ids.empty()) {
    argv.push_back("--root");
    argv.push_back(commit.id);
  } else {
    argv.push_back(commit.parent_ids.front());
    argv.push_back(commit.id);
  }
  auto [code, out] = run_process(argv);
  if (code != 0) throw RepositoryError("git diff-tree failed for " + commit.id);

  std::vector<FileChange> changes;
  auto fields = split(out, '\0');
  for (std::size_t i = 0; i < fields.size();) {
    const std::string status = fields[i];
    if (status.empty()) {
      ++i;
      continue;
    }
    FileChange fc;
    if (status[0] == 'R' || status[0] == 'C') {
      if (i + 2 >= fields.size()) break;
      fc.kind = status[0] == 'R' ? ChangeKind::renamed : ChangeKind::added;
      fc.old_path = fields[i + 1];
      fc.path = fields[i + 2];
      i += 3;
    } else {
      if (i + 1 >= fields.size()) break;
      switch (status[0]) {
        case 'A': fc.kind = ChangeKind::added; break;
        case 'D': fc.kind = ChangeKind::deleted; break;
        default: fc.kind = ChangeKind::modified; break;
      }
      fc.path = fields[i + 1];
      i += 2;
    }
    changes.push_back(std::move(fc));
  }
  return changes;
}

std::optional<std::string> GitRepository::read_file(const std::string& commit,
                                                    const std::string& path) const {
  auto [code, out] =
      run_process({"git", "-C", path_, "cat-file", "blob", commit + ":" + path});
  if (code != 0) return std::nullopt;
  return out;
}

}  // namespace patchloom::repo
