#include "patchloom/repo/hunk_io.hpp"

#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

namespace patchloom::repo {

using nlohmann::ordered_json;

std::string hunk_to_json(const ChangeHunk& h) {
  ordered_json j;
  j["deleted_lines"] = h.deleted_lines;
  j["added_lines"] = h.added_lines;
  j["file_path"] = h.file_path;
  j["commit_post"] = h.commit_post;
  j["commit_pre_origin"] = h.commit_pre_origin;
  j["year_pre"] = h.year_pre;
  j["year_post"] = h.year_post;
  j["method_scoped"] = h.method_scoped;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

ChangeHunk hunk_from_json(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  ChangeHunk h;
  j.at("deleted_lines").get_to(h.deleted_lines);
  j.at("added_lines").get_to(h.added_lines);
  j.at("file_path").get_to(h.file_path);
  j.at("commit_post").get_to(h.commit_post);
  j.at("commit_pre_origin").get_to(h.commit_pre_origin);
  j.at("year_pre").get_to(h.year_pre);
  j.at("year_post").get_to(h.year_post);
  j.at("method_scoped").get_to(h.method_scoped);
  return h;
}

void write_hunks(std::ostream& out, const std::vector<ChangeHunk>& hunks) {
  for (const auto& h : hunks) out << hunk_to_json(h) << '\n';
}

std::vector<ChangeHunk> read_hunks(std::istream& in) {
  std::vector<ChangeHunk> hunks;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    hunks.push_back(hunk_from_json(line));
  }
  return hunks;
}

void write_fix_links(std::ostream& out, const std::vector<FixLink>& links) {
  for (const auto& l : links) out << l.fixing_commit << '\t' << l.inducing_commit << '\n';
}

std::vector<FixLink> read_fix_links(std::istream& in) {
  std::vector<FixLink> links;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    links.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return links;
}

}  // namespace patchloom::repo
