#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "patchloom/repo/miner.hpp"

namespace patchloom::repo {

/// One JSON object per line with exactly the ChangeHunk fields.
std::string hunk_to_json(const ChangeHunk& hunk);
ChangeHunk hunk_from_json(const std::string& line);

void write_hunks(std::ostream& out, const std::vector<ChangeHunk>& hunks);
std::vector<ChangeHunk> read_hunks(std::istream& in);

/// Tab-separated `fixing_commit inducing_commit`, one link per line.
void write_fix_links(std::ostream& out, const std::vector<FixLink>& links);
std::vector<FixLink> read_fix_links(std::istream& in);

}  // namespace patchloom::repo
