#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace patchloom::repo {

/// A maximal contiguous changed region with zero context lines.
/// Ranges index into the sequences handed to histogram_diff.
struct RawHunk {
  std::size_t del_start = 0;
  std::size_t del_count = 0;
  std::size_t add_start = 0;
  std::size_t add_count = 0;

  bool operator==(const RawHunk&) const = default;
};

/// Collapses runs of blanks/tabs into one space and trims both ends.
std::string normalize_whitespace(std::string_view line);

/// A line sequence after whitespace normalization with blank lines dropped.
/// `origin[i]` is the index of normalized line i in the raw input.
struct NormalizedLines {
  std::vector<std::string> lines;
  std::vector<std::size_t> origin;
};

NormalizedLines normalize_lines(const std::vector<std::string>& raw);

/// Splits text on '\n' (a trailing '\r' is dropped). A final newline does
/// not produce an extra empty line.
std::vector<std::string> split_lines(std::string_view text);

/// Histogram diff (the git/JGit variant): recursively anchors on the
/// lowest-occurrence common line, falling back to Myers when every common
/// line is too frequent. Inputs are compared verbatim.
std::vector<RawHunk> histogram_diff(const std::vector<std::string>& pre,
                                    const std::vector<std::string>& post);

/// Lines equal in both sequences, as (pre index, post index), derived from
/// the hunk list. Used by blame to carry line identity across a revision.
std::vector<std::pair<std::size_t, std::size_t>> unchanged_pairs(
    const std::vector<RawHunk>& hunks, std::size_t pre_size,
    std::size_t post_size);

}  // namespace patchloom::repo
