#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace patchloom::repo {

/// A method body located by the brace scanner. Lines are 0-based raw line
/// indices of the opening and closing brace.
struct MethodRange {
  std::string name;
  std::size_t open_line = 0;
  std::size_t close_line = 0;

  /// True when `line` lies strictly between the braces.
  bool encloses(std::size_t line) const {
    return line > open_line && line < close_line;
  }
};

/// Lightweight brace/signature scanner over one Java file version. Only
/// members declared directly in a class, interface, enum or record body are
/// reported; bodies of anonymous and local classes stay part of their
/// enclosing method. Returns nullopt on unbalanced braces or unterminated
/// comments/literals.
std::optional<std::vector<MethodRange>> scan_methods(
    const std::vector<std::string>& lines);

/// The method whose body strictly encloses every given line, if any.
const MethodRange* enclosing_method(const std::vector<MethodRange>& methods,
                                    const std::vector<std::size_t>& lines);

}  // namespace patchloom::repo
