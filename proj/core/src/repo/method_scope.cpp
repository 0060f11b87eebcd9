#include "patchloom/repo/method_scope.hpp"

#include <cctype>

namespace patchloom::repo {
namespace {

enum class BlockKind { type_body, method_body, other };

struct Frame {
  BlockKind kind;
  std::size_t method_index;  // valid for method_body
};

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool has_word(const std::string& text, std::string_view word) {
  std::size_t pos = 0;
  while ((pos = text.find(word, pos)) != std::string::npos) {
    const bool left_ok =
        pos == 0 || (!is_ident_char(text[pos - 1]) && text[pos - 1] != '.');
    const std::size_t end = pos + word.size();
    const bool right_ok = end >= text.size() || !is_ident_char(text[end]);
    if (left_ok && right_ok) return true;
    pos = end;
  }
  return false;
}

// Drops `@Name` and `@Name(...)` annotations from a declaration header.
std::string strip_annotations(const std::string& header) {
  std::string out;
  for (std::size_t i = 0; i < header.size();) {
    if (header[i] != '@') {
      out += header[i++];
      continue;
    }
    ++i;
    while (i < header.size() && (is_ident_char(header[i]) || header[i] == '.' ||
                                 header[i] == ' ')) {
      if (header[i] == ' ') {
        std::size_t j = i;
        while (j < header.size() && header[j] == ' ') ++j;
        if (j < header.size() && header[j] == '(') {
          i = j;
          break;
        }
        break;
      }
      ++i;
    }
    if (i < header.size() && header[i] == '(') {
      int depth = 0;
      for (; i < header.size(); ++i) {
        if (header[i] == '(') ++depth;
        if (header[i] == ')' && --depth == 0) {
          ++i;
          break;
        }
      }
    }
    out += ' ';
  }
  return out;
}

bool declares_type(const std::string& raw_header) {
  const std::string header = strip_annotations(raw_header);
  if (header.find('=') != std::string::npos) return false;
  return has_word(header, "class") || has_word(header, "interface") ||
         has_word(header, "enum") || has_word(header, "record");
}

// Name of a method declaration header, or empty if the header is not one.
std::string method_name(const std::string& raw_header) {
  const std::string header = strip_annotations(raw_header);
  const auto paren = header.find('(');
  if (paren == std::string::npos) return {};
  const auto before = header.substr(0, paren);
  if (before.find('=') != std::string::npos) return {};
  if (has_word(before, "new")) return {};
  std::size_t end = before.find_last_not_of(' ');
  if (end == std::string::npos) return {};
  std::size_t begin = end + 1;
  while (begin > 0 && is_ident_char(before[begin - 1])) --begin;
  auto name = before.substr(begin, end + 1 - begin);
  if (name.empty() || std::isdigit(static_cast<unsigned char>(name[0]))) return {};
  static const char* const kControl[] = {"if",     "for",   "while", "switch",
                                         "catch",  "synchronized", "return",
                                         "try",    "do",    "else"};
  for (const char* kw : kControl) {
    if (name == kw) return {};
  }
  return name;
}

}  // namespace

std::optional<std::vector<MethodRange>> scan_methods(
    const std::vector<std::string>& lines) {
  std::vector<MethodRange> methods;
  std::vector<Frame> stack;
  std::string header;
  bool in_block_comment = false;

  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string& line = lines[ln];
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (in_block_comment) {
        if (c == '*' && i + 1 < line.size() && line[i + 1] == '/') {
          in_block_comment = false;
          ++i;
        }
        continue;
      }
      if (c == '/' && i + 1 < line.size() && line[i + 1] == '/') break;
      if (c == '/' && i + 1 < line.size() && line[i + 1] == '*') {
        in_block_comment = true;
        ++i;
        continue;
      }
      if (c == '"' || c == '\'') {
        std::size_t j = i + 1;
        while (j < line.size() && line[j] != c) {
          if (line[j] == '\\') ++j;
          ++j;
        }
        if (j >= line.size()) return std::nullopt;
        header += ' ';
        i = j;
        continue;
      }
      if (c == '{') {
        const bool at_type_level =
            !stack.empty() && stack.back().kind == BlockKind::type_body;
        if (declares_type(header) &&
            (stack.empty() || stack.back().kind == BlockKind::type_body)) {
          stack.push_back({BlockKind::type_body, 0});
        } else if (at_type_level) {
          auto name = method_name(header);
          if (!name.empty()) {
            methods.push_back({std::move(name), ln, 0});
            stack.push_back({BlockKind::method_body, methods.size() - 1});
          } else {
            stack.push_back({BlockKind::other, 0});
          }
        } else {
          stack.push_back({BlockKind::other, 0});
        }
        header.clear();
        continue;
      }
      if (c == '}') {
        if (stack.empty()) return std::nullopt;
        if (stack.back().kind == BlockKind::method_body) {
          methods[stack.back().method_index].close_line = ln;
        }
        stack.pop_back();
        header.clear();
        continue;
      }
      if (c == ';') {
        header.clear();
        continue;
      }
      header += c;
    }
    header += ' ';
  }
  if (!stack.empty() || in_block_comment) return std::nullopt;
  return methods;
}

const MethodRange* enclosing_method(const std::vector<MethodRange>& methods,
                                    const std::vector<std::size_t>& lines) {
  if (lines.empty()) return nullptr;
  for (const auto& m : methods) {
    bool all = true;
    for (auto l : lines) {
      if (!m.encloses(l)) {
        all = false;
        break;
      }
    }
    if (all) return &m;
  }
  return nullptr;
}

}  // namespace patchloom::repo
