#include "patchloom/statement/tokenizer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace patchloom::statement {

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::string TokenizedStatement::joined() const { return join_tokens(tokens); }

namespace {

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$' ||
         (static_cast<unsigned char>(c) & 0x80) != 0;
}

bool ident_part(char c) {
  return ident_start(c) || std::isdigit(static_cast<unsigned char>(c));
}

// Longest first so the scan below implements maximal munch.
constexpr std::array<std::string_view, 28> kOperators = {
    "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=",
    "+=",  "-=",  "*=", "/=", "%=", "&=", "^=", "|=", "<<", "(",  ")",  "[",
    "]",   "{",   "}",  ";"};

std::size_t scan_number(std::string_view s, std::size_t i) {
  const std::size_t start = i;
  if (s[i] == '0' && i + 1 < s.size() && (s[i + 1] == 'x' || s[i + 1] == 'X' ||
                                          s[i + 1] == 'b' || s[i + 1] == 'B')) {
    i += 2;
    while (i < s.size() && (std::isxdigit(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
    if (i < s.size() && (s[i] == 'l' || s[i] == 'L')) ++i;
    return i;
  }
  auto digits = [&] {
    while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
  };
  digits();
  if (i < s.size() && s[i] == '.' && (i + 1 >= s.size() || s[i + 1] != '.')) {
    // `1.` and `1.5` are numbers, `1.foo` is not valid Java anyway.
    if (i + 1 < s.size() && ident_start(s[i + 1]) && s[i + 1] != 'e' && s[i + 1] != 'E' &&
        s[i + 1] != 'f' && s[i + 1] != 'F' && s[i + 1] != 'd' && s[i + 1] != 'D') {
      return i;
    }
    ++i;
    digits();
  }
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    std::size_t j = i + 1;
    if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
    if (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
      i = j;
      digits();
    }
  }
  if (i < s.size() && std::string_view("lLfFdD").find(s[i]) != std::string_view::npos) ++i;
  return i > start ? i : start + 1;
}

}  // namespace

TokenizeResult tokenize(std::string_view raw) {
  TokenizeResult result;
  TokenizedStatement stmt;
  stmt.raw = std::string(raw);
  std::size_t i = 0;
  const std::string_view s = raw;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') break;
    if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
      const auto close = s.find("*/", i + 2);
      if (close == std::string_view::npos) break;
      i = close + 2;
      continue;
    }
    if (c == '"' || c == '\'') {
      std::size_t j = i + 1;
      bool closed = false;
      while (j < s.size()) {
        if (s[j] == '\\') {
          j += 2;
          continue;
        }
        if (s[j] == c) {
          closed = true;
          break;
        }
        ++j;
      }
      if (!closed) {
        result.error = TokenizeError::unterminated_literal;
        return result;
      }
      stmt.tokens.emplace_back(s.substr(i, j + 1 - i));
      i = j + 1;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      const auto end = scan_number(s, i);
      stmt.tokens.emplace_back(s.substr(i, end - i));
      i = end;
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i + 1;
      while (j < s.size() && ident_part(s[j])) ++j;
      stmt.tokens.emplace_back(s.substr(i, j - i));
      i = j;
      continue;
    }
    if (c == '>') {
      // `>=` munches only when it cannot be closing a generic list.
      if (i + 1 < s.size() && s[i + 1] == '=') {
        stmt.tokens.emplace_back(">=");
        i += 2;
      } else {
        stmt.tokens.emplace_back(">");
        ++i;
      }
      continue;
    }
    bool matched = false;
    for (auto op : kOperators) {
      if (s.substr(i, op.size()) == op) {
        stmt.tokens.emplace_back(op);
        i += op.size();
        matched = true;
        break;
      }
    }
    if (!matched) {
      stmt.tokens.emplace_back(1, c);
      ++i;
    }
  }
  if (stmt.tokens.empty()) {
    result.error = TokenizeError::empty;
    return result;
  }
  result.statement = std::move(stmt);
  return result;
}

TokenizedStatement from_joined(std::string_view joined) {
  TokenizedStatement stmt;
  stmt.raw = std::string(joined);
  std::size_t i = 0;
  while (i < joined.size()) {
    while (i < joined.size() && joined[i] == ' ') ++i;
    if (i >= joined.size()) break;
    // String literals may contain spaces.
    if (joined[i] == '"' || joined[i] == '\'') {
      const char q = joined[i];
      std::size_t j = i + 1;
      while (j < joined.size() && joined[j] != q) j += joined[j] == '\\' ? 2 : 1;
      j = std::min(j + 1, joined.size());
      stmt.tokens.emplace_back(joined.substr(i, j - i));
      i = j;
      continue;
    }
    std::size_t j = joined.find(' ', i);
    if (j == std::string_view::npos) j = joined.size();
    stmt.tokens.emplace_back(joined.substr(i, j - i));
    i = j;
  }
  return stmt;
}

bool is_java_keyword(std::string_view w) {
  static constexpr std::array<std::string_view, 53> kKeywords = {
      "abstract", "assert",     "boolean",   "break",     "byte",      "case",
      "catch",    "char",       "class",     "const",     "continue",  "default",
      "do",       "double",     "else",      "enum",      "extends",   "final",
      "finally",  "float",      "for",       "goto",      "if",        "implements",
      "import",   "instanceof", "int",       "interface", "long",      "native",
      "new",      "package",    "private",   "protected", "public",    "return",
      "short",    "static",     "strictfp",  "super",     "switch",    "synchronized",
      "this",     "throw",      "throws",    "transient", "try",       "void",
      "volatile", "while",      "true",      "false",     "null"};
  return std::find(kKeywords.begin(), kKeywords.end(), w) != kKeywords.end();
}

bool is_primitive_type(std::string_view w) {
  return w == "boolean" || w == "byte" || w == "char" || w == "short" || w == "int" ||
         w == "long" || w == "float" || w == "double";
}

bool is_identifier(std::string_view t) {
  if (t.empty() || !ident_start(t[0])) return false;
  for (char c : t) {
    if (!ident_part(c)) return false;
  }
  return !is_java_keyword(t);
}

bool is_literal(std::string_view t) {
  if (t.empty()) return false;
  if (t[0] == '"' || t[0] == '\'') return true;
  if (std::isdigit(static_cast<unsigned char>(t[0]))) return true;
  if (t[0] == '.' && t.size() > 1 && std::isdigit(static_cast<unsigned char>(t[1]))) return true;
  return t == "true" || t == "false" || t == "null";
}

}  // namespace patchloom::statement
