#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace patchloom::statement {

/// A source line split into tokens. The canonical serialized form is the
/// tokens joined by single spaces.
struct TokenizedStatement {
  std::vector<std::string> tokens;
  std::string raw;

  std::string joined() const;
  std::size_t size() const { return tokens.size(); }
  bool operator==(const TokenizedStatement& other) const { return tokens == other.tokens; }
};

std::string join_tokens(const std::vector<std::string>& tokens);

enum class TokenizeError {
  unterminated_literal,
  empty,
};

struct TokenizeResult {
  std::optional<TokenizedStatement> statement;
  std::optional<TokenizeError> error;

  explicit operator bool() const { return statement.has_value(); }
};

/// Java statement tokenizer.
///
/// Identifiers, keywords and numeric literals are single tokens. String and
/// char literals are single opaque tokens including their quotes. Operators
/// use maximal munch, except that `>` never combines with a following `>`
/// so that nested generic closers stay separate (`>>` shifts come out as two
/// `>` tokens, `>>=` as `>` `>=`). `<` never combines with `>`, so the
/// diamond is `<` `>`. `//` comments and complete `/* */` comments are
/// stripped; an unclosed `/*` drops the rest of the line.
TokenizeResult tokenize(std::string_view raw);

/// Splits an already space-separated token line. Used for corpus files.
TokenizedStatement from_joined(std::string_view joined);

bool is_java_keyword(std::string_view word);
bool is_primitive_type(std::string_view word);
bool is_identifier(std::string_view token);
bool is_literal(std::string_view token);

}  // namespace patchloom::statement
