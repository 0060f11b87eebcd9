#pragma once

#include <string>
#include <vector>

#include "patchloom/statement/tokenizer.hpp"

namespace patchloom::statement {

inline constexpr const char* kArgToken = "arg";
inline constexpr const char* kValToken = "val";

enum class SlotKind { method_argument, array_index };

/// Verbatim contents of one abstracted argument list or index expression.
struct ArgumentEntry {
  std::size_t call_index = 0;  // left-to-right position among abstracted slots
  SlotKind kind = SlotKind::method_argument;
  std::string callee;  // method/constructor name, or the indexed array's name
  std::vector<std::string> tokens;

  std::string original_text() const { return join_tokens(tokens); }
  bool operator==(const ArgumentEntry&) const = default;
};

struct ArgumentTable {
  std::vector<ArgumentEntry> entries;

  bool empty() const { return entries.empty(); }
  std::vector<std::string> callee_names() const;
  bool operator==(const ArgumentTable&) const = default;
};

struct Abstraction {
  TokenizedStatement abstracted;
  ArgumentTable args;
  /// False when parentheses or brackets do not balance. Braces are left to
  /// the validator since statement lines open and close blocks.
  bool balanced = true;
};

/// Collapses every non-empty method/constructor argument list to `( arg )`
/// and every non-empty array index expression to `[ val ]`. Only the
/// outermost list of a nesting is collapsed. An index consisting of a single
/// integer literal is kept verbatim so constant changes stay learnable.
Abstraction abstract_arguments(const TokenizedStatement& stmt);

struct Reinsertion {
  TokenizedStatement statement;
  std::size_t placeholders = 0;
  std::size_t filled = 0;
  /// `val` placeholders that received no contents and became `[ ]`.
  std::size_t empty_index_slots = 0;
};

/// Fills `arg`/`val` placeholders of a generated statement from the query's
/// table: first by callee name, then the remaining placeholders take the
/// unused query entries in left-to-right order, and whatever is left
/// becomes an empty list.
Reinsertion reinsert_arguments(const TokenizedStatement& generated,
                               const ArgumentTable& query_args);

}  // namespace patchloom::statement
