#pragma once

#include <string>

#include "patchloom/statement/tokenizer.hpp"

namespace patchloom::statement {

/// True iff the tokens form one complete Java block statement that would
/// parse as the sole statement of a method body.
///
/// Covered: local variable declarations (generics, diamond, arrays,
/// `final`/annotations), expression statements (assignment, increments,
/// calls, `new`), return/throw/break/continue/assert, labeled statements,
/// one-line blocks, and control-flow headers (`if`, `else`, `for`, `while`,
/// `do`, `try`, `catch`, `finally`, `switch`, `synchronized`) whose body is
/// missing or an unclosed `{`, as if an empty body were synthesized. A
/// leading `}` is accepted before `else`, `catch`, `finally` and `while`.
/// Anonymous class bodies and block-bodied lambdas are rejected.
bool validate_statement(const TokenizedStatement& stmt);

/// Same check with a short diagnostic on failure (empty when valid).
std::string statement_diagnostic(const TokenizedStatement& stmt);

}  // namespace patchloom::statement
