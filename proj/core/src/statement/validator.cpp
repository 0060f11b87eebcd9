#include "patchloom/statement/validator.hpp"

#include <string_view>
#include <vector>

namespace patchloom::statement {
namespace {

enum class ExprKind { other, assignment, inc_dec, call, creation };

struct ParseFailure {
  std::size_t position;
  std::string_view expected;
};

class StatementParser {
 public:
  explicit StatementParser(const std::vector<std::string>& tokens) : t_(tokens) {}

  bool parse_line() {
    if (at("}")) {
      const auto next = peek(1);
      if (next == "else" || next == "catch" || next == "finally" || next == "while") {
        ++p_;
        if (next == "while") return do_while_tail() && eof();
        return continuation() && eof();
      }
      return fail("statement");
    }
    if (at("else") || at("catch") || at("finally")) return continuation() && eof();
    return block_statement(true) && eof();
  }

  ParseFailure failure() const { return failure_; }

 private:
  // ------------------------------------------------------------ helpers
  std::string_view peek(std::size_t k = 0) const {
    return p_ + k < t_.size() ? std::string_view(t_[p_ + k]) : std::string_view();
  }
  bool at(std::string_view s) const { return p_ < t_.size() && t_[p_] == s; }
  bool eof() { return p_ >= t_.size() || fail("end of statement"); }
  bool accept(std::string_view s) {
    if (!at(s)) return false;
    ++p_;
    return true;
  }
  bool expect(std::string_view s) { return accept(s) || fail(s); }
  bool fail(std::string_view what) {
    if (!failure_set_ || p_ >= failure_.position) {
      failure_ = {p_, what};
      failure_set_ = true;
    }
    return false;
  }
  bool ident() {
    if (p_ < t_.size() && is_identifier(t_[p_])) {
      ++p_;
      return true;
    }
    return fail("identifier");
  }
  bool at_ident(std::size_t k = 0) const {
    return p_ + k < t_.size() && is_identifier(t_[p_ + k]);
  }

  // ------------------------------------------------------------ statements
  bool continuation() {
    if (accept("else")) {
      if (accept("if")) {
        if (!(expect("(") && expression() && expect(")"))) return false;
      }
      return body(true);
    }
    if (accept("catch")) {
      if (!expect("(")) return false;
      while (accept("final") || annotation()) {
      }
      if (!type(false)) return false;
      while (accept("|")) {
        if (!type(false)) return false;
      }
      return ident() && expect(")") && body(true);
    }
    if (accept("finally")) return body(true);
    return fail("else/catch/finally");
  }

  bool do_while_tail() {
    return expect("while") && expect("(") && expression() && expect(")") && expect(";");
  }

  // Body of a control statement. At the top level a missing body or an
  // unclosed `{` stands for a synthesized empty block.
  bool body(bool top) {
    if (top && p_ >= t_.size()) return true;
    if (at("{")) {
      if (top && p_ + 1 == t_.size()) {
        ++p_;
        return true;
      }
      return block();
    }
    return statement(top);
  }

  bool block() {
    if (!expect("{")) return false;
    while (!at("}")) {
      if (p_ >= t_.size()) return fail("}");
      if (!block_statement(false)) return false;
    }
    return expect("}");
  }

  bool block_statement(bool top) {
    const std::size_t start = p_;
    if (looks_like_declaration()) {
      p_ = start;
      return local_variable_declaration() && expect(";");
    }
    p_ = start;
    return statement(top);
  }

  bool looks_like_declaration() {
    while (accept("final") || annotation()) {
    }
    if (!type(false)) return false;
    return at_ident();
  }

  bool local_variable_declaration() {
    while (accept("final") || annotation()) {
    }
    if (!type(false)) return false;
    do {
      if (!variable_declarator()) return false;
    } while (accept(","));
    return true;
  }

  bool variable_declarator() {
    if (!ident()) return false;
    while (at("[") && peek(1) == "]") p_ += 2;
    if (accept("=")) return variable_initializer();
    return true;
  }

  bool variable_initializer() {
    if (at("{")) return array_initializer();
    return expression();
  }

  bool array_initializer() {
    if (!expect("{")) return false;
    if (accept("}")) return true;
    do {
      if (at("}")) break;  // trailing comma
      if (!variable_initializer()) return false;
    } while (accept(","));
    return expect("}");
  }

  bool statement(bool top) {
    if (p_ >= t_.size()) return fail("statement");
    const std::string_view tok = peek();
    if (tok == "{") return block();
    if (tok == ";") {
      ++p_;
      return true;
    }
    if (tok == "if") {
      ++p_;
      if (!(expect("(") && expression() && expect(")"))) return false;
      if (!body(top)) return false;
      if (accept("else")) return body(top);
      return true;
    }
    if (tok == "while" || tok == "switch" || tok == "synchronized") {
      ++p_;
      if (!(expect("(") && expression() && expect(")"))) return false;
      if (tok == "switch") {
        if (top && p_ >= t_.size()) return true;
        if (!expect("{")) return false;
        if (top && p_ >= t_.size()) return true;
        return expect("}");
      }
      return body(top);
    }
    if (tok == "for") {
      ++p_;
      return expect("(") && for_control() && expect(")") && body(top);
    }
    if (tok == "do") {
      ++p_;
      if (top && (p_ >= t_.size() || (at("{") && p_ + 1 == t_.size()))) {
        if (at("{")) ++p_;
        return true;
      }
      return statement_or_block() && do_while_tail();
    }
    if (tok == "try") {
      ++p_;
      if (accept("(")) {
        do {
          if (at(")")) break;
          if (!resource()) return false;
        } while (accept(";"));
        if (!expect(")")) return false;
      }
      if (top && (p_ >= t_.size() || (at("{") && p_ + 1 == t_.size()))) {
        if (at("{")) ++p_;
        return true;
      }
      if (!block()) return false;
      bool handled = false;
      while (accept("catch")) {
        handled = true;
        if (!expect("(")) return false;
        while (accept("final") || annotation()) {
        }
        if (!type(false)) return false;
        while (accept("|")) {
          if (!type(false)) return false;
        }
        if (!(ident() && expect(")") && block())) return false;
      }
      if (accept("finally")) {
        handled = true;
        if (!block()) return false;
      }
      return handled || fail("catch/finally");
    }
    if (tok == "return") {
      ++p_;
      if (accept(";")) return true;
      return expression() && expect(";");
    }
    if (tok == "throw") {
      ++p_;
      return expression() && expect(";");
    }
    if (tok == "break" || tok == "continue") {
      ++p_;
      if (at_ident()) ++p_;
      return expect(";");
    }
    if (tok == "assert") {
      ++p_;
      if (!expression()) return false;
      if (accept(":") && !expression()) return false;
      return expect(";");
    }
    if (at_ident() && peek(1) == ":") {
      p_ += 2;
      return statement(top);
    }
    if (tok == "else" || tok == "catch" || tok == "finally" || tok == "case" ||
        tok == "default" || tok == "class" || tok == "interface" || tok == "enum") {
      return fail("statement");
    }
    ExprKind kind = ExprKind::other;
    if (!expression(&kind)) return false;
    if (kind == ExprKind::other) return fail("statement expression");
    return expect(";");
  }

  bool statement_or_block() { return at("{") ? block() : statement(false); }

  bool resource() {
    const std::size_t start = p_;
    if (looks_like_declaration()) {
      p_ = start;
      while (accept("final") || annotation()) {
      }
      return type(false) && ident() && expect("=") && expression();
    }
    p_ = start;
    return expression();
  }

  bool for_control() {
    const std::size_t start = p_;
    if (looks_like_declaration()) {
      p_ = start;
      while (accept("final") || annotation()) {
      }
      if (!type(false)) return false;
      const std::size_t after_type = p_;
      if (ident() && accept(":")) return expression();
      p_ = after_type;
      do {
        if (!variable_declarator()) return false;
      } while (accept(","));
    } else {
      p_ = start;
      if (!at(";")) {
        if (!expression_list()) return false;
      }
    }
    if (!expect(";")) return false;
    if (!at(";") && !expression()) return false;
    if (!expect(";")) return false;
    if (!at(")") && !expression_list()) return false;
    return true;
  }

  bool expression_list() {
    do {
      if (!expression()) return false;
    } while (accept(","));
    return true;
  }

  bool annotation() {
    if (!at("@") || peek(1) == "interface") return false;
    ++p_;
    if (!ident()) return false;
    while (at(".") && at_ident(1)) p_ += 2;
    if (at("(")) return skip_balanced("(", ")");
    return true;
  }

  bool skip_balanced(std::string_view open, std::string_view close) {
    int depth = 0;
    while (p_ < t_.size()) {
      if (at(open)) ++depth;
      else if (at(close) && --depth == 0) {
        ++p_;
        return true;
      }
      ++p_;
    }
    return fail(close);
  }

  // ------------------------------------------------------------ types
  bool type(bool allow_diamond) {
    if (p_ < t_.size() && is_primitive_type(t_[p_])) {
      ++p_;
    } else if (!class_type(allow_diamond)) {
      return false;
    }
    while (at("[") && peek(1) == "]") p_ += 2;
    return true;
  }

  bool class_type(bool allow_diamond) {
    while (annotation()) {
    }
    if (!ident()) return false;
    if (at("<") && !type_arguments(allow_diamond)) return false;
    while (at(".") && (at_ident(1) || peek(1) == "@")) {
      ++p_;
      while (annotation()) {
      }
      if (!ident()) return false;
      if (at("<") && !type_arguments(allow_diamond)) return false;
    }
    return true;
  }

  bool type_arguments(bool allow_diamond) {
    if (!expect("<")) return false;
    if (at(">")) {
      if (!allow_diamond) return fail("type argument");
      ++p_;
      return true;
    }
    do {
      while (annotation()) {
      }
      if (accept("?")) {
        if (accept("extends") || accept("super")) {
          if (!type(false)) return false;
        }
      } else if (!type(false)) {
        return false;
      }
    } while (accept(","));
    return expect(">");
  }

  // ------------------------------------------------------------ expressions
  bool expression(ExprKind* kind = nullptr) {
    ExprKind local = ExprKind::other;
    ExprKind& k = kind ? *kind : local;
    if (lambda_ahead()) {
      k = ExprKind::other;
      return lambda();
    }
    if (!conditional(&k)) return false;
    if (assignment_operator()) {
      k = ExprKind::assignment;
      return expression();
    }
    return true;
  }

  bool assignment_operator() {
    static constexpr std::string_view kOps[] = {"=",  "+=", "-=", "*=", "/=", "%=",
                                                "&=", "^=", "|=", "<<="};
    for (auto op : kOps) {
      if (accept(op)) return true;
    }
    if (at(">") && peek(1) == ">=") {  // >>=
      p_ += 2;
      return true;
    }
    if (at(">") && peek(1) == ">" && peek(2) == ">=") {  // >>>=
      p_ += 3;
      return true;
    }
    return false;
  }

  bool lambda_ahead() const {
    if (at_ident() && peek(1) == "->") return true;
    if (!at("(")) return false;
    int depth = 0;
    for (std::size_t k = p_; k < t_.size(); ++k) {
      if (t_[k] == "(") ++depth;
      else if (t_[k] == ")" && --depth == 0) {
        return k + 1 < t_.size() && t_[k + 1] == "->";
      }
    }
    return false;
  }

  bool lambda() {
    if (at_ident()) {
      ++p_;
    } else {
      if (!expect("(")) return false;
      if (!at(")")) {
        do {
          const std::size_t start = p_;
          if (at_ident() && (peek(1) == "," || peek(1) == ")")) {
            ++p_;
            continue;
          }
          p_ = start;
          while (accept("final") || annotation()) {
          }
          if (!type(false)) return false;
          if (accept("...")) {
          }
          if (!ident()) return false;
        } while (accept(","));
      }
      if (!expect(")")) return false;
    }
    if (!expect("->")) return false;
    if (at("{")) return fail("lambda expression body");
    return expression();
  }

  bool conditional(ExprKind* kind) {
    if (!binary(0, kind)) return false;
    if (accept("?")) {
      *kind = ExprKind::other;
      if (!expression()) return false;
      if (!expect(":")) return false;
      if (lambda_ahead()) return lambda();
      ExprKind ignored;
      return conditional(&ignored);
    }
    return true;
  }

  // Binary operator at the cursor: (precedence, token count), or {0, 0}.
  std::pair<int, std::size_t> binary_operator() const {
    const auto tok = peek();
    if (tok == "||") return {1, 1};
    if (tok == "&&") return {2, 1};
    if (tok == "|") return {3, 1};
    if (tok == "^") return {4, 1};
    if (tok == "&") return {5, 1};
    if (tok == "==" || tok == "!=") return {6, 1};
    if (tok == "<" || tok == "<=" || tok == ">=" || tok == "instanceof") return {7, 1};
    if (tok == ">") {
      if (peek(1) == ">=") return {0, 0};                     // >>=
      if (peek(1) == ">" && peek(2) == ">=") return {0, 0};   // >>>=
      if (peek(1) == ">" && peek(2) == ">") return {8, 3};    // >>>
      if (peek(1) == ">") return {8, 2};                      // >>
      return {7, 1};
    }
    if (tok == "<<") return {8, 1};
    if (tok == "+" || tok == "-") return {9, 1};
    if (tok == "*" || tok == "/" || tok == "%") return {10, 1};
    return {0, 0};
  }

  bool binary(int min_prec, ExprKind* kind) {
    if (!unary(kind)) return false;
    for (;;) {
      auto [prec, width] = binary_operator();
      if (prec == 0 || prec <= min_prec) return true;
      const bool is_instanceof = at("instanceof");
      p_ += width;
      *kind = ExprKind::other;
      if (is_instanceof) {
        while (accept("final")) {
        }
        if (!type(false)) return false;
        if (at_ident()) ++p_;  // pattern binding
        continue;
      }
      ExprKind rhs;
      if (!binary(prec, &rhs)) return false;
    }
  }

  bool unary(ExprKind* kind) {
    if (at("++") || at("--")) {
      ++p_;
      ExprKind ignored;
      if (!unary(&ignored)) return false;
      *kind = ExprKind::inc_dec;
      return true;
    }
    if (at("+") || at("-") || at("!") || at("~")) {
      ++p_;
      ExprKind ignored;
      *kind = ExprKind::other;
      return unary(&ignored);
    }
    if (at("(")) {
      const std::size_t start = p_;
      if (cast_ahead()) {
        *kind = ExprKind::other;
        ExprKind ignored;
        if (lambda_ahead()) return lambda();
        return unary(&ignored);
      }
      p_ = start;
    }
    return postfix(kind);
  }

  // Consumes `( Type )` when it is a cast.
  bool cast_ahead() {
    const std::size_t start = p_;
    ++p_;  // (
    const bool primitive = p_ < t_.size() && is_primitive_type(t_[p_]);
    if (!type(false)) {
      p_ = start;
      return false;
    }
    while (accept("&")) {
      if (!type(false)) {
        p_ = start;
        return false;
      }
    }
    if (!accept(")")) {
      p_ = start;
      return false;
    }
    if (primitive) return p_ < t_.size();
    const auto next = peek();
    const bool starts_operand =
        at_ident() || (!next.empty() && is_literal(next)) || next == "(" || next == "!" ||
        next == "~" || next == "this" || next == "super" || next == "new" ||
        (!next.empty() && is_primitive_type(next));
    if (!starts_operand) {
      p_ = start;
      return false;
    }
    return true;
  }

  bool arguments() {
    if (!expect("(")) return false;
    if (accept(")")) return true;
    if (!expression_list()) return false;
    return expect(")");
  }

  bool postfix(ExprKind* kind) {
    if (!primary(kind)) return false;
    for (;;) {
      if (at(".")) {
        ++p_;
        if (accept("class") || accept("this")) {
          *kind = ExprKind::other;
          continue;
        }
        if (accept("new")) {
          if (!creator()) return false;
          *kind = ExprKind::creation;
          continue;
        }
        if (at("<")) {
          if (!type_arguments(false)) return false;
          if (!ident()) return false;
          if (!arguments()) return false;
          *kind = ExprKind::call;
          continue;
        }
        if (accept("super")) {
          *kind = ExprKind::other;
          continue;
        }
        if (!ident()) return false;
        if (at("(")) {
          if (!arguments()) return false;
          *kind = ExprKind::call;
        } else {
          *kind = ExprKind::other;
        }
        continue;
      }
      if (at("[")) {
        if (peek(1) == "]") {
          // Array type in `T[].class` or `T[]::new`.
          while (at("[") && peek(1) == "]") p_ += 2;
          if (at(".") && peek(1) == "class") {
            p_ += 2;
            *kind = ExprKind::other;
            continue;
          }
          if (at("::")) continue;
          return fail("array class literal");
        }
        ++p_;
        if (!(expression() && expect("]"))) return false;
        *kind = ExprKind::other;
        continue;
      }
      if (at("::")) {
        ++p_;
        if (!(accept("new") || ident())) return false;
        *kind = ExprKind::other;
        continue;
      }
      if (at("++") || at("--")) {
        ++p_;
        *kind = ExprKind::inc_dec;
        continue;
      }
      return true;
    }
  }

  bool primary(ExprKind* kind) {
    *kind = ExprKind::other;
    if (p_ >= t_.size()) return fail("expression");
    const std::string_view tok = peek();
    if (is_literal(tok)) {
      ++p_;
      return true;
    }
    if (tok == "this") {
      ++p_;
      if (at("(")) return fail("explicit constructor invocation");
      return true;
    }
    if (tok == "super") {
      ++p_;
      if (at("(")) return fail("explicit constructor invocation");
      if (at(".") || at("::")) return true;
      return fail(".");
    }
    if (tok == "new") {
      ++p_;
      if (!creator()) return false;
      *kind = ExprKind::creation;
      return true;
    }
    if (tok == "(") {
      ++p_;
      return expression() && expect(")");
    }
    if (is_primitive_type(tok) || tok == "void") {
      ++p_;
      while (at("[") && peek(1) == "]") p_ += 2;
      if (at(".") && peek(1) == "class") {
        p_ += 2;
        return true;
      }
      if (at("::")) return true;
      return fail("class literal");
    }
    if (at_ident()) {
      // Generic type before a method reference: `List<String>::size`.
      const std::size_t start = p_;
      if (peek(1) == "<") {
        if (class_type(false) && at("::")) return true;
        p_ = start;
      }
      ++p_;
      if (at("(")) {
        if (!arguments()) return false;
        *kind = ExprKind::call;
      }
      return true;
    }
    return fail("expression");
  }

  bool creator() {
    if (at("<") && !type_arguments(false)) return false;
    if (p_ < t_.size() && is_primitive_type(t_[p_])) {
      ++p_;
      return array_creator_rest();
    }
    if (!class_type(true)) return false;
    if (at("[")) return array_creator_rest();
    if (!arguments()) return false;
    if (at("{")) return fail("anonymous class body");
    return true;
  }

  bool array_creator_rest() {
    if (!at("[")) return fail("[");
    if (peek(1) == "]") {
      while (at("[") && peek(1) == "]") p_ += 2;
      return array_initializer();
    }
    while (at("[") && peek(1) != "]") {
      ++p_;
      if (!(expression() && expect("]"))) return false;
    }
    while (at("[") && peek(1) == "]") p_ += 2;
    return true;
  }

  const std::vector<std::string>& t_;
  std::size_t p_ = 0;
  ParseFailure failure_{0, {}};
  bool failure_set_ = false;
};

}  // namespace

bool validate_statement(const TokenizedStatement& stmt) {
  if (stmt.tokens.empty()) return false;
  StatementParser parser(stmt.tokens);
  return parser.parse_line();
}

std::string statement_diagnostic(const TokenizedStatement& stmt) {
  if (stmt.tokens.empty()) return "empty statement";
  StatementParser parser(stmt.tokens);
  if (parser.parse_line()) return {};
  const auto f = parser.failure();
  std::string msg = "expected ";
  msg += f.expected.empty() ? "end of statement" : std::string(f.expected);
  msg += " at token " + std::to_string(f.position);
  if (f.position < stmt.tokens.size()) msg += " ('" + stmt.tokens[f.position] + "')";
  return msg;
}

}  // namespace patchloom::statement
