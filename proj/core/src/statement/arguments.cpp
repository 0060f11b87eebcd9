#include "patchloom/statement/arguments.hpp"

#include <cctype>
#include <optional>

namespace patchloom::statement {

std::vector<std::string> ArgumentTable::callee_names() const {
  std::vector<std::string> names;
  names.reserve(entries.size());
  for (const auto& e : entries) names.push_back(e.callee);
  return names;
}

namespace {

using Tokens = std::vector<std::string>;

bool is_integer_literal(const std::string& t) {
  if (t.empty() || !std::isdigit(static_cast<unsigned char>(t[0]))) return false;
  for (char c : t) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return t.find('.') == std::string::npos;
}

// Position of the `<` matching the `>` at `gt`, or nullopt.
std::optional<std::size_t> matching_angle(const Tokens& out, std::size_t gt) {
  int depth = 0;
  for (std::size_t k = gt + 1; k-- > 0;) {
    const auto& t = out[k];
    if (t == ">") ++depth;
    else if (t == "<") {
      if (--depth == 0) return k;
    } else if (!(is_identifier(t) || t == "," || t == "." || t == "?" || t == "extends" ||
                 t == "super" || t == "[" || t == "]" || is_primitive_type(t))) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

// If the `>` at the end of `out` closes the type arguments of a `new T<...>`
// creation, returns T.
std::optional<std::string> generic_creation_type(const Tokens& out) {
  if (out.empty() || out.back() != ">") return std::nullopt;
  auto lt = matching_angle(out, out.size() - 1);
  if (!lt || *lt == 0) return std::nullopt;
  std::size_t k = *lt - 1;
  if (!is_identifier(out[k])) return std::nullopt;
  const std::string type = out[k];
  while (k >= 2 && out[k - 1] == "." && is_identifier(out[k - 2])) k -= 2;
  if (k >= 1 && out[k - 1] == "new") return type;
  return std::nullopt;
}

// Callee name when the `(` about to be appended to `out` opens a call.
std::optional<std::string> call_callee(const Tokens& out) {
  if (out.empty()) return std::nullopt;
  const auto& prev = out.back();
  if (is_identifier(prev) || prev == "this" || prev == "super") return prev;
  return generic_creation_type(out);
}

// Array name when the `[` about to be appended to `out` opens an index.
std::optional<std::string> index_owner(const Tokens& out) {
  if (out.empty()) return std::nullopt;
  const auto& prev = out.back();
  if (is_identifier(prev) || is_primitive_type(prev) || prev == "this") return prev;
  if (prev == ")" || prev == "]" || prev == ">") {
    // Walk left over balanced groups to the owning name.
    int depth = 0;
    for (std::size_t k = out.size(); k-- > 0;) {
      const auto& t = out[k];
      if (t == ")" || t == "]" || t == ">") ++depth;
      else if (t == "(" || t == "[" || t == "<") --depth;
      else if (depth == 0 && (is_identifier(t) || is_primitive_type(t))) return t;
      if (depth < 0) return std::nullopt;
    }
    return std::string{};
  }
  return std::nullopt;
}

std::optional<std::size_t> matching_close(const Tokens& t, std::size_t open,
                                          const std::string& o, const std::string& c) {
  int depth = 0;
  for (std::size_t k = open; k < t.size(); ++k) {
    if (t[k] == o) ++depth;
    else if (t[k] == c && --depth == 0) return k;
  }
  return std::nullopt;
}

bool brackets_balance(const Tokens& t) {
  std::string stack;
  for (const auto& tok : t) {
    if (tok == "(") stack.push_back(')');
    else if (tok == "[") stack.push_back(']');
    else if (tok == ")" || tok == "]") {
      if (stack.empty() || stack.back() != tok[0]) return false;
      stack.pop_back();
    }
  }
  return stack.empty();
}

}  // namespace

Abstraction abstract_arguments(const TokenizedStatement& stmt) {
  Abstraction result;
  const Tokens& in = stmt.tokens;
  result.balanced = brackets_balance(in);
  Tokens out;
  for (std::size_t i = 0; i < in.size();) {
    const auto& tok = in[i];
    const bool paren = tok == "(";
    const bool bracket = tok == "[";
    if (result.balanced && (paren || bracket)) {
      auto owner = paren ? call_callee(out) : index_owner(out);
      if (owner) {
        const auto close = paren ? matching_close(in, i, "(", ")") : matching_close(in, i, "[", "]");
        const std::size_t inner = *close - i - 1;
        const bool keep = inner == 0 || (bracket && inner == 1 && is_integer_literal(in[i + 1]));
        if (keep) {
          out.insert(out.end(), in.begin() + static_cast<std::ptrdiff_t>(i),
                     in.begin() + static_cast<std::ptrdiff_t>(*close) + 1);
        } else {
          ArgumentEntry entry;
          entry.call_index = result.args.entries.size();
          entry.kind = paren ? SlotKind::method_argument : SlotKind::array_index;
          entry.callee = *owner;
          entry.tokens.assign(in.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                              in.begin() + static_cast<std::ptrdiff_t>(*close));
          result.args.entries.push_back(std::move(entry));
          out.push_back(tok);
          out.push_back(paren ? kArgToken : kValToken);
          out.push_back(paren ? ")" : "]");
        }
        i = *close + 1;
        continue;
      }
    }
    out.push_back(tok);
    ++i;
  }
  result.abstracted.tokens = std::move(out);
  result.abstracted.raw = result.abstracted.joined();
  return result;
}

Reinsertion reinsert_arguments(const TokenizedStatement& generated,
                               const ArgumentTable& query_args) {
  struct Slot {
    std::size_t pos;  // index of the placeholder token
    SlotKind kind;
    std::string callee;
    std::optional<std::size_t> entry;
  };
  const Tokens& in = generated.tokens;
  std::vector<Slot> slots;
  {
    Tokens prefix;
    for (std::size_t i = 0; i < in.size(); ++i) {
      const bool call = in[i] == "(" && i + 2 < in.size() && in[i + 1] == kArgToken &&
                        in[i + 2] == ")";
      const bool index = in[i] == "[" && i + 2 < in.size() && in[i + 1] == kValToken &&
                         in[i + 2] == "]";
      if (call || index) {
        auto owner = call ? call_callee(prefix) : index_owner(prefix);
        if (owner) {
          slots.push_back({i + 1, call ? SlotKind::method_argument : SlotKind::array_index,
                           *owner, std::nullopt});
        }
      }
      prefix.push_back(in[i]);
    }
  }

  const auto& entries = query_args.entries;
  std::vector<bool> used(entries.size(), false);
  // Same callee name, first unused entry.
  for (auto& s : slots) {
    for (std::size_t e = 0; e < entries.size(); ++e) {
      if (!used[e] && entries[e].kind == s.kind && entries[e].callee == s.callee) {
        s.entry = e;
        used[e] = true;
        break;
      }
    }
  }
  // Same callee name already consumed: same arguments again.
  for (auto& s : slots) {
    if (s.entry) continue;
    for (std::size_t e = 0; e < entries.size(); ++e) {
      if (entries[e].kind == s.kind && entries[e].callee == s.callee) {
        s.entry = e;
        break;
      }
    }
  }
  // Left-to-right assignment of what remains.
  for (auto& s : slots) {
    if (s.entry) continue;
    for (std::size_t e = 0; e < entries.size(); ++e) {
      if (!used[e] && entries[e].kind == s.kind) {
        s.entry = e;
        used[e] = true;
        break;
      }
    }
  }

  Reinsertion result;
  result.placeholders = slots.size();
  Tokens out;
  std::size_t slot = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (slot < slots.size() && slots[slot].pos == i) {
      const auto& s = slots[slot++];
      if (s.entry) {
        const auto& toks = entries[*s.entry].tokens;
        out.insert(out.end(), toks.begin(), toks.end());
        ++result.filled;
      } else if (s.kind == SlotKind::array_index) {
        ++result.empty_index_slots;
      }
      continue;
    }
    out.push_back(in[i]);
  }
  result.statement.tokens = std::move(out);
  result.statement.raw = result.statement.joined();
  return result;
}

}  // namespace patchloom::statement
