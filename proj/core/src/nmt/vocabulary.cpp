#include "patchloom/nmt/vocabulary.hpp"

#include <stdexcept>

namespace patchloom::nmt {

Vocabulary::Vocabulary() {
  add(kUnk);
  add(kBos);
  add(kEos);
  reserved_ = 3;
}

Vocabulary Vocabulary::with_placeholders() {
  Vocabulary v;
  v.add("arg");
  v.add("val");
  v.reserved_ = 5;
  return v;
}

TokenId Vocabulary::add(std::string_view token) {
  auto it = token_to_id_.find(std::string(token));
  if (it != token_to_id_.end()) return it->second;
  const auto id = static_cast<TokenId>(id_to_token_.size());
  id_to_token_.emplace_back(token);
  token_to_id_.emplace(std::string(token), id);
  return id;
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  return it == token_to_id_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return token_to_id_.count(std::string(token)) > 0;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    throw std::out_of_range("token id out of range");
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

bool Vocabulary::is_reserved(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  return it != token_to_id_.end() && static_cast<std::size_t>(it->second) < reserved_;
}

std::vector<TokenId> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::vector<std::string> Vocabulary::decode(const std::vector<TokenId>& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (auto i : ids) out.push_back(token(i));
  return out;
}

}  // namespace patchloom::nmt
