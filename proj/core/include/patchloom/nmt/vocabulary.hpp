#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace patchloom::nmt {

using TokenId = std::int32_t;

inline constexpr TokenId kUnkId = 0;
inline constexpr TokenId kBosId = 1;
inline constexpr TokenId kEosId = 2;

inline constexpr std::string_view kUnk = "<unk>";
inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";

/// Bidirectional token <-> id map. Ids 0..2 are `<unk>`, `<s>`, `</s>`;
/// unseen tokens look up as `<unk>`.
class Vocabulary {
 public:
  Vocabulary();

  /// Vocabulary with the statement placeholders `arg` and `val` also
  /// reserved (ids 3 and 4), as used for the statement corpora.
  static Vocabulary with_placeholders();

  /// Adds `token` if absent and returns its id.
  TokenId add(std::string_view token);

  TokenId id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(TokenId id) const;
  std::size_t size() const { return id_to_token_.size(); }
  std::size_t reserved_count() const { return reserved_; }
  bool is_reserved(std::string_view token) const;

  std::vector<TokenId> encode(const std::vector<std::string>& tokens) const;
  std::vector<std::string> decode(const std::vector<TokenId>& ids) const;

  const std::vector<std::string>& tokens() const { return id_to_token_; }

  bool operator==(const Vocabulary& other) const { return id_to_token_ == other.id_to_token_; }

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, TokenId> token_to_id_;
  std::size_t reserved_ = 0;
};

}  // namespace patchloom::nmt
