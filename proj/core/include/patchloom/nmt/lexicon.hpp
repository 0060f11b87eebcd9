#pragma once

#include <map>
#include <utility>
#include <vector>

#include "patchloom/nmt/vocabulary.hpp"

namespace patchloom::nmt {

/// Sparse translation table t(tgt | src): one row per source id, each row
/// a list of (target id, probability) sorted by target id.
struct Lexicon {
  std::vector<std::vector<std::pair<TokenId, float>>> rows;

  bool empty() const;
  bool has_row(TokenId src) const {
    return src >= 0 && static_cast<std::size_t>(src) < rows.size() && !rows[src].empty();
  }
  float lookup(TokenId src, TokenId tgt) const;

  bool operator==(const Lexicon&) const = default;
};

struct LexiconOptions {
  int iterations = 10;
  std::size_t top_entries = 20;
};

/// IBM Model-1 EM with a NULL source word, uniform start. Rows are cut to
/// the most probable `top_entries` targets and renormalized; the NULL row
/// is not kept.
Lexicon build_lexicon(const std::vector<std::vector<TokenId>>& src,
                      const std::vector<std::vector<TokenId>>& tgt, std::size_t src_vocab,
                      std::size_t tgt_vocab, const LexiconOptions& options = {});

/// Untruncated Model-1 table t(tgt|src) after EM over co-occurring pairs;
/// row `src_vocab` is NULL.
std::vector<std::map<TokenId, double>> model1_table(const std::vector<std::vector<TokenId>>& src,
                                              const std::vector<std::vector<TokenId>>& tgt,
                                              std::size_t src_vocab, std::size_t tgt_vocab,
                                              int iterations);

}  // namespace patchloom::nmt
