#pragma once

#include <vector>

#include "patchloom/nmt/model.hpp"
#include "patchloom/nmt/network.hpp"

namespace patchloom::nmt {

template <class T>
struct Hypothesis {
  std::vector<TokenId> tokens;  // ends with </s> iff finished
  double log_prob = 0.0;
  Vec<T> hidden;
  Vec<T> cell;
  bool finished = false;
};

struct BeamOptions {
  int beam_size = 10;
  int max_len = 100;  // generated tokens, counting </s>
};

/// Beam search over unnormalized log P. Finished hypotheses retire into the
/// result pool; search stops when the best finished score is at least the
/// best live score, when no live hypotheses remain, or at max_len. Results
/// are sorted by log_prob descending; if nothing finished, the live
/// hypotheses are returned unfinished.
template <class T>
std::vector<Hypothesis<T>> beam_search(const Parameters<T>& params, const LexiconBias& lexicon,
                                       const std::vector<TokenId>& src,
                                       const BeamOptions& options = {});

inline std::vector<Hypothesis<float>> beam_search(const Model& model,
                                                  const std::vector<TokenId>& src,
                                                  const BeamOptions& options = {}) {
  return beam_search<float>(model.params, model.bias(), src, options);
}

/// Tokens of a hypothesis without the trailing </s>.
template <class T>
std::vector<TokenId> output_tokens(const Hypothesis<T>& h) {
  std::vector<TokenId> out = h.tokens;
  if (h.finished && !out.empty()) out.pop_back();
  return out;
}

}  // namespace patchloom::nmt
