#pragma once

#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "patchloom/nmt/lexicon.hpp"
#include "patchloom/nmt/parameters.hpp"
#include "patchloom/nmt/vocabulary.hpp"

namespace patchloom::nmt {

/// Attention-weighted lexicon interpolation. With weight 0 or no lexicon the
/// output distribution is the plain softmax.
struct LexiconBias {
  const Lexicon* lexicon = nullptr;
  double weight = 0.0;

  bool active() const { return lexicon != nullptr && weight > 0.0; }
};

template <class T>
struct LstmState {
  Vec<T> h;
  Vec<T> c;
};

template <class T>
LstmState<T> lstm_step(const LstmWeights<T>& w, const Vec<T>& input, const LstmState<T>& prev);

/// Encoder states h_1..h_n, one per source position.
template <class T>
std::vector<LstmState<T>> encode(const Parameters<T>& p, const std::vector<TokenId>& src);

template <class T>
struct AttentionResult {
  Vec<T> weights;
  Vec<T> context;
};

/// MLP attention: score_i = v . tanh(W_h h_i + W_s s + b), softmax over i.
/// `encoder_states` holds one state per column.
template <class T>
AttentionResult<T> attend(const Parameters<T>& p, const Mat<T>& encoder_states,
                          const Vec<T>& decoder_hidden);

/// Attentional hidden state tanh(W_c [s; c] + b_c).
template <class T>
Vec<T> attentional_state(const Parameters<T>& p, const Vec<T>& decoder_hidden,
                         const Vec<T>& context);

/// Output distribution over the target vocabulary:
///   w * softmax(W_pred htilde + b_pred) + lambda * sum_i alpha_i L[src_i]
/// where w = 1 - lambda + lambda * (attention mass on source tokens without
/// a lexicon row), so the result always sums to one.
template <class T>
Vec<T> predict_distribution(const Parameters<T>& p, const Vec<T>& decoder_hidden,
                            const Vec<T>& context, const LexiconBias& lexicon,
                            const std::vector<TokenId>& src, const Vec<T>& attention_weights);

/// Encoder output prepared for decoding.
template <class T>
struct EncodedSource {
  std::vector<TokenId> ids;
  Mat<T> states;     // H x n
  Mat<T> projected;  // W_h states + b
  LstmState<T> final;
};

template <class T>
EncodedSource<T> encode_source(const Parameters<T>& p, const std::vector<TokenId>& src);

/// Decoder state for K parallel hypotheses, one per column.
template <class T>
struct DecoderBatch {
  Mat<T> h;
  Mat<T> c;
  Mat<T> feed;  // previous attentional state (input feeding)
};

template <class T>
DecoderBatch<T> initial_decoder(const Parameters<T>& p, const EncodedSource<T>& enc,
                                int copies = 1);

/// One decoder step: consumes `tokens` (one per column), advances `state`
/// and returns the output distributions (|Vt| x K). `attention` receives the
/// weights (n x K) when non-null.
template <class T>
Mat<T> decoder_step(const Parameters<T>& p, const EncodedSource<T>& enc,
                    const LexiconBias& lexicon, DecoderBatch<T>& state,
                    const std::vector<TokenId>& tokens, Mat<T>* attention = nullptr);

/// log P(tgt, </s> | src) under teacher forcing. `tgt` excludes `</s>`;
/// it is appended here.
template <class T>
double sequence_log_prob(const Parameters<T>& p, const LexiconBias& lexicon,
                         const std::vector<TokenId>& src, const std::vector<TokenId>& tgt);

struct SequencePair {
  std::vector<TokenId> src;
  std::vector<TokenId> tgt;  // without </s>
};

struct BatchLoss {
  double total_nll = 0.0;
  std::size_t tokens = 0;

  double mean() const { return tokens == 0 ? 0.0 : total_nll / static_cast<double>(tokens); }
};

/// Mean per-token negative log-likelihood of a padded minibatch. With
/// `grad` non-null, accumulates (adds) its gradient. Dropout masks are drawn
/// from `rng` when dropout > 0.
template <class T>
BatchLoss batch_loss(const Parameters<T>& p, const LexiconBias& lexicon,
                     const std::vector<SequencePair>& batch, double dropout,
                     std::mt19937_64* rng, Parameters<T>* grad);

struct TensorCheck {
  std::string name;
  double relative_error = 0.0;
  double analytic_norm = 0.0;
};

struct GradientCheckResult {
  std::vector<TensorCheck> tensors;
  double max_relative_error = 0.0;
};

class GradientCheckError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Relative error ||a - n|| / max(||a|| + ||n||, 1e-12).
double relative_error(const Mat<double>& analytic, const Mat<double>& numeric);

/// Compares batch_loss gradients with central differences (64-bit). Dropout
/// makes the loss stochastic, so any dropout > 0 throws GradientCheckError.
GradientCheckResult gradient_check(const Parameters<double>& p, const LexiconBias& lexicon,
                                   const std::vector<SequencePair>& batch, double dropout = 0.0,
                                   double step = 1e-4);

}  // namespace patchloom::nmt
