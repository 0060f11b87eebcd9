#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "patchloom/nmt/lexicon.hpp"
#include "patchloom/nmt/network.hpp"
#include "patchloom/nmt/parameters.hpp"
#include "patchloom/nmt/vocabulary.hpp"

namespace patchloom::nmt {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A trained translation model: vocabularies, parameters and lexicon.
/// Immutable once built; safe to share across decoding threads.
struct Model {
  Vocabulary src_vocab = Vocabulary::with_placeholders();
  Vocabulary tgt_vocab = Vocabulary::with_placeholders();
  Parameters<float> params;
  Lexicon lexicon;
  double lexicon_weight = 0.1;

  LexiconBias bias() const { return {&lexicon, lexicon_weight}; }

  std::vector<TokenId> encode_source(const std::vector<std::string>& tokens) const {
    return src_vocab.encode(tokens);
  }
};

/// Binary model file:
///   "PLM1", u32 version
///   src vocabulary, tgt vocabulary: u32 count, then u32 length + UTF-8 bytes per token
///   u32 tensor count, then per tensor: u32 name length + name, u32 rank, u32 dims...,
///     row-major little-endian f32 values
///   lexicon: u32 row count, per row u32 entry count, then (u32 target id, f32 prob)
/// The lexicon weight travels as the 1x1 tensor "config.lexicon_weight".
void save_model(std::ostream& out, const Model& model);
Model load_model(std::istream& in);
void save_model(const std::filesystem::path& file, const Model& model);
Model load_model(const std::filesystem::path& file);

struct TrainingConfig {
  double learning_rate = 0.001;
  std::size_t minibatch_words = 2048;
  double dropout = 0.5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double decay_factor = 0.5;
  double clip_norm = 5.0;  // 0 disables clipping
  int max_epochs = 20;
  std::uint64_t seed = 1;
  int embedding = 256;
  int hidden = 512;
  double dev_fraction = 0.05;
  double lexicon_weight = 0.1;
  bool use_lexicon = true;
  LexiconOptions lexicon;
  double init_scale = 0.1;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_loss = 0.0;
  double learning_rate = 0.0;
  double seconds = 0.0;
  bool improved = false;
};

struct TrainingResult {
  Model model;  // best-dev snapshot
  std::vector<EpochStats> history;
  int best_epoch = 0;
  bool aborted = false;
  std::string diagnostic;
};

struct TrainingData {
  std::vector<std::vector<std::string>> src;
  std::vector<std::vector<std::string>> tgt;
  std::vector<int> year_post;  // drives the chronological dev split
  Vocabulary src_vocab = Vocabulary::with_placeholders();
  Vocabulary tgt_vocab = Vocabulary::with_placeholders();
};

/// Splits off the last `fraction` of pairs by year_post (stable) as the
/// development set; returns (train indices, dev indices). With a single
/// pair both sides hold it.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> development_split(
    const std::vector<int>& year_post, double fraction);

/// Length-sorted greedy batches of about `words` target tokens each.
std::vector<std::vector<std::size_t>> make_batches(const std::vector<SequencePair>& pairs,
                                                   const std::vector<std::size_t>& indices,
                                                   std::size_t words);

using EpochCallback = std::function<void(const EpochStats&)>;

/// Adam training with per-epoch dev evaluation, learning-rate decay on dev
/// loss increase, and best-dev snapshot. A non-finite loss stops training and
/// returns the last good snapshot with aborted=true.
TrainingResult train(const TrainingData& data, const TrainingConfig& config,
                     const EpochCallback& on_epoch = {});

}  // namespace patchloom::nmt
