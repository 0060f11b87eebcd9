#include <cmath>
#include <iostream>
#include <random>

#include "commands.hpp"
#include "patchloom/nmt/beam_search.hpp"
#include "patchloom/nmt/network.hpp"

namespace patchloom::cli {

namespace {

using nmt::LexiconBias;
using nmt::Parameters;
using nmt::TokenId;

nmt::Lexicon small_lexicon(int src_vocab, int tgt_vocab, std::mt19937_64& rng) {
  nmt::Lexicon lex;
  lex.rows.resize(static_cast<std::size_t>(src_vocab));
  std::uniform_real_distribution<float> u(0.1f, 1.0f);
  for (int s = 0; s < src_vocab; s += 2) {
    float a = u(rng), b = u(rng);
    lex.rows[s] = {{static_cast<TokenId>(s % tgt_vocab), a / (a + b)},
                   {static_cast<TokenId>((s + 3) % tgt_vocab), b / (a + b)}};
    if (lex.rows[s][0].first > lex.rows[s][1].first) std::swap(lex.rows[s][0], lex.rows[s][1]);
  }
  return lex;
}

bool check_gradients(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const nmt::Dimensions dims{10, 10, 4, 4};
  const auto params = Parameters<double>::random(dims, rng, 0.5);
  const auto lex = small_lexicon(10, 10, rng);
  const std::vector<nmt::SequencePair> batch = {{{3, 5, 7, 4}, {6, 3, 8}}};
  double worst = 0.0;
  for (double lambda : {0.0, 0.1}) {
    const auto result = nmt::gradient_check(params, LexiconBias{&lex, lambda}, batch);
    worst = std::max(worst, result.max_relative_error);
  }
  const bool ok = worst < 1e-4;
  std::cout << (ok ? "PASS" : "FAIL") << " gradient_check max_relative_error=" << worst << '\n';
  return ok;
}

bool check_normalization(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const nmt::Dimensions dims{12, 9, 6, 8};
  const auto params = Parameters<double>::random(dims, rng, 1.0);
  const auto lex = small_lexicon(12, 9, rng);
  std::uniform_int_distribution<TokenId> tok(0, 8);
  double worst = 0.0;
  for (double lambda : {0.0, 0.1, 0.5}) {
    const LexiconBias bias{&lex, lambda};
    const auto enc = nmt::encode_source(params, {5, 1, 10, 2, 7});
    auto state = nmt::initial_decoder(params, enc, 3);
    std::vector<TokenId> tokens(3, nmt::kBosId);
    for (int step = 0; step < 6; ++step) {
      const auto dist = nmt::decoder_step(params, enc, bias, state, tokens);
      for (Eigen::Index k = 0; k < dist.cols(); ++k) {
        worst = std::max(worst, std::abs(dist.col(k).sum() - 1.0));
        if ((dist.col(k).array() < 0.0).any()) worst = std::max(worst, 1.0);
      }
      for (auto& t : tokens) t = tok(rng);
    }
  }
  const bool ok = worst <= 1e-6;
  std::cout << (ok ? "PASS" : "FAIL") << " softmax_normalization max_deviation=" << worst << '\n';
  return ok;
}

bool check_beam(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const nmt::Dimensions dims{6, 3, 4, 5};
  const auto params = Parameters<double>::random(dims, rng, 1.0);
  const nmt::Lexicon lex;
  const LexiconBias bias{&lex, 0.0};
  const std::vector<TokenId> src = {4, 3, 5};
  const int max_len = 4;

  // Finished outputs are prefixes over the two non-</s> ids, then </s>.
  std::vector<TokenId> best;
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<TokenId>> frontier = {{}};
  for (int len = 0; len < max_len; ++len) {
    std::vector<std::vector<TokenId>> next;
    for (const auto& prefix : frontier) {
      const double s = nmt::sequence_log_prob(params, bias, src, prefix);
      if (s > best_score) {
        best_score = s;
        best = prefix;
      }
      for (TokenId t = 0; t < 3; ++t) {
        if (t == nmt::kEosId) continue;
        auto longer = prefix;
        longer.push_back(t);
        next.push_back(std::move(longer));
      }
    }
    frontier = std::move(next);
  }
  const auto hyps = nmt::beam_search(params, bias, src, {81, max_len});
  const bool ok = !hyps.empty() && hyps.front().finished &&
                  nmt::output_tokens(hyps.front()) == best &&
                  std::abs(hyps.front().log_prob - best_score) < 1e-9;
  std::cout << (ok ? "PASS" : "FAIL") << " beam_exhaustive best_log_prob=" << best_score << '\n';
  return ok;
}

}  // namespace

int run_selftest(const RunConfig& config) {
  bool ok = true;
  ok &= check_gradients(config.seed);
  ok &= check_normalization(config.seed);
  ok &= check_beam(config.seed);
  return ok ? 0 : 1;
}

}  // namespace patchloom::cli
