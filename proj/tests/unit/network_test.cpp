#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "patchloom/nmt/network.hpp"

using namespace patchloom::nmt;

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Element-by-element LSTM cell with gate rows input, forget, output, candidate.
LstmState<double> scalar_lstm(const LstmWeights<double>& w, const Vec<double>& x,
                              const LstmState<double>& prev) {
  const auto H = prev.h.size();
  LstmState<double> out{Vec<double>(H), Vec<double>(H)};
  for (Eigen::Index r = 0; r < H; ++r) {
    double z[4];
    for (int g = 0; g < 4; ++g) {
      const auto row = g * H + r;
      double s = w.b(row, 0);
      for (Eigen::Index k = 0; k < x.size(); ++k) s += w.W(row, k) * x(k);
      for (Eigen::Index k = 0; k < H; ++k) s += w.U(row, k) * prev.h(k);
      z[g] = s;
    }
    const double c = sig(z[1]) * prev.c(r) + sig(z[0]) * std::tanh(z[3]);
    out.c(r) = c;
    out.h(r) = sig(z[2]) * std::tanh(c);
  }
  return out;
}

Lexicon toy_lexicon(int src_vocab, int tgt_vocab) {
  Lexicon lex;
  lex.rows.resize(static_cast<std::size_t>(src_vocab));
  for (int s = 0; s < src_vocab; s += 2) {
    lex.rows[s] = {{static_cast<TokenId>(s % tgt_vocab), 0.7f},
                   {static_cast<TokenId>((s + 1) % tgt_vocab), 0.3f}};
    if (lex.rows[s][0].first > lex.rows[s][1].first) std::swap(lex.rows[s][0], lex.rows[s][1]);
  }
  return lex;
}

}  // namespace

TEST(Network, LstmStepMatchesScalarCell) {
  std::mt19937_64 rng(3);
  const Dimensions dims{8, 8, 5, 4};
  const auto p = Parameters<double>::random(dims, rng, 0.8);
  std::normal_distribution<double> n;
  Vec<double> x(5), h(4), c(4);
  for (auto& v : x) v = n(rng);
  for (auto& v : h) v = n(rng);
  for (auto& v : c) v = n(rng);
  const auto got = lstm_step<double>(p.encoder, x, {h, c});
  const auto want = scalar_lstm(p.encoder, x, {h, c});
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(got.h(i), want.h(i), 1e-12);
    EXPECT_NEAR(got.c(i), want.c(i), 1e-12);
  }
}

TEST(Network, ForgetBiasStartsAtOne) {
  std::mt19937_64 rng(1);
  const auto p = Parameters<float>::random({5, 5, 3, 4}, rng);
  for (int r = 4; r < 8; ++r) EXPECT_EQ(p.encoder.b(r, 0), 1.0f);
  for (int r = 0; r < 4; ++r) EXPECT_LE(std::abs(p.encoder.b(r, 0)), 0.1f);
}

TEST(Network, EncoderChainsCells) {
  std::mt19937_64 rng(4);
  const auto p = Parameters<double>::random({9, 9, 3, 5}, rng, 0.5);
  const std::vector<TokenId> src{4, 7, 2, 8};
  const auto states = encode(p, src);
  ASSERT_EQ(states.size(), src.size());
  LstmState<double> s{Vec<double>::Zero(5), Vec<double>::Zero(5)};
  for (std::size_t i = 0; i < src.size(); ++i) {
    s = scalar_lstm(p.encoder, p.src_embeddings.row(src[i]).transpose(), s);
    EXPECT_LT((states[i].h - s.h).norm(), 1e-12);
  }
  EXPECT_THROW(encode(p, {}), std::invalid_argument);

  // Swapping two distinct inputs changes the final state.
  const auto swapped = encode(p, {7, 4, 2, 8});
  EXPECT_GT((swapped.back().h - states.back().h).norm(), 1e-6);
}

TEST(Network, AttentionMatchesScalarFormula) {
  std::mt19937_64 rng(9);
  const auto p = Parameters<double>::random({6, 6, 3, 4}, rng, 1.0);
  std::normal_distribution<double> n;
  Mat<double> states(4, 5);
  for (Eigen::Index k = 0; k < states.size(); ++k) states.data()[k] = n(rng);
  Vec<double> s(4);
  for (auto& v : s) v = n(rng);
  const auto r = attend(p, states, s);

  std::vector<double> score(5);
  double mx = -1e300;
  for (int i = 0; i < 5; ++i) {
    double e = 0.0;
    for (int a = 0; a < 4; ++a) {
      double z = p.att_b(a, 0);
      for (int k = 0; k < 4; ++k) z += p.att_Wh(a, k) * states(k, i) + p.att_Ws(a, k) * s(k);
      e += p.att_v(a, 0) * std::tanh(z);
    }
    score[i] = e;
    mx = std::max(mx, e);
  }
  double z = 0.0;
  for (double& v : score) z += (v = std::exp(v - mx));
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(r.weights(i), score[i] / z, 1e-12);
  EXPECT_NEAR(r.weights.sum(), 1.0, 1e-12);
  EXPECT_LT((r.context - states * r.weights).norm(), 1e-12);
}

TEST(Network, DistributionMixesLexiconAndNormalizes) {
  std::mt19937_64 rng(11);
  const auto p = Parameters<double>::random({6, 5, 3, 4}, rng, 1.0);
  const auto lex = toy_lexicon(6, 5);
  Vec<double> h = Vec<double>::Constant(4, 0.3), ctx = Vec<double>::Constant(4, -0.2);
  const std::vector<TokenId> src{0, 1, 2};
  Vec<double> alpha(3);
  alpha << 0.5, 0.3, 0.2;

  const auto plain = predict_distribution(p, h, ctx, LexiconBias{}, src, alpha);
  EXPECT_NEAR(plain.sum(), 1.0, 1e-12);
  const double lambda = 0.4;
  const auto mixed = predict_distribution(p, h, ctx, LexiconBias{&lex, lambda}, src, alpha);
  EXPECT_NEAR(mixed.sum(), 1.0, 1e-12);
  // Source 1 has no lexicon row, so its attention mass stays with the softmax.
  const double w = 1.0 - lambda + lambda * 0.3;
  for (TokenId e = 0; e < 5; ++e) {
    const double lex_e = 0.5 * lex.lookup(0, e) + 0.2 * lex.lookup(2, e);
    EXPECT_NEAR(mixed(e), w * plain(e) + lambda * lex_e, 1e-6) << e;
  }
}

TEST(Network, DecoderStepColumnsAreIndependent) {
  std::mt19937_64 rng(2);
  const auto p = Parameters<double>::random({7, 6, 3, 4}, rng, 1.0);
  const auto lex = toy_lexicon(7, 6);
  const LexiconBias bias{&lex, 0.2};
  const auto enc = encode_source(p, {3, 5, 6});
  auto batch = initial_decoder(p, enc, 3);
  const auto dist = decoder_step(p, enc, bias, batch, {1, 4, 5});
  for (int k = 0; k < 3; ++k) {
    auto single = initial_decoder(p, enc, 1);
    const TokenId t = std::vector<TokenId>{1, 4, 5}[k];
    const auto d1 = decoder_step(p, enc, bias, single, {t});
    EXPECT_LT((dist.col(k) - d1.col(0)).norm(), 1e-12);
    EXPECT_NEAR(dist.col(k).sum(), 1.0, 1e-12);
  }
}

TEST(Network, BatchLossEqualsSumOfSequenceLogProbs) {
  std::mt19937_64 rng(6);
  const auto p = Parameters<double>::random({9, 8, 4, 5}, rng, 0.7);
  const auto lex = toy_lexicon(9, 8);
  const std::vector<SequencePair> batch{
      {{3, 4, 5, 6}, {3, 7}}, {{8}, {5, 6, 7, 3, 4}}, {{5, 5}, {}}, {{7, 3, 6}, {4, 4, 4}}};
  for (double lambda : {0.0, 0.3}) {
    const LexiconBias bias{&lex, lambda};
    double nll = 0.0;
    std::size_t tokens = 0;
    for (const auto& pair : batch) {
      nll -= sequence_log_prob(p, bias, pair.src, pair.tgt);
      tokens += pair.tgt.size() + 1;
    }
    const auto loss = batch_loss<double>(p, bias, batch, 0.0, nullptr, nullptr);
    EXPECT_EQ(loss.tokens, tokens);
    EXPECT_NEAR(loss.total_nll, nll, 1e-9);
    EXPECT_NEAR(loss.mean(), nll / static_cast<double>(tokens), 1e-12);
  }
}

TEST(Network, GradientsMatchCentralDifferences) {
  std::mt19937_64 rng(17);
  const auto p = Parameters<double>::random({8, 7, 3, 4}, rng, 0.5);
  const auto lex = toy_lexicon(8, 7);
  const std::vector<SequencePair> batch{{{3, 4, 6}, {5, 3}}, {{7, 5}, {6, 4, 5}}};
  for (double lambda : {0.0, 0.25}) {
    const auto r = gradient_check(p, LexiconBias{&lex, lambda}, batch);
    EXPECT_EQ(r.tensors.size(), 16u);
    for (const auto& t : r.tensors) EXPECT_LT(t.relative_error, 1e-4) << t.name;
  }
}

TEST(Network, GradientAccumulates) {
  std::mt19937_64 rng(8);
  const auto p = Parameters<double>::random({6, 6, 3, 3}, rng, 0.5);
  const std::vector<SequencePair> batch{{{3, 4}, {5}}};
  auto once = Parameters<double>::zeros(p.dims);
  batch_loss<double>(p, {}, batch, 0.0, nullptr, &once);
  auto twice = Parameters<double>::zeros(p.dims);
  batch_loss<double>(p, {}, batch, 0.0, nullptr, &twice);
  batch_loss<double>(p, {}, batch, 0.0, nullptr, &twice);
  EXPECT_LT((twice.out_W - 2.0 * once.out_W).norm(), 1e-12);
  EXPECT_LT((twice.encoder.U - 2.0 * once.encoder.U).norm(), 1e-12);
}

TEST(Network, DropoutNeedsDeterministicCheckAndGenerator) {
  std::mt19937_64 rng(1);
  const auto p = Parameters<double>::random({5, 5, 2, 2}, rng);
  const std::vector<SequencePair> batch{{{3}, {4}}};
  EXPECT_THROW(gradient_check(p, {}, batch, 0.3), GradientCheckError);
  EXPECT_THROW(batch_loss<double>(p, {}, batch, 0.3, nullptr, nullptr), std::invalid_argument);
  std::mt19937_64 a(4), b(4);
  const auto la = batch_loss<double>(p, {}, batch, 0.3, &a, nullptr);
  const auto lb = batch_loss<double>(p, {}, batch, 0.3, &b, nullptr);
  EXPECT_EQ(la.total_nll, lb.total_nll);
}

TEST(Network, CastRoundTripsShapes) {
  std::mt19937_64 rng(1);
  const auto p = Parameters<float>::random({5, 6, 3, 4}, rng);
  const auto d = p.cast<double>();
  EXPECT_EQ(d.dims, p.dims);
  EXPECT_EQ(d.parameter_count(), p.parameter_count());
  EXPECT_TRUE(d.all_finite());
  EXPECT_EQ(d.cast<float>().out_W, p.out_W);
}
