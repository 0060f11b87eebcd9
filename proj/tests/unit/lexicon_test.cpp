#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "patchloom/nmt/lexicon.hpp"

using namespace patchloom::nmt;

namespace {

using Corpus = std::vector<std::vector<TokenId>>;

// Dense Model-1 EM over every (source, target) pair of the vocabularies.
std::vector<std::vector<double>> dense_model1(const Corpus& src, const Corpus& tgt,
                                              std::size_t vs, std::size_t vt, int iterations) {
  std::vector<std::vector<double>> t(vs + 1, std::vector<double>(vt, 1.0 / static_cast<double>(vt)));
  for (int it = 0; it < iterations; ++it) {
    std::vector<std::vector<double>> c(vs + 1, std::vector<double>(vt, 0.0));
    for (std::size_t k = 0; k < src.size(); ++k) {
      std::vector<std::size_t> s{vs};
      for (TokenId f : src[k]) s.push_back(static_cast<std::size_t>(f));
      for (TokenId e : tgt[k]) {
        double z = 0.0;
        for (auto f : s) z += t[f][e];
        for (auto f : s) c[f][e] += t[f][e] / z;
      }
    }
    for (std::size_t f = 0; f <= vs; ++f) {
      double total = 0.0;
      for (double v : c[f]) total += v;
      for (std::size_t e = 0; e < vt; ++e) t[f][e] = total > 0.0 ? c[f][e] / total : 0.0;
    }
  }
  return t;
}

}  // namespace

TEST(Lexicon, FirstIterationByHand) {
  // Pairs (a b -> x y) and (a -> x); ids a=0 b=1, x=0 y=1, NULL row = 2.
  const Corpus src{{0, 1}, {0}};
  const Corpus tgt{{0, 1}, {0}};
  const auto t = model1_table(src, tgt, 2, 2, 1);
  // Uniform start: every posterior in pair 1 is 1/3, in pair 2 it is 1/2.
  // count(a,x) = 1/3 + 1/2, count(a,y) = 1/3; total 7/6.
  EXPECT_NEAR(t[0].at(0), (5.0 / 6.0) / (7.0 / 6.0), 1e-12);
  EXPECT_NEAR(t[0].at(1), (1.0 / 3.0) / (7.0 / 6.0), 1e-12);
  // b only sees pair 1: x and y split evenly.
  EXPECT_NEAR(t[1].at(0), 0.5, 1e-12);
  EXPECT_NEAR(t[1].at(1), 0.5, 1e-12);
  EXPECT_NEAR(t[2].at(0), (5.0 / 6.0) / (7.0 / 6.0), 1e-12);
}

TEST(Lexicon, FivePairToyCorpus) {
  // das Haus / the house style toy: src {0 das,1 Haus,2 Buch,3 ein}, tgt {0 the,1 house,2 book,3 a}.
  const Corpus src{{0, 1}, {0, 2}, {3, 2}, {3, 1}, {0}};
  const Corpus tgt{{0, 1}, {0, 2}, {3, 2}, {3, 1}, {0}};
  const auto sparse = model1_table(src, tgt, 4, 4, 8);
  const auto dense = dense_model1(src, tgt, 4, 4, 8);
  for (std::size_t f = 0; f <= 4; ++f) {
    for (const auto& [e, p] : sparse[f]) EXPECT_NEAR(p, dense[f][e], 1e-6);
  }
  // Co-occurrence makes each word prefer its own translation.
  for (TokenId w = 0; w < 4; ++w) {
    TokenId best = -1;
    double bp = -1;
    for (const auto& [e, p] : sparse[w]) {
      if (p > bp) bp = p, best = e;
    }
    EXPECT_EQ(best, w);
  }
}

TEST(Lexicon, MatchesDenseEmOnRandomCorpus) {
  std::mt19937_64 rng(5);
  const std::size_t vs = 7, vt = 6;
  Corpus src, tgt;
  for (int k = 0; k < 30; ++k) {
    std::vector<TokenId> s, t;
    const int ls = 1 + static_cast<int>(rng() % 4), lt = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < ls; ++i) s.push_back(static_cast<TokenId>(rng() % vs));
    for (int i = 0; i < lt; ++i) t.push_back(static_cast<TokenId>(rng() % vt));
    src.push_back(s);
    tgt.push_back(t);
  }
  for (int iterations : {1, 3, 10}) {
    const auto sparse = model1_table(src, tgt, vs, vt, iterations);
    const auto dense = dense_model1(src, tgt, vs, vt, iterations);
    for (std::size_t f = 0; f <= vs; ++f) {
      for (const auto& [e, p] : sparse[f]) EXPECT_NEAR(p, dense[f][e], 1e-12) << f << "," << e;
      double mass = 0.0;
      for (const auto& [e, p] : sparse[f]) mass += p;
      if (!sparse[f].empty()) {
        EXPECT_NEAR(mass, 1.0, 1e-9) << f;
      }
    }
  }
}

TEST(Lexicon, RowsAreTruncatedAndRenormalized) {
  const Corpus src{{0}, {0}, {0}, {1}};
  const Corpus tgt{{0}, {1}, {2}, {2}};
  LexiconOptions opt;
  opt.iterations = 5;
  opt.top_entries = 2;
  const auto lex = build_lexicon(src, tgt, 3, 3, opt);
  ASSERT_EQ(lex.rows.size(), 3u);
  EXPECT_LE(lex.rows[0].size(), 2u);
  double mass = 0.0;
  for (const auto& [e, p] : lex.rows[0]) mass += p;
  EXPECT_NEAR(mass, 1.0, 1e-6);
  EXPECT_FALSE(lex.has_row(2));
  EXPECT_TRUE(lex.has_row(1));
  EXPECT_GT(lex.lookup(1, 2), 0.5f);
  EXPECT_EQ(lex.lookup(1, 0), 0.0f);
  EXPECT_EQ(lex.lookup(9, 0), 0.0f);
}

TEST(Lexicon, MisalignedCorpusThrows) {
  EXPECT_THROW(model1_table({{0}}, {}, 1, 1, 1), std::invalid_argument);
}
