#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "patchloom/patch/generator.hpp"

using namespace patchloom;
using namespace patchloom::patch;

namespace {

GeneratedPatch candidate(const std::string& abstracted, double score, bool valid) {
  GeneratedPatch p;
  p.abstracted = statement::from_joined(abstracted);
  p.tokens = p.abstracted;
  p.score = score;
  p.valid = valid;
  p.finished = true;
  return p;
}

Candidates with_query(const std::string& query, std::vector<GeneratedPatch> ranked) {
  return {prepare_query(query), std::move(ranked)};
}

corpus::StatementPair pair(const std::string& pre, const std::string& post, int year) {
  corpus::StatementPair p;
  auto a = statement::abstract_arguments(statement::from_joined(pre));
  auto b = statement::abstract_arguments(statement::from_joined(post));
  p.pre = a.abstracted;
  p.pre_args = a.args;
  p.post = b.abstracted;
  p.post_args = b.args;
  p.year_pre = year - 1;
  p.year_post = year;
  return p;
}

nmt::Model random_model(const std::vector<std::string>& queries, std::uint64_t seed) {
  nmt::Model m;
  for (const auto& q : queries) {
    const auto prepared = prepare_query(q);
    for (const auto& t : prepared.abstraction->abstracted.tokens) {
      m.src_vocab.add(t);
      m.tgt_vocab.add(t);
    }
  }
  std::mt19937_64 rng(seed);
  m.params = nmt::Parameters<float>::random(
      {static_cast<int>(m.src_vocab.size()), static_cast<int>(m.tgt_vocab.size()), 8, 8}, rng,
      0.5f);
  m.lexicon_weight = 0.0;
  return m;
}

}  // namespace

TEST(Generator, NaRulesApplyInOrder) {
  const std::string q = "return this . height ;";
  EXPECT_EQ(decide(with_query(q, {candidate(q, -2.0, false)}), 0, -0.7).na_reason,
            NaReason::low_score);
  EXPECT_EQ(decide(with_query(q, {candidate(q, -0.1, false)}), 0, -0.7).na_reason,
            NaReason::invalid);
  EXPECT_EQ(decide(with_query(q, {candidate(q, -0.1, true)}), 0, -0.7).na_reason,
            NaReason::identical);
  const auto ok = decide(with_query(q, {candidate("return height ;", -0.1, true)}), 0, -0.7);
  EXPECT_EQ(ok.na_reason, NaReason::none);
  EXPECT_FALSE(ok.is_na());
  // Exactly at the threshold is kept.
  EXPECT_FALSE(decide(with_query(q, {candidate("return height ;", -0.7, true)}), 0, -0.7).is_na());
}

TEST(Generator, UntokenizableQueriesAreNa) {
  const auto c = with_query("String s = \"open", {});
  EXPECT_FALSE(c.query.abstraction);
  EXPECT_EQ(decide(c, 0, -0.7).na_reason, NaReason::untokenizable);
  EXPECT_EQ(decide(with_query("x = 1 ;", {}), 3, -0.7).na_reason, NaReason::untokenizable);
}

TEST(Generator, RaisingThresholdOnlyRemovesOutputs) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> score(-3.0, 0.0);
  std::vector<Candidates> all;
  for (int i = 0; i < 200; ++i) {
    all.push_back(with_query("x = y ;", {candidate("x = z ;", score(rng), rng() % 4 != 0)}));
  }
  std::size_t previous = all.size() + 1;
  for (double t = -3.0; t <= 0.0; t += 0.1) {
    std::size_t provided = 0;
    for (const auto& c : all) {
      const bool kept = !decide(c, 0, t).is_na();
      provided += kept;
      if (kept) {
        EXPECT_FALSE(decide(c, 0, t - 0.1).is_na());
      }
    }
    EXPECT_LE(provided, previous);
    previous = provided;
  }
}

TEST(Generator, ModelCandidatesCarryBeamScores) {
  const std::vector<std::string> queries{"return this . height ;", "log . trace ( msg ) ;",
                                         "items [ 3 ] = value ;", "x = y + z ;"};
  const auto model = random_model(queries, 4);
  GenerateOptions opt;
  opt.beam = {4, 8};
  opt.top_k = 3;
  for (const auto& q : queries) {
    const auto c = model_candidates(prepare_query(q), model, opt);
    ASSERT_FALSE(c.ranked.empty());
    EXPECT_LE(c.ranked.size(), 3u);
    for (std::size_t i = 1; i < c.ranked.size(); ++i) {
      EXPECT_GE(c.ranked[i - 1].score, c.ranked[i].score);
    }
    for (const auto& p : c.ranked) {
      if (!p.finished) {
        EXPECT_FALSE(p.valid);
      }
      EXPECT_EQ(p.source, PatchSource::model);
    }
    const auto g = generate(q, model, opt);
    EXPECT_EQ(g.abstracted.tokens, c.ranked.front().abstracted.tokens);
  }
}

TEST(Generator, ParallelCandidatesMatchSerial) {
  std::vector<std::string> queries;
  for (int i = 0; i < 12; ++i) queries.push_back("v" + std::to_string(i) + " = f ( a ) ;");
  queries.push_back("String s = \"open");
  auto model = random_model({queries.begin(), queries.end() - 1}, 9);
  GenerateOptions opt;
  opt.beam = {3, 6};
  const auto serial = model_candidates_all(queries, model, opt, 1);
  const auto parallel = model_candidates_all(queries, model, opt, 4);
  ASSERT_EQ(serial.size(), queries.size());
  ASSERT_EQ(parallel.size(), queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    EXPECT_EQ(serial[i].query.raw, queries[i]);
    ASSERT_EQ(serial[i].ranked.size(), parallel[i].ranked.size());
    for (std::size_t k = 0; k < serial[i].ranked.size(); ++k) {
      EXPECT_EQ(serial[i].ranked[k].tokens.tokens, parallel[i].ranked[k].tokens.tokens);
      EXPECT_EQ(serial[i].ranked[k].score, parallel[i].ranked[k].score);
    }
  }
  EXPECT_TRUE(serial.back().ranked.empty());
}

TEST(Generator, BaselineReturnsSelectedPostWithArguments) {
  const std::vector<corpus::StatementPair> train{
      pair("setHeight ( h ) ;", "setWidth ( h ) ;", 2010),
      pair("setHeight ( w ) ;", "setSize ( w ) ;", 2012),
      pair("return this . height ;", "return height ;", 2011)};
  const BaselineIndex index(train);
  EXPECT_EQ(index.size(), 2u);
  const auto p = baseline_suggest("setHeight(compute(3));", index);
  ASSERT_FALSE(p.is_na());
  EXPECT_EQ(p.source, PatchSource::baseline);
  EXPECT_EQ(p.tokens.joined(), "setSize ( compute ( 3 ) ) ;");
  EXPECT_EQ(p.abstracted.joined(), "setSize ( arg ) ;");
  EXPECT_EQ(p.score, 0.0);
  EXPECT_EQ(baseline_suggest("return this.width;", index).na_reason, NaReason::no_match);
  EXPECT_EQ(baseline_suggest("String s = \"open", index).na_reason, NaReason::untokenizable);
}

TEST(Generator, BaselineInvalidPostIsNa) {
  const BaselineIndex index({pair("x = y ;", "x = = y ;", 2010)});
  EXPECT_EQ(baseline_suggest("x = y;", index).na_reason, NaReason::invalid);
}

TEST(Generator, BaselineIgnoresTrainingOrder) {
  std::vector<corpus::StatementPair> train;
  for (int i = 0; i < 60; ++i) {
    const std::string f = "f" + std::to_string(i % 7);
    train.push_back(pair("return this . " + f + " ;",
                         "return " + f + std::to_string(i % 3) + " ;", 2010 + i % 4));
  }
  const BaselineIndex reference(train);
  std::mt19937_64 rng(3);
  for (int round = 0; round < 5; ++round) {
    std::shuffle(train.begin(), train.end(), rng);
    const BaselineIndex shuffled(train);
    ASSERT_EQ(shuffled.size(), reference.size());
    for (int k = 0; k < 7; ++k) {
      const auto key = statement::from_joined("return this . f" + std::to_string(k) + " ;").tokens;
      ASSERT_NE(reference.lookup(key), nullptr);
      EXPECT_EQ(*shuffled.lookup(key), *reference.lookup(key));
    }
  }
}

TEST(Generator, Names) {
  EXPECT_STREQ(na_reason_name(NaReason::low_score), "low_score");
  EXPECT_STREQ(source_name(PatchSource::baseline), "baseline");
}
