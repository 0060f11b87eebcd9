#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

#include "patchloom/eval/evaluator.hpp"

using namespace patchloom;
using namespace patchloom::eval;

namespace {

struct ExpectedRow {
  std::string p, r, f1;
};

std::vector<ExpectedRow> expected_metrics(const std::string& name) {
  std::ifstream in(std::string(PATCHLOOM_FIXTURE_DIR) + "/" + name);
  std::vector<ExpectedRow> out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    out.push_back({cells.at(6), cells.at(7), cells.at(8)});
  }
  return out;
}

void check_fixture(const std::string& name) {
  std::ifstream in(std::string(PATCHLOOM_FIXTURE_DIR) + "/" + name);
  ASSERT_TRUE(in);
  const auto reports = read_counts_csv(in);
  const auto expected = expected_metrics(name);
  ASSERT_EQ(reports.size(), expected.size());
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    const auto& e = expected[i];
    const std::string where = name + " " + r.project + " " + r.filter;
    if (e.f1 == "--") {
      EXPECT_TRUE(r.undefined()) << where;
      continue;
    }
    // Independent recomputation from the raw counts.
    const double provided = static_cast<double>(r.counts.provided());
    const double p = r.counts.correct / provided;
    const double rec = r.counts.correct / static_cast<double>(r.counts.total());
    const double f = 2 * p * rec / (p + rec);
    EXPECT_NEAR(r.precision, p, 1e-12) << where;
    EXPECT_NEAR(r.recall, rec, 1e-12) << where;
    EXPECT_NEAR(r.f1, f, 1e-12) << where;
    EXPECT_LE(std::abs(r.precision - std::stod(e.p)), 0.005 + 1e-9) << where;
    EXPECT_LE(std::abs(r.recall - std::stod(e.r)), 0.005 + 1e-9) << where;
    EXPECT_LE(std::abs(r.f1 - std::stod(e.f1)), 0.005 + 1e-9) << where;
  }
}

patch::GeneratedPatch output(const std::string& joined, bool na = false) {
  patch::GeneratedPatch p;
  p.tokens = statement::from_joined(joined);
  p.abstracted = statement::abstract_arguments(p.tokens).abstracted;
  p.valid = true;
  if (na) p.na_reason = patch::NaReason::low_score;
  return p;
}

}  // namespace

TEST(Evaluator, ReproducesStatementLevelTable) { check_fixture("table5.csv"); }

TEST(Evaluator, ReproducesBugfixTable) { check_fixture("table8.csv"); }

TEST(Evaluator, UndefinedMetrics) {
  const auto none = compute_metrics(Counts{0, 0, 0, 7});
  EXPECT_TRUE(none.precision_undefined);
  EXPECT_TRUE(none.undefined());
  EXPECT_EQ(none.precision, 0.0);
  const auto zero = compute_metrics(Counts{0, 0, 3, 25});
  EXPECT_FALSE(zero.precision_undefined);
  EXPECT_TRUE(zero.f1_undefined);
  EXPECT_EQ(format_metric(zero.f1, zero.undefined()), "--");
  const auto empty = compute_metrics(Counts{});
  EXPECT_TRUE(empty.undefined());
  EXPECT_EQ(empty.recall, 0.0);
  EXPECT_EQ(format_metric(0.5, false), "0.50");
}

TEST(Evaluator, ClassifiesOutputs) {
  const auto ref = statement::from_joined("setSize ( compute ( 3 ) ) ;");
  EXPECT_EQ(classify_output(output("setSize ( compute ( 3 ) ) ;"), ref), Outcome::correct);
  EXPECT_EQ(classify_output(output("setSize ( h ) ;"), ref), Outcome::arg_incorrect);
  EXPECT_EQ(classify_output(output("setWidth ( compute ( 3 ) ) ;"), ref), Outcome::incorrect);
  EXPECT_EQ(classify_output(output("setSize ( compute ( 3 ) ) ;", true), ref), Outcome::na);
}

TEST(Evaluator, CountsFromOutcomes) {
  const std::vector<Outcome> o{Outcome::correct, Outcome::correct, Outcome::na,
                               Outcome::incorrect, Outcome::arg_incorrect};
  const auto r = compute_metrics(o);
  EXPECT_EQ(r.counts, (Counts{2, 1, 1, 1}));
  EXPECT_EQ(r.n_queries, 5u);
  EXPECT_NEAR(r.precision, 0.5, 1e-12);
  EXPECT_NEAR(r.recall, 0.4, 1e-12);
}

TEST(Evaluator, SweepMatchesStandaloneEvaluation) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> score(-1.5, 0.0);
  std::vector<patch::Candidates> cands;
  std::vector<statement::TokenizedStatement> refs;
  const std::vector<std::string> outs{"return height ;", "return width ;", "return this . height ;",
                                      "f ( x ) ;", "f ( y ) ;"};
  for (int i = 0; i < 150; ++i) {
    patch::Candidates c;
    c.query = patch::prepare_query(i % 9 == 0 ? "String s = \"open" : "return this . height ;");
    auto p = output(outs[rng() % outs.size()]);
    p.score = score(rng);
    p.valid = rng() % 5 != 0;
    c.ranked.push_back(p);
    cands.push_back(c);
    refs.push_back(statement::from_joined(i % 2 ? "return height ;" : "f ( x ) ;"));
  }
  const auto thresholds = default_thresholds();
  ASSERT_EQ(thresholds.size(), 12u);
  EXPECT_DOUBLE_EQ(thresholds.front(), -1.2);
  EXPECT_DOUBLE_EQ(thresholds.back(), -0.1);
  const auto sweep = sweep_thresholds(cands, refs, thresholds);
  ASSERT_EQ(sweep.size(), thresholds.size());
  double prev_provided = 1e9;
  for (const auto& point : sweep) {
    Counts c;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      c.add(classify_output(patch::decide(cands[i], 0, point.threshold), refs[i]));
    }
    EXPECT_EQ(point.report.counts, c) << point.threshold;
    EXPECT_EQ(point.report.n_queries, cands.size());
    EXPECT_LE(static_cast<double>(c.provided()), prev_provided);
    prev_provided = static_cast<double>(c.provided());
  }
  const auto at = sweep_thresholds(cands, refs, {-0.7});
  EXPECT_EQ(at.front().report.counts, sweep[5].report.counts);
}

TEST(Evaluator, ValidityRate) {
  EXPECT_NEAR(validity_rate(230, 233), 0.987, 5e-4);
  EXPECT_EQ(validity_rate(0, 0), 0.0);
  std::vector<patch::Candidates> c(4);
  c[0].ranked.push_back(output("x = y ;"));
  c[1].ranked.push_back(output("x = y ;"));
  c[1].ranked[0].valid = false;
  c[2].ranked.push_back(output("x = y ;"));
  EXPECT_NEAR(validity_rate(c), 0.5, 1e-12);
}

TEST(Evaluator, QueryFilters) {
  corpus::StatementPair p;
  p.category = corpus::Category::NU;
  p.bugfix = true;
  EXPECT_TRUE(QueryFilter{}.accepts(p));
  EXPECT_EQ(QueryFilter{}.name(), "NU");
  QueryFilter f{corpus::Category::UQ, std::nullopt};
  EXPECT_FALSE(f.accepts(p));
  f = {std::nullopt, false};
  EXPECT_FALSE(f.accepts(p));
  EXPECT_EQ(f.name(), "all+nonbugfix");
  f = {corpus::Category::NU, true};
  EXPECT_TRUE(f.accepts(p));
  EXPECT_EQ(f.name(), "NU+bugfix");
}

TEST(Evaluator, Renderings) {
  auto r = compute_metrics(Counts{101, 11, 9, 28});
  r.project = "jetty";
  r.filter = "model";
  const auto table = format_table({r});
  EXPECT_NE(table.find("arg_inc"), std::string::npos) << table;
  EXPECT_NE(table.find("0.83"), std::string::npos) << table;

  std::ostringstream csv;
  write_reports_csv(csv, {r});
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')),
            "project,filter,threshold,correct,arg_incorrect,incorrect,na,precision,recall,f1");

  const auto j = nlohmann::json::parse(report_json(r));
  EXPECT_EQ(j["project"], "jetty");
  EXPECT_EQ(j["counts"]["correct"], 101);
  EXPECT_FALSE(j["f1_undefined"].get<bool>());

  std::ostringstream sweep;
  write_sweep_csv(sweep, {-0.7}, {0.5}, {0.25});
  EXPECT_EQ(sweep.str().substr(0, sweep.str().find('\n')), "threshold,f1_model,f1_baseline");

  std::istringstream bad("p,s,1,2\n");
  EXPECT_THROW(read_counts_csv(bad), std::runtime_error);
}
