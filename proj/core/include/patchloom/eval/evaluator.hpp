#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "patchloom/corpus/corpus.hpp"
#include "patchloom/patch/generator.hpp"

namespace patchloom::eval {

using statement::TokenizedStatement;

enum class Outcome { correct, arg_incorrect, incorrect, na };

const char* outcome_name(Outcome o);

/// NA passes through; Correct on full token equality with the concrete
/// reference; ArgIncorrect when equal after abstracting arguments on both
/// sides; otherwise Incorrect.
Outcome classify_output(const patch::GeneratedPatch& patch, const TokenizedStatement& reference);

struct Counts {
  std::size_t correct = 0;
  std::size_t arg_incorrect = 0;
  std::size_t incorrect = 0;
  std::size_t na = 0;

  std::size_t provided() const { return correct + arg_incorrect + incorrect; }
  std::size_t total() const { return provided() + na; }
  void add(Outcome o);
  bool operator==(const Counts&) const = default;
};

struct EvalReport {
  std::string project;
  std::string filter = "all";
  double threshold = 0.0;
  Counts counts;
  std::size_t n_queries = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;  // nothing provided
  bool f1_undefined = false;         // precision + recall == 0

  /// Rendered as "--" in tables when true.
  bool undefined() const { return precision_undefined || f1_undefined; }
};

/// precision = correct / provided, recall = correct / n_queries, F1 their
/// harmonic mean; undefined ratios are 0 with the matching flag set.
EvalReport compute_metrics(const Counts& counts);
EvalReport compute_metrics(const std::vector<Outcome>& outcomes);

/// Restricts evaluation to a category and/or bug-fix status.
struct QueryFilter {
  std::optional<corpus::Category> category = corpus::Category::NU;
  std::optional<bool> bugfix;

  std::string name() const;
  bool accepts(const corpus::StatementPair& pair) const;
};

/// -1.2, -1.1, ..., -0.1
std::vector<double> default_thresholds();

struct SweepPoint {
  double threshold = 0.0;
  EvalReport report;
};

/// One evaluation per threshold over cached beam outputs. `references`
/// aligns with `candidates`.
std::vector<SweepPoint> sweep_thresholds(const std::vector<patch::Candidates>& candidates,
                                         const std::vector<TokenizedStatement>& references,
                                         const std::vector<double>& thresholds);

/// Fraction of queries whose unthresholded top output is valid.
double validity_rate(const std::vector<patch::Candidates>& candidates);
double validity_rate(std::size_t valid, std::size_t queries);

/// Fixed-width human-readable table.
std::string format_table(const std::vector<EvalReport>& reports);

/// CSV with header project,filter,threshold,correct,arg_incorrect,incorrect,na,precision,recall,f1
void write_reports_csv(std::ostream& out, const std::vector<EvalReport>& reports);
std::string report_json(const EvalReport& report);

void write_sweep_csv(std::ostream& out, const std::vector<double>& thresholds,
                     const std::vector<double>& f1_model, const std::vector<double>& f1_baseline);

/// Count rows for metric reproduction: project,system,correct,arg_incorrect,incorrect,na
/// with optional trailing columns ignored. `system` lands in EvalReport::filter.
std::vector<EvalReport> read_counts_csv(std::istream& in);

std::string format_metric(double value, bool undefined);

}  // namespace patchloom::eval
