#include "patchloom/eval/evaluator.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "patchloom/statement/arguments.hpp"

namespace patchloom::eval {

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::correct: return "correct";
    case Outcome::arg_incorrect: return "arg_incorrect";
    case Outcome::incorrect: return "incorrect";
    case Outcome::na: return "na";
  }
  return "na";
}

Outcome classify_output(const patch::GeneratedPatch& patch, const TokenizedStatement& reference) {
  if (patch.is_na()) return Outcome::na;
  if (patch.tokens.tokens == reference.tokens) return Outcome::correct;
  const auto a = statement::abstract_arguments(patch.tokens);
  const auto b = statement::abstract_arguments(reference);
  if (a.abstracted.tokens == b.abstracted.tokens) return Outcome::arg_incorrect;
  return Outcome::incorrect;
}

void Counts::add(Outcome o) {
  switch (o) {
    case Outcome::correct: ++correct; break;
    case Outcome::arg_incorrect: ++arg_incorrect; break;
    case Outcome::incorrect: ++incorrect; break;
    case Outcome::na: ++na; break;
  }
}

EvalReport compute_metrics(const Counts& counts) {
  EvalReport r;
  r.counts = counts;
  r.n_queries = counts.total();
  const auto provided = counts.provided();
  r.precision_undefined = provided == 0;
  r.precision = provided == 0 ? 0.0 : static_cast<double>(counts.correct) / provided;
  r.recall = r.n_queries == 0 ? 0.0 : static_cast<double>(counts.correct) / r.n_queries;
  const double s = r.precision + r.recall;
  r.f1_undefined = s == 0.0;
  r.f1 = s == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / s;
  return r;
}

EvalReport compute_metrics(const std::vector<Outcome>& outcomes) {
  Counts c;
  for (auto o : outcomes) c.add(o);
  return compute_metrics(c);
}

std::string QueryFilter::name() const {
  std::string n = category ? corpus::category_name(*category) : "all";
  if (bugfix) n += *bugfix ? "+bugfix" : "+nonbugfix";
  return n;
}

bool QueryFilter::accepts(const corpus::StatementPair& pair) const {
  if (category && pair.category != *category) return false;
  if (bugfix && pair.bugfix != *bugfix) return false;
  return true;
}

std::vector<double> default_thresholds() {
  std::vector<double> out;
  for (int k = -12; k <= -1; ++k) out.push_back(k / 10.0);
  return out;
}

std::vector<SweepPoint> sweep_thresholds(const std::vector<patch::Candidates>& candidates,
                                         const std::vector<TokenizedStatement>& references,
                                         const std::vector<double>& thresholds) {
  if (candidates.size() != references.size()) {
    throw std::invalid_argument("sweep_thresholds: candidates and references differ in size");
  }
  std::vector<SweepPoint> out;
  for (double t : thresholds) {
    Counts c;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      c.add(classify_output(patch::decide(candidates[i], 0, t), references[i]));
    }
    SweepPoint p;
    p.threshold = t;
    p.report = compute_metrics(c);
    p.report.threshold = t;
    out.push_back(std::move(p));
  }
  return out;
}

double validity_rate(std::size_t valid, std::size_t queries) {
  return queries == 0 ? 0.0 : static_cast<double>(valid) / static_cast<double>(queries);
}

double validity_rate(const std::vector<patch::Candidates>& candidates) {
  std::size_t valid = 0;
  for (const auto& c : candidates) {
    if (!c.ranked.empty() && c.ranked.front().valid) ++valid;
  }
  return validity_rate(valid, candidates.size());
}

std::string format_metric(double value, bool undefined) {
  if (undefined) return "--";
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string format_table(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %-22s %9s %7s %7s %9s %5s %6s %6s %6s\n", "project",
                "filter", "threshold", "correct", "arg_inc", "incorrect", "na", "P", "R", "F1");
  out << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-12s %-22s %9s %7zu %7zu %9zu %5zu %6s %6s %6s\n",
                  r.project.c_str(), r.filter.c_str(), fixed(r.threshold, 1).c_str(),
                  r.counts.correct, r.counts.arg_incorrect, r.counts.incorrect, r.counts.na,
                  format_metric(r.precision, r.undefined()).c_str(),
                  format_metric(r.recall, r.undefined()).c_str(),
                  format_metric(r.f1, r.undefined()).c_str());
    out << line;
  }
  return out.str();
}

void write_reports_csv(std::ostream& out, const std::vector<EvalReport>& reports) {
  out << "project,filter,threshold,correct,arg_incorrect,incorrect,na,precision,recall,f1\n";
  for (const auto& r : reports) {
    out << r.project << ',' << r.filter << ',' << fixed(r.threshold, 1) << ','
        << r.counts.correct << ',' << r.counts.arg_incorrect << ',' << r.counts.incorrect << ','
        << r.counts.na << ',' << fixed(r.precision, 4) << ',' << fixed(r.recall, 4) << ','
        << fixed(r.f1, 4) << '\n';
  }
}

std::string report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["project"] = r.project;
  j["filter"] = r.filter;
  j["threshold"] = r.threshold;
  j["n_queries"] = r.n_queries;
  j["counts"] = {{"correct", r.counts.correct},
                 {"arg_incorrect", r.counts.arg_incorrect},
                 {"incorrect", r.counts.incorrect},
                 {"na", r.counts.na}};
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["precision_undefined"] = r.precision_undefined;
  j["f1_undefined"] = r.f1_undefined;
  return j.dump(2);
}

void write_sweep_csv(std::ostream& out, const std::vector<double>& thresholds,
                     const std::vector<double>& f1_model, const std::vector<double>& f1_baseline) {
  out << "threshold,f1_model,f1_baseline\n";
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    out << fixed(thresholds[i], 1) << ',' << fixed(i < f1_model.size() ? f1_model[i] : 0.0, 4)
        << ',' << fixed(i < f1_baseline.size() ? f1_baseline[i] : 0.0, 4) << '\n';
  }
}

std::vector<EvalReport> read_counts_csv(std::istream& in) {
  std::vector<EvalReport> out;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!header_seen) {
      header_seen = true;
      if (!cells.empty() && cells[0] == "project") continue;
    }
    if (cells.size() < 6) {
      throw std::runtime_error("counts line " + std::to_string(lineno) +
                               ": expected project,system,correct,arg_incorrect,incorrect,na");
    }
    Counts c;
    try {
      c.correct = std::stoul(cells[2]);
      c.arg_incorrect = std::stoul(cells[3]);
      c.incorrect = std::stoul(cells[4]);
      c.na = std::stoul(cells[5]);
    } catch (const std::exception&) {
      throw std::runtime_error("counts line " + std::to_string(lineno) + ": bad count");
    }
    auto r = compute_metrics(c);
    r.project = cells[0];
    r.filter = cells[1];
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace patchloom::eval
