#include "commands.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>

#include "patchloom/corpus/corpus_io.hpp"
#include "patchloom/eval/evaluator.hpp"
#include "patchloom/nmt/model.hpp"
#include "patchloom/patch/generator.hpp"
#include "patchloom/repo/hunk_io.hpp"
#include "patchloom/repo/miner.hpp"
#include "patchloom/synth/synthetic.hpp"

namespace patchloom::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot read " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write " + path.string());
  return out;
}

void require_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DomainError("not a directory: " + dir.string());
}

std::vector<std::string> read_lines(const fs::path& path) {
  auto in = open_input(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::unique_ptr<repo::Repository> open_repository(const std::string& uri) {
  if (uri.empty()) throw DomainError("no repository given (--repo)");
  synth::SyntheticRepoOptions options;
  if (synth::parse_synthetic_uri(uri, options)) {
    return std::make_unique<repo::MemoryRepository>(synth::generate_repository(options));
  }
  try {
    return std::make_unique<repo::GitRepository>(uri);
  } catch (const repo::RepositoryError& e) {
    throw DomainError(e.what());
  }
}

patch::GenerateOptions generate_options(const RunConfig& config) {
  patch::GenerateOptions o;
  o.threshold = config.threshold;
  o.beam.beam_size = config.beam_size;
  o.beam.max_len = config.max_len;
  o.top_k = config.top_k;
  if (o.beam.beam_size < 1 || o.beam.max_len < 1) {
    throw ConfigError("beam_size and max_len must be at least 1");
  }
  return o;
}

json patch_record(const patch::GeneratedPatch& p, bool has_candidate) {
  json j;
  j["patch"] = p.is_na() ? json(nullptr) : json(p.tokens.joined());
  j["score"] = has_candidate ? json(p.score) : json(nullptr);
  j["valid"] = p.valid;
  j["na_reason"] = p.is_na() ? json(patch::na_reason_name(p.na_reason)) : json(nullptr);
  return j;
}

json model_record(const patch::Candidates& c, double threshold, std::size_t top_k) {
  json j;
  j["query"] = c.query.raw;
  const auto best = patch::decide(c, 0, threshold);
  const auto fields = patch_record(best, !c.ranked.empty());
  for (const auto& [k, v] : fields.items()) j[k] = v;
  j["source"] = "model";
  if (top_k > 1) {
    json alternatives = json::array();
    for (std::size_t r = 1; r < c.ranked.size(); ++r) {
      alternatives.push_back(patch_record(patch::decide(c, r, threshold), true));
    }
    j["alternatives"] = std::move(alternatives);
  }
  return j;
}

json baseline_record(const std::string& query, const patch::GeneratedPatch& p) {
  json j;
  j["query"] = query;
  const auto fields = patch_record(p, p.na_reason != patch::NaReason::no_match &&
                                          p.na_reason != patch::NaReason::untokenizable);
  for (const auto& [k, v] : fields.items()) j[k] = v;
  j["source"] = "baseline";
  return j;
}

patch::NaReason parse_na_reason(const std::string& name) {
  using patch::NaReason;
  for (auto r : {NaReason::low_score, NaReason::invalid, NaReason::identical,
                 NaReason::untokenizable, NaReason::no_match}) {
    if (name == patch::na_reason_name(r)) return r;
  }
  throw DomainError("unknown na_reason '" + name + "'");
}

struct PatchFile {
  std::string source = "model";
  std::vector<patch::GeneratedPatch> patches;
};

PatchFile read_patch_file(const fs::path& path) {
  auto in = open_input(path);
  PatchFile file;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DomainError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    patch::GeneratedPatch p;
    const auto source = j.value("source", std::string("model"));
    p.source = source == "baseline" ? patch::PatchSource::baseline : patch::PatchSource::model;
    if (file.patches.empty()) file.source = source;
    p.valid = j.value("valid", false);
    if (j.contains("score") && j["score"].is_number()) p.score = j["score"].get<double>();
    if (j.contains("patch") && j["patch"].is_string()) {
      p.tokens = statement::from_joined(j["patch"].get<std::string>());
    } else {
      const auto reason = j.contains("na_reason") && j["na_reason"].is_string()
                              ? j["na_reason"].get<std::string>()
                              : std::string("low_score");
      p.na_reason = parse_na_reason(reason);
    }
    file.patches.push_back(std::move(p));
  }
  return file;
}

std::vector<eval::QueryFilter> report_filters(const RunConfig& config) {
  std::vector<eval::QueryFilter> filters;
  if (config.bugfix) {
    filters.push_back({config.category, config.bugfix});
  } else {
    filters.push_back({config.category, true});
    filters.push_back({config.category, false});
    filters.push_back({config.category, std::nullopt});
  }
  return filters;
}

void write_json_reports(const fs::path& path, const std::vector<eval::EvalReport>& reports) {
  auto out = open_output(path);
  out << "[";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out << (i ? ",\n" : "\n") << eval::report_json(reports[i]);
  }
  out << "\n]\n";
}

}  // namespace

int run_mine(const RunConfig& config, const MineArgs& args) {
  Stopwatch clock;
  auto repository = open_repository(config.repo);
  repo::MiningOptions options;
  options.since = config.since;
  options.until = config.until;
  options.jobs = config.jobs;
  repo::MiningReport report;
  const auto hunks = repo::mine_hunks(*repository, options, &report);

  const auto fixing = repo::identify_fix_commits(repo::ordered_commits(*repository));
  const auto links = repo::link_inducing(repo::select_fix_hunks(hunks, fixing));

  auto out = open_output(args.out);
  repo::write_hunks(out, hunks);
  const auto links_path =
      args.links.empty() ? args.out.parent_path() / "fix_links.tsv" : args.links;
  auto lout = open_output(links_path);
  repo::write_fix_links(lout, links);

  spdlog::info(
      "stage=mine commits={} in_range={} merges_skipped={} files_modified={} hunks={} "
      "pair_hunks={} origin_unknown={} renames_skipped={} scope_warnings={} fixing_commits={} "
      "fix_links={} seconds={:.2f}",
      report.commits_seen, report.commits_in_range, report.merges_skipped,
      report.files_modified, report.hunks, report.pair_hunks, report.origin_unknown,
      report.renames_skipped, report.scope_parse_warnings, fixing.size(), links.size(),
      clock.seconds());
  return 0;
}

int run_build_corpus(const RunConfig& config, const BuildCorpusArgs& args) {
  Stopwatch clock;
  auto in = open_input(args.hunks);
  const auto hunks = repo::read_hunks(in);
  std::vector<repo::FixLink> links;
  const auto links_path =
      args.links.empty() ? args.hunks.parent_path() / "fix_links.tsv" : args.links;
  if (!args.links.empty() || fs::exists(links_path)) {
    auto lin = open_input(links_path);
    links = repo::read_fix_links(lin);
  }
  if (hunks.empty()) throw DomainError(args.hunks.string() + " holds no hunks");

  corpus::CorpusOptions options;
  options.max_rare_count = config.max_rare_count;
  int first = hunks.front().year_post, last = first;
  for (const auto& h : hunks) {
    first = std::min(first, h.year_post);
    last = std::max(last, h.year_post);
  }
  options.test_year = config.test_year.value_or(last);
  if (options.test_year < first || options.test_year > last) {
    throw DomainError("test_year " + std::to_string(options.test_year) +
                      " lies outside the mined span " + std::to_string(first) + "-" +
                      std::to_string(last));
  }
  const auto built = corpus::build_corpus(hunks, links, options);
  fs::create_directories(args.out);
  corpus::write_corpus(args.out, built);

  const auto& l = built.ledger;
  spdlog::info(
      "stage=build-corpus test_year={} before={} too_short={} unparsable={} lost_candidates={} "
      "identical={} final={}",
      options.test_year, l.before, l.too_short, l.unparsable, l.lost_candidates, l.identical,
      l.final_pairs);
  std::size_t nu = 0, uq = 0, ur = 0, fixes = 0;
  for (const auto& p : built.test) {
    nu += p.category == corpus::Category::NU;
    uq += p.category == corpus::Category::UQ;
    ur += p.category == corpus::Category::UR;
    fixes += p.bugfix;
  }
  spdlog::info(
      "stage=build-corpus train_pairs={} src_vocab={} tgt_vocab={} test_pairs={} NU={} UQ={} "
      "UR={} bugfix={} seconds={:.2f}",
      built.train.pairs.size(), built.train.src_vocab.size(), built.train.tgt_vocab.size(),
      built.test.size(), nu, uq, ur, fixes, clock.seconds());
  return 0;
}

int run_train(const RunConfig& config, const TrainArgs& args) {
  require_dir(args.corpus);
  auto corpus = corpus::read_training_corpus(args.corpus);
  if (corpus.pairs.empty()) throw DomainError(args.corpus.string() + " has no training pairs");
  nmt::TrainingData data;
  data.src = std::move(corpus.src);
  data.tgt = std::move(corpus.tgt);
  for (const auto& p : corpus.pairs) data.year_post.push_back(p.year_post);
  data.src_vocab = std::move(corpus.src_vocab);
  data.tgt_vocab = std::move(corpus.tgt_vocab);

  auto training = config.training;
  training.seed = config.seed;
  try {
    training.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  spdlog::info("stage=train pairs={} src_vocab={} tgt_vocab={} hidden={} embedding={} epochs={}",
               data.src.size(), data.src_vocab.size(), data.tgt_vocab.size(), training.hidden,
               training.embedding, training.max_epochs);

  std::ofstream history;
  if (!args.history.empty()) {
    history = open_output(args.history);
    history << "epoch,train_loss,dev_loss,learning_rate,improved\n";
  }
  auto result = nmt::train(data, training, [&](const nmt::EpochStats& s) {
    spdlog::info("stage=train epoch={} train_loss={:.5f} dev_loss={:.5f} lr={:.6g} improved={} "
                 "seconds={:.2f}",
                 s.epoch, s.train_loss, s.dev_loss, s.learning_rate, s.improved, s.seconds);
    if (history.is_open()) {
      history << s.epoch << ',' << s.train_loss << ',' << s.dev_loss << ',' << s.learning_rate
              << ',' << (s.improved ? 1 : 0) << '\n';
    }
  });
  if (args.out.has_parent_path()) fs::create_directories(args.out.parent_path());
  nmt::save_model(args.out, result.model);
  spdlog::info("stage=train best_epoch={} parameters={} model={}", result.best_epoch,
               result.model.params.parameter_count(), args.out.string());
  if (result.aborted) throw DomainError(result.diagnostic);
  return 0;
}

int run_generate(const RunConfig& config, const GenerateArgs& args) {
  Stopwatch clock;
  if (args.queries.empty()) throw ConfigError("generate needs --query-file");
  const auto model = nmt::load_model(args.model);
  const auto queries = read_lines(args.queries);
  const auto options = generate_options(config);
  const auto candidates = patch::model_candidates_all(queries, model, options, config.jobs);

  auto out = open_output(args.out);
  std::size_t provided = 0;
  for (const auto& c : candidates) {
    const auto record = model_record(c, config.threshold, options.top_k);
    provided += !record["patch"].is_null();
    out << record.dump() << '\n';
  }
  spdlog::info("stage=generate queries={} provided={} validity_rate={:.4f} threshold={} "
               "seconds={:.2f}",
               queries.size(), provided, eval::validity_rate(candidates), config.threshold,
               clock.seconds());
  return 0;
}

int run_baseline(const RunConfig&, const BaselineArgs& args) {
  if (args.queries.empty()) throw ConfigError("baseline needs --query-file");
  require_dir(args.corpus);
  const auto corpus = corpus::read_training_corpus(args.corpus);
  const patch::BaselineIndex index(corpus.pairs);
  const auto queries = read_lines(args.queries);
  auto out = open_output(args.out);
  std::size_t provided = 0;
  for (const auto& q : queries) {
    const auto p = patch::baseline_suggest(q, index);
    provided += !p.is_na();
    out << baseline_record(q, p).dump() << '\n';
  }
  spdlog::info("stage=baseline index={} queries={} provided={}", index.size(), queries.size(),
               provided);
  return 0;
}

int run_evaluate(const RunConfig& config, const EvaluateArgs& args) {
  std::vector<eval::EvalReport> reports;
  if (!args.counts.empty()) {
    auto in = open_input(args.counts);
    try {
      reports = eval::read_counts_csv(in);
    } catch (const std::runtime_error& e) {
      throw DomainError(args.counts.string() + ": " + e.what());
    }
  } else {
    if (args.patches.empty()) throw ConfigError("evaluate needs --patches or --counts");
    require_dir(args.corpus);
    const auto tests = corpus::read_test_pairs(args.corpus);
    for (const auto& path : args.patches) {
      const auto file = read_patch_file(path);
      if (file.patches.size() != tests.size()) {
        throw DomainError(path.string() + " has " + std::to_string(file.patches.size()) +
                          " records for " + std::to_string(tests.size()) + " test pairs");
      }
      for (const auto& filter : report_filters(config)) {
        eval::Counts counts;
        for (std::size_t i = 0; i < tests.size(); ++i) {
          if (!filter.accepts(tests[i])) continue;
          counts.add(eval::classify_output(file.patches[i], tests[i].concrete_post()));
        }
        auto r = eval::compute_metrics(counts);
        r.project = args.project;
        r.filter = file.source + ":" + filter.name();
        r.threshold = config.threshold;
        reports.push_back(std::move(r));
      }
    }
  }
  std::cout << eval::format_table(reports);
  if (!args.csv.empty()) {
    auto out = open_output(args.csv);
    eval::write_reports_csv(out, reports);
  }
  if (!args.json.empty()) write_json_reports(args.json, reports);
  spdlog::info("stage=evaluate reports={}", reports.size());
  return 0;
}

int run_sweep(const RunConfig& config, const SweepArgs& args) {
  Stopwatch clock;
  require_dir(args.corpus);
  auto thresholds = args.thresholds.empty() ? eval::default_thresholds() : args.thresholds;
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw ConfigError("thresholds must be sorted ascending");
  }
  const auto model = nmt::load_model(args.model);
  const auto training = corpus::read_training_corpus(args.corpus);
  const patch::BaselineIndex index(training.pairs);
  const eval::QueryFilter filter{config.category, config.bugfix};

  std::vector<std::string> queries;
  std::vector<statement::TokenizedStatement> references;
  for (const auto& p : corpus::read_test_pairs(args.corpus)) {
    if (!filter.accepts(p)) continue;
    queries.push_back(p.concrete_pre().joined());
    references.push_back(p.concrete_post());
  }
  auto options = generate_options(config);
  options.top_k = 1;
  const auto candidates = patch::model_candidates_all(queries, model, options, config.jobs);
  const auto points = eval::sweep_thresholds(candidates, references, thresholds);

  eval::Counts base;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    base.add(eval::classify_output(patch::baseline_suggest(queries[i], index), references[i]));
  }
  auto base_report = eval::compute_metrics(base);

  std::vector<double> f1_model, f1_base;
  std::vector<eval::EvalReport> reports;
  for (const auto& point : points) {
    f1_model.push_back(point.report.f1);
    f1_base.push_back(base_report.f1);
    auto r = point.report;
    r.project = args.project;
    r.filter = "model:" + filter.name();
    reports.push_back(std::move(r));
  }
  base_report.project = args.project;
  base_report.filter = "baseline:" + filter.name();
  reports.push_back(base_report);

  auto out = open_output(args.out);
  eval::write_sweep_csv(out, thresholds, f1_model, f1_base);
  if (!args.csv.empty()) {
    auto rout = open_output(args.csv);
    eval::write_reports_csv(rout, reports);
  }
  std::cout << eval::format_table(reports);
  spdlog::info("stage=sweep queries={} thresholds={} validity_rate={:.4f} seconds={:.2f}",
               queries.size(), thresholds.size(), eval::validity_rate(candidates),
               clock.seconds());
  return 0;
}

}  // namespace patchloom::cli
