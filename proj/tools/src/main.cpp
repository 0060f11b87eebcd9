#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <deque>
#include <iostream>

#include "commands.hpp"
#include "patchloom/corpus/corpus.hpp"
#include "patchloom/nmt/model.hpp"
#include "patchloom/repo/repository.hpp"

namespace {

using namespace patchloom::cli;

/// Config-file plumbing shared by every subcommand. Flags registered with
/// key() are applied through the same key table as the config file, after
/// the file and any --set overrides.
class ConfigFlags {
 public:
  explicit ConfigFlags(CLI::App* app) : app_(app) {
    app->add_option("--config", path_, "Flat key=value config file");
    app->add_option("--set", sets_, "Override a config key (key=value), repeatable");
  }

  ConfigFlags& key(const std::string& flag, const std::string& key, const std::string& help) {
    auto& e = entries_.emplace_back(Entry{flag, key, {}, nullptr});
    e.option = app_->add_option(flag, e.value, help + " [" + key + "]");
    return *this;
  }

  RunConfig resolve() const {
    RunConfig config;
    if (!path_.empty()) load_config(path_, config);
    apply_overrides(config, sets_);
    for (const auto& e : entries_) {
      if (e.option->count() > 0) set_config_value(config, e.key, e.value);
    }
    apply_environment(config);
    return config;
  }

 private:
  struct Entry {
    std::string flag;
    std::string key;
    std::string value;
    CLI::Option* option;
  };
  CLI::App* app_;
  std::string path_;
  std::vector<std::string> sets_;
  std::deque<Entry> entries_;
};

void add_filter_flags(ConfigFlags& f) {
  f.key("--category", "category", "Test category filter: NU, UQ, UR or all")
      .key("--bugfix", "bugfix", "Bug-fix filter: true, false or all");
}

void add_decode_flags(ConfigFlags& f) {
  f.key("--threshold", "threshold", "Log-probability threshold")
      .key("--beam-size", "beam_size", "Beam width")
      .key("--max-len", "max_len", "Maximum generated tokens")
      .key("--jobs", "jobs", "Worker threads");
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("patchloom");
  logger->set_pattern("%Y-%m-%dT%H:%M:%S.%e %l %v");
  spdlog::set_default_logger(logger);

  CLI::App app{"Learns statement-level fixes from version history and suggests patches"};
  app.require_subcommand(1);

  MineArgs mine;
  auto* mine_cmd = app.add_subcommand("mine", "Extract change hunks and fix links from a repository");
  ConfigFlags mine_flags(mine_cmd);
  mine_flags.key("--repo", "repo", "Git work tree or synthetic:<seed>[:<commits>]")
      .key("--since", "since", "First year to mine")
      .key("--until", "until", "Last year to mine")
      .key("--jobs", "jobs", "Worker threads");
  mine_cmd->add_option("--out", mine.out, "Hunk dump (JSON lines)")->capture_default_str();
  mine_cmd->add_option("--links", mine.links, "Fix links TSV (default: fix_links.tsv next to --out)");

  BuildCorpusArgs build;
  auto* build_cmd = app.add_subcommand("build-corpus", "Preprocess hunks into train/test corpora");
  ConfigFlags build_flags(build_cmd);
  build_flags.key("--test-year", "test_year", "Year held out as the test period (default: last)")
      .key("--max-rare-count", "max_rare_count", "Tokens seen at most this often become <unk>");
  build_cmd->add_option("--hunks", build.hunks, "Hunk dump from mine")->capture_default_str();
  build_cmd->add_option("--links", build.links, "Fix links TSV (default: next to --hunks)");
  build_cmd->add_option("--out", build.out, "Corpus directory")->capture_default_str();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train the translation model");
  ConfigFlags train_flags(train_cmd);
  train_flags.key("--seed", "seed", "Random seed")
      .key("--epochs", "max_epochs", "Maximum epochs")
      .key("--hidden", "hidden", "LSTM width")
      .key("--embedding", "embedding", "Embedding width")
      .key("--learning-rate", "learning_rate", "Adam learning rate")
      .key("--minibatch-words", "minibatch_words", "Target tokens per minibatch")
      .key("--dropout", "dropout", "Dropout rate")
      .key("--use-lexicon", "use_lexicon", "Mix in the alignment lexicon (true/false)")
      .key("--lexicon-weight", "lexicon_weight", "Lexicon mixture weight");
  train_cmd->add_option("--corpus", train.corpus, "Corpus directory")->capture_default_str();
  train_cmd->add_option("--out", train.out, "Model file")->capture_default_str();
  train_cmd->add_option("--history", train.history, "Per-epoch loss CSV");

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "Suggest patches for query statements");
  ConfigFlags gen_flags(gen_cmd);
  add_decode_flags(gen_flags);
  gen_flags.key("--top-k", "top_k", "Hypotheses reported per query");
  gen_cmd->add_option("--model", gen.model, "Model file")->capture_default_str();
  gen_cmd->add_option("--query-file", gen.queries, "One query statement per line")->required();
  gen_cmd->add_option("--out", gen.out, "Patch records (JSON lines)")->capture_default_str();

  BaselineArgs base;
  auto* base_cmd = app.add_subcommand("baseline", "Exact-match suggestions from training pairs");
  ConfigFlags base_flags(base_cmd);
  base_cmd->add_option("--corpus", base.corpus, "Corpus directory")->capture_default_str();
  base_cmd->add_option("--query-file", base.queries, "One query statement per line")->required();
  base_cmd->add_option("--out", base.out, "Patch records (JSON lines)")->capture_default_str();

  EvaluateArgs evaluate;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score patch records against references");
  ConfigFlags eval_flags(eval_cmd);
  add_filter_flags(eval_flags);
  eval_flags.key("--threshold", "threshold", "Threshold recorded in the reports");
  eval_cmd->add_option("--counts", evaluate.counts,
                       "CSV of project,system,correct,arg_incorrect,incorrect,na rows");
  eval_cmd->add_option("--corpus", evaluate.corpus, "Corpus directory")->capture_default_str();
  eval_cmd->add_option("--patches", evaluate.patches, "Patch records aligned with test.query");
  eval_cmd->add_option("--project", evaluate.project, "Project label")->capture_default_str();
  eval_cmd->add_option("--csv", evaluate.csv, "Report CSV");
  eval_cmd->add_option("--json", evaluate.json, "Report JSON");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "F1 over a threshold grid, model vs. baseline");
  ConfigFlags sweep_flags(sweep_cmd);
  add_filter_flags(sweep_flags);
  add_decode_flags(sweep_flags);
  sweep_cmd->add_option("--model", sweep.model, "Model file")->capture_default_str();
  sweep_cmd->add_option("--corpus", sweep.corpus, "Corpus directory")->capture_default_str();
  sweep_cmd->add_option("--thresholds", sweep.thresholds, "Ascending thresholds (default -1.2..-0.1)")
      ->delimiter(',');
  sweep_cmd->add_option("--project", sweep.project, "Project label")->capture_default_str();
  sweep_cmd->add_option("--out", sweep.out, "threshold,f1_model,f1_baseline CSV")
      ->capture_default_str();
  sweep_cmd->add_option("--csv", sweep.csv, "Full report CSV per threshold");

  auto* self_cmd = app.add_subcommand("selftest", "Gradient, normalization and beam checks");
  ConfigFlags self_flags(self_cmd);
  self_flags.key("--seed", "seed", "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*mine_cmd) return run_mine(mine_flags.resolve(), mine);
    if (*build_cmd) return run_build_corpus(build_flags.resolve(), build);
    if (*train_cmd) return run_train(train_flags.resolve(), train);
    if (*gen_cmd) return run_generate(gen_flags.resolve(), gen);
    if (*base_cmd) return run_baseline(base_flags.resolve(), base);
    if (*eval_cmd) return run_evaluate(eval_flags.resolve(), evaluate);
    if (*sweep_cmd) return run_sweep(sweep_flags.resolve(), sweep);
    if (*self_cmd) return run_selftest(self_flags.resolve());
  } catch (const ConfigError& e) {
    spdlog::error("usage: {}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 2;
}
