#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"

namespace patchloom::cli {

/// Input/output or data problem: exit status 1.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MineArgs {
  std::filesystem::path out = "hunks.jsonl";
  std::filesystem::path links;
};

struct BuildCorpusArgs {
  std::filesystem::path hunks = "hunks.jsonl";
  std::filesystem::path links;
  std::filesystem::path out = "corpus";
};

struct TrainArgs {
  std::filesystem::path corpus = "corpus";
  std::filesystem::path out = "model.plm";
  std::filesystem::path history;
};

struct GenerateArgs {
  std::filesystem::path model = "model.plm";
  std::filesystem::path queries;
  std::filesystem::path out = "patches.jsonl";
};

struct BaselineArgs {
  std::filesystem::path corpus = "corpus";
  std::filesystem::path queries;
  std::filesystem::path out = "baseline.jsonl";
};

struct EvaluateArgs {
  std::filesystem::path counts;
  std::filesystem::path corpus = "corpus";
  std::vector<std::filesystem::path> patches;
  std::string project = "project";
  std::filesystem::path csv;
  std::filesystem::path json;
};

struct SweepArgs {
  std::filesystem::path model = "model.plm";
  std::filesystem::path corpus = "corpus";
  std::vector<double> thresholds;
  std::string project = "project";
  std::filesystem::path out = "sweep.csv";
  std::filesystem::path csv;
};

int run_mine(const RunConfig& config, const MineArgs& args);
int run_build_corpus(const RunConfig& config, const BuildCorpusArgs& args);
int run_train(const RunConfig& config, const TrainArgs& args);
int run_generate(const RunConfig& config, const GenerateArgs& args);
int run_baseline(const RunConfig& config, const BaselineArgs& args);
int run_evaluate(const RunConfig& config, const EvaluateArgs& args);
int run_sweep(const RunConfig& config, const SweepArgs& args);
int run_selftest(const RunConfig& config);

}  // namespace patchloom::cli
