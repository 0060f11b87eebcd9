#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "patchloom/corpus/corpus.hpp"
#include "patchloom/nmt/model.hpp"

namespace patchloom::cli {

/// Malformed configuration: exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string repo;
  std::optional<int> test_year;
  std::string output_dir = ".";
  std::uint64_t seed = 1;
  double threshold = -0.7;
  unsigned jobs = 1;
  std::optional<int> since;
  std::optional<int> until;
  std::optional<corpus::Category> category = corpus::Category::NU;
  std::optional<bool> bugfix;
  std::size_t max_rare_count = 1;
  int beam_size = 10;
  int max_len = 100;
  std::size_t top_k = 1;
  nmt::TrainingConfig training;
};

/// Assigns one key. Throws ConfigError naming the key on unknown keys or
/// unparsable values.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Applies a flat key=value file: `#` starts a comment, blank lines are
/// skipped, keys are fail-closed.
void load_config(const std::filesystem::path& path, RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);

/// Applies `key=value` overrides in order.
void apply_overrides(RunConfig& config, const std::vector<std::string>& assignments);

/// PATCHLOOM_SEED, when set, wins over file and flags.
void apply_environment(RunConfig& config);

std::vector<std::string> config_keys();

}  // namespace patchloom::cli
