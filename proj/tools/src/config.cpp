#include "config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>

namespace patchloom::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = first + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || value.empty()) {
    throw ConfigError("bad value '" + value + "' for key '" + key + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("bad boolean '" + value + "' for key '" + key + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

template <class T, class F>
Setter number(F field) {
  return [field](RunConfig& c, const std::string& k, const std::string& v) {
    field(c) = parse_number<T>(k, v);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"repo", [](RunConfig& c, const std::string&, const std::string& v) { c.repo = v; }},
      {"output_dir",
       [](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
      {"test_year", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.test_year = parse_number<int>(k, v);
       }},
      {"since", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.since = parse_number<int>(k, v);
       }},
      {"until", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.until = parse_number<int>(k, v);
       }},
      {"seed", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.seed = parse_number<std::uint64_t>(k, v);
         c.training.seed = c.seed;
       }},
      {"threshold", number<double>([](RunConfig& c) -> double& { return c.threshold; })},
      {"jobs", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.jobs = parse_number<unsigned>(k, v);
         if (c.jobs == 0) throw ConfigError("jobs must be at least 1");
       }},
      {"category", [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "all") {
           c.category.reset();
           return;
         }
         c.category = corpus::parse_category(v);
         if (!c.category) {
           throw ConfigError("bad value '" + v + "' for key '" + k + "' (NU, UQ, UR or all)");
         }
       }},
      {"bugfix", [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "all") {
           c.bugfix.reset();
         } else {
           c.bugfix = parse_bool(k, v);
         }
       }},
      {"max_rare_count",
       number<std::size_t>([](RunConfig& c) -> std::size_t& { return c.max_rare_count; })},
      {"beam_size", number<int>([](RunConfig& c) -> int& { return c.beam_size; })},
      {"max_len", number<int>([](RunConfig& c) -> int& { return c.max_len; })},
      {"top_k", number<std::size_t>([](RunConfig& c) -> std::size_t& { return c.top_k; })},
      {"learning_rate",
       number<double>([](RunConfig& c) -> double& { return c.training.learning_rate; })},
      {"minibatch_words",
       number<std::size_t>([](RunConfig& c) -> std::size_t& { return c.training.minibatch_words; })},
      {"dropout", number<double>([](RunConfig& c) -> double& { return c.training.dropout; })},
      {"adam_beta1", number<double>([](RunConfig& c) -> double& { return c.training.adam_beta1; })},
      {"adam_beta2", number<double>([](RunConfig& c) -> double& { return c.training.adam_beta2; })},
      {"adam_epsilon",
       number<double>([](RunConfig& c) -> double& { return c.training.adam_epsilon; })},
      {"decay_factor",
       number<double>([](RunConfig& c) -> double& { return c.training.decay_factor; })},
      {"clip_norm", number<double>([](RunConfig& c) -> double& { return c.training.clip_norm; })},
      {"max_epochs", number<int>([](RunConfig& c) -> int& { return c.training.max_epochs; })},
      {"embedding", number<int>([](RunConfig& c) -> int& { return c.training.embedding; })},
      {"hidden", number<int>([](RunConfig& c) -> int& { return c.training.hidden; })},
      {"dev_fraction",
       number<double>([](RunConfig& c) -> double& { return c.training.dev_fraction; })},
      {"lexicon_weight",
       number<double>([](RunConfig& c) -> double& { return c.training.lexicon_weight; })},
      {"use_lexicon", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.training.use_lexicon = parse_bool(k, v);
       }},
      {"lexicon_iterations",
       number<int>([](RunConfig& c) -> int& { return c.training.lexicon.iterations; })},
      {"lexicon_top_entries", number<std::size_t>([](RunConfig& c) -> std::size_t& {
         return c.training.lexicon.top_entries;
       })},
      {"init_scale", number<double>([](RunConfig& c) -> double& { return c.training.init_scale; })},
  };
  return table;
}

}  // namespace

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  const auto& table = setters();
  auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(config, key, value);
}

void load_config(const std::filesystem::path& path, RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const auto where = path.string() + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key=value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where + "missing key");
    try {
      set_config_value(config, key, trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  RunConfig config;
  load_config(path, config);
  return config;
}

void apply_overrides(RunConfig& config, const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + a + "' is not key=value");
    set_config_value(config, trim(a.substr(0, eq)), trim(a.substr(eq + 1)));
  }
}

void apply_environment(RunConfig& config) {
  if (const char* seed = std::getenv("PATCHLOOM_SEED"); seed && *seed) {
    set_config_value(config, "seed", seed);
  }
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : setters()) keys.push_back(k);
  return keys;
}

}  // namespace patchloom::cli
