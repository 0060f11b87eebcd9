#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "config.hpp"

using namespace patchloom;
using namespace patchloom::cli;

namespace {

std::filesystem::path write_file(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / ("patchloom_cfg_" + name);
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST(Config, Defaults) {
  const RunConfig c;
  EXPECT_DOUBLE_EQ(c.threshold, -0.7);
  EXPECT_EQ(c.seed, 1u);
  EXPECT_EQ(c.jobs, 1u);
  EXPECT_EQ(c.category, corpus::Category::NU);
  EXPECT_FALSE(c.bugfix.has_value());
  EXPECT_EQ(c.beam_size, 10);
  EXPECT_DOUBLE_EQ(c.training.learning_rate, 0.001);
  EXPECT_DOUBLE_EQ(c.training.dropout, 0.5);
  EXPECT_EQ(c.training.minibatch_words, 2048u);
}

TEST(Config, ParsesFileWithComments) {
  const auto path = write_file("ok.cfg",
                               "# run settings\n"
                               "threshold=-0.7\n"
                               "\n"
                               "  seed = 42   # trailing comment\n"
                               "category=all\n"
                               "bugfix=true\n"
                               "learning_rate=0.003\n"
                               "use_lexicon=false\n"
                               "test_year=2014\n");
  const auto c = load_config(path);
  EXPECT_DOUBLE_EQ(c.threshold, -0.7);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.training.seed, 42u);
  EXPECT_FALSE(c.category.has_value());
  EXPECT_EQ(c.bugfix, true);
  EXPECT_DOUBLE_EQ(c.training.learning_rate, 0.003);
  EXPECT_FALSE(c.training.use_lexicon);
  EXPECT_EQ(c.test_year, 2014);
}

TEST(Config, EmptyFileKeepsDefaults) {
  const auto c = load_config(write_file("empty.cfg", ""));
  EXPECT_DOUBLE_EQ(c.threshold, RunConfig{}.threshold);
  EXPECT_EQ(c.output_dir, ".");
}

TEST(Config, UnknownKeyFailsClosedWithLocation) {
  const auto path = write_file("bad.cfg", "seed=1\nthresold=-0.5\n");
  try {
    load_config(path);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find(":2:"), std::string::npos) << msg;
    EXPECT_NE(msg.find("unknown config key 'thresold'"), std::string::npos) << msg;
  }
}

TEST(Config, MalformedLinesAndValues) {
  EXPECT_THROW(load_config(write_file("noeq.cfg", "seed 3\n")), ConfigError);
  EXPECT_THROW(load_config(write_file("nokey.cfg", "=3\n")), ConfigError);
  EXPECT_THROW(load_config(write_file("badnum.cfg", "threshold=abc\n")), ConfigError);
  EXPECT_THROW(load_config(write_file("trail.cfg", "beam_size=10x\n")), ConfigError);
  EXPECT_THROW(load_config(write_file("cat.cfg", "category=XX\n")), ConfigError);
  EXPECT_THROW(load_config(write_file("jobs.cfg", "jobs=0\n")), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/patchloom.cfg"), ConfigError);
}

TEST(Config, OverridesAndEnvironmentPrecedence) {
  auto c = load_config(write_file("prec.cfg", "seed=5\nthreshold=-1.0\n"));
  apply_overrides(c, {"threshold=-0.3", "beam_size = 4"});
  EXPECT_DOUBLE_EQ(c.threshold, -0.3);
  EXPECT_EQ(c.beam_size, 4);
  EXPECT_EQ(c.seed, 5u);
  EXPECT_THROW(apply_overrides(c, {"threshold"}), ConfigError);

  ::setenv("PATCHLOOM_SEED", "99", 1);
  apply_environment(c);
  ::unsetenv("PATCHLOOM_SEED");
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(c.training.seed, 99u);
}

TEST(Config, EveryKeyIsSettable) {
  const auto keys = config_keys();
  EXPECT_GE(keys.size(), 30u);
  for (const auto& k : keys) {
    RunConfig c;
    std::string value = "1";
    if (k == "category") value = "UQ";
    if (k == "dropout" || k == "dev_fraction" || k == "adam_beta1" || k == "adam_beta2") value = "0.5";
    EXPECT_NO_THROW(set_config_value(c, k, value)) << k;
  }
}
