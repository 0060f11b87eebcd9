#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "patchloom/repo/repository.hpp"

namespace patchloom::synth {

/// Deterministic rewrite rules of the synthetic benchmark, modeled on
/// typical one-line fixes.
enum class Rule {
  this_removal,     // return this . f ;            -> return f ;
  index_increment,  // f [ 3 ] = ... ;             -> f [ 4 ] = ... ;
  diamond,          // ... new ArrayList < T > ( ) -> ... new ArrayList < > ( )
  wildcard,         // List f = ... ;              -> List < ? > f = ... ;
  log_level,        // log . trace ( ... ) ;       -> log . debug ( ... ) ;
  distractor,       // arbitrary edit outside the rule shapes
};

inline constexpr int kRuleCount = 5;

const char* rule_name(Rule r);

/// Concrete statements, tokens separated by single spaces.
struct SyntheticPair {
  std::string pre;
  std::string post;
  Rule rule = Rule::distractor;
};

class StatementGenerator {
 public:
  explicit StatementGenerator(std::uint64_t seed) : rng_(seed) {}

  SyntheticPair rule_pair(Rule rule);
  SyntheticPair distractor();
  /// A rule pair with probability 1 - distractor_rate, else a distractor.
  SyntheticPair sample(double distractor_rate);
  /// A statement that no rule or distractor rewrites.
  std::string neutral_statement();

 private:
  std::mt19937_64 rng_;

  std::size_t below(std::size_t n);
  template <class C>
  const auto& pick(const C& c) {
    return c[below(c.size())];
  }
  std::string field();
  std::string method();
  std::string argument();
};

std::vector<SyntheticPair> generate_pairs(std::size_t count, std::uint64_t seed,
                                          double distractor_rate = 0.1);

struct SyntheticRepoOptions {
  std::uint64_t seed = 1;
  int commits = 300;
  int first_year = 2010;
  int last_year = 2014;
  int files = 6;
  double distractor_rate = 0.1;
};

/// A linear history of Java files whose commits add methods and apply
/// one-line rule fixes to earlier statements.
repo::MemoryRepository generate_repository(const SyntheticRepoOptions& options);

/// Parses `synthetic:<seed>[:<commits>]`; returns false if `uri` is not of
/// that form.
bool parse_synthetic_uri(const std::string& uri, SyntheticRepoOptions& options);

}  // namespace patchloom::synth
