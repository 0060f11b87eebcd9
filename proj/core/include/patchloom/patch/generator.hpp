#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "patchloom/corpus/corpus.hpp"
#include "patchloom/nmt/beam_search.hpp"
#include "patchloom/nmt/model.hpp"
#include "patchloom/statement/arguments.hpp"
#include "patchloom/statement/tokenizer.hpp"

namespace patchloom::patch {

using statement::TokenizedStatement;

enum class PatchSource { model, baseline };

enum class NaReason {
  none,
  low_score,      // model score below the threshold
  invalid,        // output does not parse after argument reinsertion
  identical,      // output equals the abstracted query
  untokenizable,  // query fails tokenization or abstraction
  no_match,       // baseline: query is not a training pre statement
};

const char* source_name(PatchSource s);
const char* na_reason_name(NaReason r);

struct GeneratedPatch {
  TokenizedStatement tokens;      // concrete, arguments reinserted
  TokenizedStatement abstracted;  // as produced, before reinsertion
  double score = 0.0;             // log P for model output, 0 for the baseline
  bool valid = false;
  bool finished = false;
  bool arguments_reinserted = false;
  std::size_t empty_index_slots = 0;
  PatchSource source = PatchSource::model;
  NaReason na_reason = NaReason::none;

  bool is_na() const { return na_reason != NaReason::none; }
};

/// Query after tokenization and argument abstraction.
struct PreparedQuery {
  std::string raw;
  std::optional<statement::Abstraction> abstraction;  // empty if untokenizable
};

PreparedQuery prepare_query(const std::string& raw);

/// Beam output for one query before thresholding, cached for sweeps.
struct Candidates {
  PreparedQuery query;
  std::vector<GeneratedPatch> ranked;  // best first, na_reason unset
};

struct GenerateOptions {
  double threshold = -0.7;
  nmt::BeamOptions beam;
  std::size_t top_k = 1;
};

Candidates model_candidates(const PreparedQuery& query, const nmt::Model& model,
                            const GenerateOptions& options = {});

/// Applies the NA rules in order: score below threshold, invalid, identical
/// to the abstracted query. Untokenizable queries are NA regardless.
GeneratedPatch decide(const Candidates& candidates, std::size_t rank, double threshold);

GeneratedPatch generate(const std::string& query, const nmt::Model& model,
                        const GenerateOptions& options = {});

/// Runs model_candidates over all queries with up to `jobs` threads; the
/// result order matches the input.
std::vector<Candidates> model_candidates_all(const std::vector<std::string>& queries,
                                             const nmt::Model& model,
                                             const GenerateOptions& options, unsigned jobs);

/// Exact-match lookup from abstracted pre statement to its selected post.
class BaselineIndex {
 public:
  BaselineIndex() = default;
  explicit BaselineIndex(const std::vector<corpus::StatementPair>& training_pairs);

  const std::vector<std::string>* lookup(const std::vector<std::string>& abstracted_pre) const;
  std::size_t size() const { return posts_.size(); }

 private:
  std::map<std::vector<std::string>, std::vector<std::string>> posts_;
};

GeneratedPatch baseline_suggest(const std::string& query, const BaselineIndex& index);
GeneratedPatch baseline_suggest(const PreparedQuery& query, const BaselineIndex& index);

}  // namespace patchloom::patch
