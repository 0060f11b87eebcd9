#include "patchloom/patch/generator.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "patchloom/statement/validator.hpp"

namespace patchloom::patch {

using statement::abstract_arguments;
using statement::reinsert_arguments;
using statement::tokenize;
using statement::validate_statement;

const char* source_name(PatchSource s) {
  return s == PatchSource::model ? "model" : "baseline";
}

const char* na_reason_name(NaReason r) {
  switch (r) {
    case NaReason::none: return "none";
    case NaReason::low_score: return "low_score";
    case NaReason::invalid: return "invalid";
    case NaReason::identical: return "identical";
    case NaReason::untokenizable: return "untokenizable";
    case NaReason::no_match: return "no_match";
  }
  return "none";
}

PreparedQuery prepare_query(const std::string& raw) {
  PreparedQuery q;
  q.raw = raw;
  auto tok = tokenize(raw);
  if (!tok) return q;
  auto abs = abstract_arguments(*tok.statement);
  if (abs.balanced) q.abstraction = std::move(abs);
  return q;
}

namespace {

GeneratedPatch complete(std::vector<std::string> output, const statement::Abstraction& query,
                        PatchSource source) {
  GeneratedPatch p;
  p.source = source;
  p.abstracted.tokens = std::move(output);
  p.abstracted.raw = p.abstracted.joined();
  auto re = reinsert_arguments(p.abstracted, query.args);
  p.tokens = std::move(re.statement);
  p.arguments_reinserted = re.filled == re.placeholders && re.empty_index_slots == 0;
  p.empty_index_slots = re.empty_index_slots;
  p.valid = validate_statement(p.tokens);
  return p;
}

}  // namespace

Candidates model_candidates(const PreparedQuery& query, const nmt::Model& model,
                            const GenerateOptions& options) {
  Candidates c;
  c.query = query;
  if (!query.abstraction) return c;
  const auto& tokens = query.abstraction->abstracted.tokens;
  auto hyps = nmt::beam_search(model, model.src_vocab.encode(tokens), options.beam);
  const auto k = std::min(std::max<std::size_t>(options.top_k, 1), hyps.size());
  for (std::size_t i = 0; i < k; ++i) {
    auto p = complete(model.tgt_vocab.decode(nmt::output_tokens(hyps[i])), *query.abstraction,
                      PatchSource::model);
    p.score = hyps[i].log_prob;
    p.finished = hyps[i].finished;
    p.valid = p.valid && p.finished;
    c.ranked.push_back(std::move(p));
  }
  return c;
}

GeneratedPatch decide(const Candidates& candidates, std::size_t rank, double threshold) {
  if (!candidates.query.abstraction || rank >= candidates.ranked.size()) {
    GeneratedPatch na;
    na.na_reason = NaReason::untokenizable;
    return na;
  }
  GeneratedPatch p = candidates.ranked[rank];
  if (p.score < threshold) {
    p.na_reason = NaReason::low_score;
  } else if (!p.valid) {
    p.na_reason = NaReason::invalid;
  } else if (p.abstracted.tokens == candidates.query.abstraction->abstracted.tokens) {
    p.na_reason = NaReason::identical;
  }
  return p;
}

GeneratedPatch generate(const std::string& query, const nmt::Model& model,
                        const GenerateOptions& options) {
  return decide(model_candidates(prepare_query(query), model, options), 0, options.threshold);
}

std::vector<Candidates> model_candidates_all(const std::vector<std::string>& queries,
                                             const nmt::Model& model,
                                             const GenerateOptions& options, unsigned jobs) {
  std::vector<Candidates> out(queries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < queries.size(); i = next++) {
      out[i] = model_candidates(prepare_query(queries[i]), model, options);
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(queries.size())));
  std::vector<std::thread> threads;
  for (unsigned t = 1; t < n; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  return out;
}

BaselineIndex::BaselineIndex(const std::vector<corpus::StatementPair>& training_pairs) {
  for (const auto& p : corpus::select_post_correction(training_pairs)) {
    posts_.emplace(p.pre.tokens, p.post.tokens);
  }
}

const std::vector<std::string>* BaselineIndex::lookup(
    const std::vector<std::string>& abstracted_pre) const {
  auto it = posts_.find(abstracted_pre);
  return it == posts_.end() ? nullptr : &it->second;
}

GeneratedPatch baseline_suggest(const PreparedQuery& query, const BaselineIndex& index) {
  if (!query.abstraction) {
    GeneratedPatch na;
    na.source = PatchSource::baseline;
    na.na_reason = NaReason::untokenizable;
    return na;
  }
  const auto* post = index.lookup(query.abstraction->abstracted.tokens);
  if (!post) {
    GeneratedPatch na;
    na.source = PatchSource::baseline;
    na.na_reason = NaReason::no_match;
    return na;
  }
  auto p = complete(*post, *query.abstraction, PatchSource::baseline);
  p.finished = true;
  if (!p.valid) p.na_reason = NaReason::invalid;
  return p;
}

GeneratedPatch baseline_suggest(const std::string& query, const BaselineIndex& index) {
  return baseline_suggest(prepare_query(query), index);
}

}  // namespace patchloom::patch
