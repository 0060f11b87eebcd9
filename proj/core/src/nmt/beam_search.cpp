#include "patchloom/nmt/beam_search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace patchloom::nmt {

namespace {

struct Candidate {
  double log_prob;
  Eigen::Index parent;
  TokenId token;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  return std::tie(a.parent, a.token) < std::tie(b.parent, b.token);
}

template <class T>
Mat<T> select_columns(const Mat<T>& m, const std::vector<Eigen::Index>& cols) {
  Mat<T> out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = m.col(cols[k]);
  return out;
}

template <class T>
void sort_hypotheses(std::vector<Hypothesis<T>>& hyps) {
  std::stable_sort(hyps.begin(), hyps.end(), [](const auto& a, const auto& b) {
    if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
    return a.tokens < b.tokens;
  });
}

}  // namespace

template <class T>
std::vector<Hypothesis<T>> beam_search(const Parameters<T>& params, const LexiconBias& lexicon,
                                       const std::vector<TokenId>& src,
                                       const BeamOptions& options) {
  if (options.beam_size < 1) throw std::invalid_argument("beam_size must be at least 1");
  if (options.max_len < 1) throw std::invalid_argument("max_len must be at least 1");
  const auto enc = encode_source<T>(params, src);
  auto state = initial_decoder<T>(params, enc);
  std::vector<Hypothesis<T>> live(1);
  std::vector<Hypothesis<T>> finished;
  const auto beam = static_cast<std::size_t>(options.beam_size);

  for (int step = 0; step < options.max_len && !live.empty(); ++step) {
    std::vector<TokenId> inputs;
    for (const auto& h : live) inputs.push_back(h.tokens.empty() ? kBosId : h.tokens.back());
    const Mat<T> dist = decoder_step<T>(params, enc, lexicon, state, inputs);

    std::vector<Candidate> candidates;
    for (Eigen::Index k = 0; k < dist.cols(); ++k) {
      std::vector<Candidate> column;
      for (Eigen::Index v = 0; v < dist.rows(); ++v) {
        const double lp = live[k].log_prob + std::log(static_cast<double>(dist(v, k)));
        if (std::isfinite(lp)) column.push_back({lp, k, static_cast<TokenId>(v)});
      }
      const auto keep = std::min(beam, column.size());
      std::partial_sort(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(keep),
                        column.end(), better);
      candidates.insert(candidates.end(), column.begin(),
                        column.begin() + static_cast<std::ptrdiff_t>(keep));
    }
    const auto keep = std::min(beam, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), better);
    candidates.resize(keep);

    std::vector<Hypothesis<T>> next;
    std::vector<Eigen::Index> parents;
    for (const auto& c : candidates) {
      Hypothesis<T> h;
      h.tokens = live[c.parent].tokens;
      h.tokens.push_back(c.token);
      h.log_prob = c.log_prob;
      h.hidden = state.h.col(c.parent);
      h.cell = state.c.col(c.parent);
      if (c.token == kEosId) {
        h.finished = true;
        finished.push_back(std::move(h));
      } else {
        next.push_back(std::move(h));
        parents.push_back(c.parent);
      }
    }
    live = std::move(next);
    if (live.empty()) break;
    state.h = select_columns<T>(state.h, parents);
    state.c = select_columns<T>(state.c, parents);
    state.feed = select_columns<T>(state.feed, parents);
    if (!finished.empty()) {
      double best_finished = finished.front().log_prob;
      for (const auto& h : finished) best_finished = std::max(best_finished, h.log_prob);
      double best_live = live.front().log_prob;
      for (const auto& h : live) best_live = std::max(best_live, h.log_prob);
      if (best_finished >= best_live) break;
    }
  }

  if (finished.empty()) {
    sort_hypotheses(live);
    return live;
  }
  sort_hypotheses(finished);
  return finished;
}

template std::vector<Hypothesis<float>> beam_search<float>(const Parameters<float>&,
                                                           const LexiconBias&,
                                                           const std::vector<TokenId>&,
                                                           const BeamOptions&);
template std::vector<Hypothesis<double>> beam_search<double>(const Parameters<double>&,
                                                             const LexiconBias&,
                                                             const std::vector<TokenId>&,
                                                             const BeamOptions&);

}  // namespace patchloom::nmt
