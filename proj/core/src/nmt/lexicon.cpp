#include "patchloom/nmt/lexicon.hpp"

#include <algorithm>
#include <stdexcept>

namespace patchloom::nmt {

bool Lexicon::empty() const {
  return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.empty(); });
}

float Lexicon::lookup(TokenId src, TokenId tgt) const {
  if (!has_row(src)) return 0.0f;
  const auto& row = rows[src];
  auto it = std::lower_bound(row.begin(), row.end(), tgt,
                             [](const auto& e, TokenId t) { return e.first < t; });
  return it != row.end() && it->first == tgt ? it->second : 0.0f;
}

std::vector<std::map<TokenId, double>> model1_table(const std::vector<std::vector<TokenId>>& src,
                                                    const std::vector<std::vector<TokenId>>& tgt,
                                                    std::size_t src_vocab, std::size_t tgt_vocab,
                                                    int iterations) {
  if (src.size() != tgt.size()) throw std::invalid_argument("lexicon corpus is not aligned");
  const auto null_id = static_cast<TokenId>(src_vocab);
  std::vector<std::map<TokenId, double>> t(src_vocab + 1);
  const double uniform = tgt_vocab == 0 ? 0.0 : 1.0 / static_cast<double>(tgt_vocab);

  auto with_null = [&](const std::vector<TokenId>& s) {
    std::vector<TokenId> out{null_id};
    out.insert(out.end(), s.begin(), s.end());
    return out;
  };
  for (std::size_t k = 0; k < src.size(); ++k) {
    for (TokenId f : with_null(src[k])) {
      for (TokenId e : tgt[k]) t[f].emplace(e, uniform);
    }
  }

  for (int it = 0; it < iterations; ++it) {
    std::vector<std::map<TokenId, double>> counts(src_vocab + 1);
    for (std::size_t k = 0; k < src.size(); ++k) {
      const auto s = with_null(src[k]);
      for (TokenId e : tgt[k]) {
        double z = 0.0;
        for (TokenId f : s) z += t[f][e];
        if (z <= 0.0) continue;
        for (TokenId f : s) counts[f][e] += t[f][e] / z;
      }
    }
    for (std::size_t f = 0; f < counts.size(); ++f) {
      double total = 0.0;
      for (const auto& [e, c] : counts[f]) total += c;
      for (auto& [e, p] : t[f]) {
        auto c = counts[f].find(e);
        p = (c == counts[f].end() || total <= 0.0) ? 0.0 : c->second / total;
      }
    }
  }
  return t;
}

Lexicon build_lexicon(const std::vector<std::vector<TokenId>>& src,
                      const std::vector<std::vector<TokenId>>& tgt, std::size_t src_vocab,
                      std::size_t tgt_vocab, const LexiconOptions& options) {
  auto table = model1_table(src, tgt, src_vocab, tgt_vocab, options.iterations);
  Lexicon lex;
  lex.rows.resize(src_vocab);
  for (std::size_t f = 0; f < src_vocab; ++f) {
    std::vector<std::pair<TokenId, double>> entries;
    for (const auto& [e, p] : table[f]) {
      if (p > 0.0) entries.emplace_back(e, p);
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (entries.size() > options.top_entries) entries.resize(options.top_entries);
    double total = 0.0;
    for (const auto& [e, p] : entries) total += p;
    if (total <= 0.0) continue;
    std::sort(entries.begin(), entries.end());
    for (const auto& [e, p] : entries) {
      lex.rows[f].emplace_back(e, static_cast<float>(p / total));
    }
  }
  return lex;
}

}  // namespace patchloom::nmt
