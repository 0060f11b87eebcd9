#include "patchloom/corpus/corpus.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "patchloom/statement/validator.hpp"

namespace patchloom::corpus {

using statement::abstract_arguments;
using statement::reinsert_arguments;
using statement::tokenize;
using statement::validate_statement;

const char* category_name(Category c) {
  switch (c) {
    case Category::NU: return "NU";
    case Category::UQ: return "UQ";
    case Category::UR: return "UR";
    case Category::unassigned: break;
  }
  return "unassigned";
}

std::optional<Category> parse_category(const std::string& name) {
  if (name == "NU") return Category::NU;
  if (name == "UQ") return Category::UQ;
  if (name == "UR") return Category::UR;
  if (name == "unassigned") return Category::unassigned;
  return std::nullopt;
}

TokenizedStatement StatementPair::concrete_pre() const {
  return reinsert_arguments(pre, pre_args).statement;
}

TokenizedStatement StatementPair::concrete_post() const {
  return reinsert_arguments(post, post_args).statement;
}

std::vector<StatementPair> build_pairs(const std::vector<repo::ChangeHunk>& hunks,
                                       FilterLedger* ledger) {
  FilterLedger local;
  FilterLedger& led = ledger ? *ledger : local;
  std::vector<StatementPair> out;
  for (const auto& h : hunks) {
    if (!h.method_scoped || h.deleted_lines.size() != 1 || h.added_lines.size() != 1) continue;
    ++led.before;
    auto pre_tok = tokenize(h.deleted_lines.front());
    auto post_tok = tokenize(h.added_lines.front());
    using statement::TokenizeError;
    const bool pre_literal_error = pre_tok.error == TokenizeError::unterminated_literal;
    const bool post_literal_error = post_tok.error == TokenizeError::unterminated_literal;
    const std::size_t pre_len = pre_tok ? pre_tok.statement->size() : 0;
    const std::size_t post_len = post_tok ? post_tok.statement->size() : 0;
    if ((!pre_literal_error && pre_len < 3) || (!post_literal_error && post_len < 3)) {
      ++led.too_short;
      continue;
    }
    if (pre_literal_error || post_literal_error) {
      ++led.unparsable;
      continue;
    }
    auto pre_abs = abstract_arguments(*pre_tok.statement);
    auto post_abs = abstract_arguments(*post_tok.statement);
    if (!pre_abs.balanced || !post_abs.balanced || !validate_statement(pre_abs.abstracted) ||
        !validate_statement(post_abs.abstracted)) {
      ++led.unparsable;
      continue;
    }
    StatementPair p;
    p.pre = std::move(pre_abs.abstracted);
    p.post = std::move(post_abs.abstracted);
    p.pre_args = std::move(pre_abs.args);
    p.post_args = std::move(post_abs.args);
    p.commit_pre_origin = h.commit_pre_origin;
    p.commit_post = h.commit_post;
    p.file_path = h.file_path;
    p.year_pre = h.year_pre;
    p.year_post = h.year_post;
    out.push_back(std::move(p));
  }
  led.final_pairs = out.size();
  return out;
}

namespace {

// Total order used to pick one representative among pairs with the same
// selected post, so the choice does not depend on input order.
auto provenance_key(const StatementPair& p) {
  std::string pre_args, post_args;
  for (const auto& e : p.pre_args.entries) pre_args += e.original_text() + '\x1f';
  for (const auto& e : p.post_args.entries) post_args += e.original_text() + '\x1f';
  return std::make_tuple(p.commit_post, p.commit_pre_origin, p.file_path, p.year_pre,
                         std::move(pre_args), std::move(post_args));
}

}  // namespace

std::vector<StatementPair> select_post_correction(const std::vector<StatementPair>& pairs,
                                                  FilterLedger* ledger) {
  std::map<std::string, std::vector<const StatementPair*>> groups;
  for (const auto& p : pairs) groups[p.pre.joined()].push_back(&p);

  std::vector<StatementPair> out;
  std::size_t lost = 0;
  for (const auto& [pre, members] : groups) {
    int latest = members.front()->year_post;
    std::map<std::string, std::size_t> freq;
    for (const auto* m : members) {
      latest = std::max(latest, m->year_post);
      ++freq[m->post.joined()];
    }
    const StatementPair* best = nullptr;
    std::string best_post;
    for (const auto* m : members) {
      if (m->year_post != latest) continue;
      auto post = m->post.joined();
      if (!best) {
        best = m;
        best_post = std::move(post);
        continue;
      }
      const auto fm = freq[post], fb = freq[best_post];
      if (fm > fb || (fm == fb && post < best_post) ||
          (fm == fb && post == best_post && provenance_key(*m) < provenance_key(*best))) {
        best = m;
        best_post = std::move(post);
      }
    }
    lost += members.size() - 1;
    out.push_back(*best);
  }
  // Deterministic output order: (year_post, commit_post, file, pre).
  std::sort(out.begin(), out.end(), [](const StatementPair& a, const StatementPair& b) {
    return std::tie(a.year_post, a.commit_post, a.file_path, a.pre.tokens) <
           std::tie(b.year_post, b.commit_post, b.file_path, b.pre.tokens);
  });
  if (ledger) {
    ledger->lost_candidates += lost;
    ledger->final_pairs = out.size();
  }
  return out;
}

std::vector<StatementPair> drop_identical(const std::vector<StatementPair>& pairs,
                                          FilterLedger* ledger) {
  std::vector<StatementPair> out;
  std::size_t dropped = 0;
  for (const auto& p : pairs) {
    if (p.pre.tokens == p.post.tokens) {
      ++dropped;
      continue;
    }
    out.push_back(p);
  }
  if (ledger) {
    ledger->identical += dropped;
    ledger->final_pairs = out.size();
  }
  return out;
}

void mark_bugfix(std::vector<StatementPair>& pairs, const std::vector<repo::FixLink>& links) {
  std::set<std::pair<std::string, std::string>> index;
  for (const auto& l : links) index.emplace(l.inducing_commit, l.fixing_commit);
  for (auto& p : pairs) {
    p.bugfix = !p.commit_pre_origin.empty() &&
               index.count({p.commit_pre_origin, p.commit_post}) > 0;
  }
}

namespace {

nmt::Vocabulary build_vocab(const std::map<std::string, std::size_t>& counts,
                            std::size_t max_rare_count) {
  auto vocab = nmt::Vocabulary::with_placeholders();
  std::vector<std::pair<std::size_t, std::string>> kept;
  for (const auto& [tok, n] : counts) {
    if (n > max_rare_count && !vocab.is_reserved(tok)) kept.emplace_back(n, tok);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  for (const auto& [n, tok] : kept) vocab.add(tok);
  return vocab;
}

}  // namespace

Corpus replace_rare(std::vector<StatementPair> pairs, std::size_t max_rare_count) {
  Corpus corpus;
  std::map<std::string, std::size_t> src_counts, tgt_counts;
  for (const auto& p : pairs) {
    for (const auto& t : p.pre.tokens) ++src_counts[t];
    for (const auto& t : p.post.tokens) ++tgt_counts[t];
  }
  corpus.src_vocab = build_vocab(src_counts, max_rare_count);
  corpus.tgt_vocab = build_vocab(tgt_counts, max_rare_count);
  auto replace = [](const std::vector<std::string>& tokens, const nmt::Vocabulary& vocab) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(vocab.contains(t) ? t : std::string(nmt::kUnk));
    return out;
  };
  for (const auto& p : pairs) {
    corpus.src.push_back(replace(p.pre.tokens, corpus.src_vocab));
    corpus.tgt.push_back(replace(p.post.tokens, corpus.tgt_vocab));
  }
  if (!pairs.empty()) {
    corpus.first_year = pairs.front().year_post;
    corpus.last_year = pairs.front().year_post;
    for (const auto& p : pairs) {
      corpus.first_year = std::min({corpus.first_year, p.year_pre, p.year_post});
      corpus.last_year = std::max(corpus.last_year, p.year_post);
    }
  }
  corpus.pairs = std::move(pairs);
  return corpus;
}

ChronologicalSplit split_chronological(const std::vector<StatementPair>& pairs, int test_year) {
  ChronologicalSplit split;
  for (const auto& p : pairs) {
    if (p.year_post < test_year) {
      split.train.push_back(p);
    } else if (p.year_pre == test_year && p.year_post == test_year) {
      split.test.push_back(p);
    }
  }
  if (split.train.empty()) {
    throw CorpusError("no training pairs before test year " + std::to_string(test_year));
  }
  if (split.test.empty()) {
    throw CorpusError("no test pairs created and changed in " + std::to_string(test_year));
  }
  return split;
}

Category categorize(const StatementPair& pair, const nmt::Vocabulary& src_vocab,
                    const nmt::Vocabulary& tgt_vocab) {
  for (const auto& t : pair.pre.tokens) {
    if (!src_vocab.contains(t) || t == nmt::kUnk) return Category::UQ;
  }
  for (const auto& t : pair.post.tokens) {
    if (!tgt_vocab.contains(t) || t == nmt::kUnk) return Category::UR;
  }
  return Category::NU;
}

BuiltCorpus build_corpus(const std::vector<repo::ChangeHunk>& hunks,
                         const std::vector<repo::FixLink>& links, const CorpusOptions& options) {
  BuiltCorpus built;
  auto pairs = build_pairs(hunks);
  mark_bugfix(pairs, links);
  auto split = split_chronological(pairs, options.test_year);

  // The ledger covers the training period only.
  std::vector<repo::ChangeHunk> train_hunks;
  for (const auto& h : hunks) {
    if (h.year_post < options.test_year) train_hunks.push_back(h);
  }
  build_pairs(train_hunks, &built.ledger);

  auto selected = select_post_correction(split.train, &built.ledger);
  auto distinct = drop_identical(selected, &built.ledger);
  if (distinct.empty()) throw CorpusError("training corpus is empty after filtering");
  built.train = replace_rare(std::move(distinct), options.max_rare_count);

  built.test = drop_identical(split.test);
  if (built.test.empty()) throw CorpusError("test set is empty after filtering");
  for (auto& p : built.test) {
    p.category = categorize(p, built.train.src_vocab, built.train.tgt_vocab);
  }
  return built;
}

}  // namespace patchloom::corpus
