#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "patchloom/nmt/vocabulary.hpp"
#include "patchloom/repo/miner.hpp"
#include "patchloom/statement/arguments.hpp"
#include "patchloom/statement/tokenizer.hpp"

namespace patchloom::corpus {

using statement::ArgumentTable;
using statement::TokenizedStatement;

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Category { unassigned, NU, UQ, UR };

const char* category_name(Category c);
std::optional<Category> parse_category(const std::string& name);

/// One pre/post statement pair after argument abstraction.
struct StatementPair {
  TokenizedStatement pre;
  TokenizedStatement post;
  ArgumentTable pre_args;
  ArgumentTable post_args;
  std::string commit_pre_origin;
  std::string commit_post;
  std::string file_path;
  int year_pre = 0;
  int year_post = 0;
  bool bugfix = false;
  Category category = Category::unassigned;

  /// Concrete statements recovered by reinserting each side's own table.
  TokenizedStatement concrete_pre() const;
  TokenizedStatement concrete_post() const;
};

/// Per-step counts of the training-data filter, shaped like the filtering
/// table of the experiment: every input pair lands in exactly one row.
struct FilterLedger {
  std::size_t before = 0;
  std::size_t too_short = 0;        // step (3)
  std::size_t unparsable = 0;       // steps (2), (5)
  std::size_t lost_candidates = 0;  // step (6)
  std::size_t identical = 0;        // step (7)
  std::size_t final_pairs = 0;

  double percent(std::size_t count) const {
    return before == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(before);
  }
};

/// Steps (1)-(5): keeps method-scoped hunks with exactly one deleted and one
/// added line whose sides tokenize to at least three tokens and still parse
/// after argument abstraction.
std::vector<StatementPair> build_pairs(const std::vector<repo::ChangeHunk>& hunks,
                                       FilterLedger* ledger = nullptr);

/// Step (6): one pair per distinct abstracted pre statement. The kept post
/// is from the most recent year_post; ties go to the post most frequent in
/// the whole group, then to the smallest space-joined post by code point.
std::vector<StatementPair> select_post_correction(const std::vector<StatementPair>& pairs,
                                                  FilterLedger* ledger = nullptr);

/// Step (7): drops pairs whose abstracted sides are equal.
std::vector<StatementPair> drop_identical(const std::vector<StatementPair>& pairs,
                                          FilterLedger* ledger = nullptr);

/// Marks pairs whose (commit_pre_origin, commit_post) is a fix link.
void mark_bugfix(std::vector<StatementPair>& pairs, const std::vector<repo::FixLink>& links);

/// Training corpus after rare-token replacement. `pairs` keep the
/// abstracted statements before replacement; `src`/`tgt` are the aligned
/// replaced streams the model trains on.
struct Corpus {
  std::vector<StatementPair> pairs;
  std::vector<std::vector<std::string>> src;
  std::vector<std::vector<std::string>> tgt;
  nmt::Vocabulary src_vocab = nmt::Vocabulary::with_placeholders();
  nmt::Vocabulary tgt_vocab = nmt::Vocabulary::with_placeholders();
  int first_year = 0;
  int last_year = 0;
};

/// Replaces tokens seen at most `max_rare_count` times on their own side
/// with `<unk>`; the vocabularies keep reserved tokens plus the rest, in
/// order of decreasing count then code point.
Corpus replace_rare(std::vector<StatementPair> pairs, std::size_t max_rare_count = 1);

struct ChronologicalSplit {
  std::vector<StatementPair> train;
  std::vector<StatementPair> test;
};

/// Train: year_post < test_year. Test: year_pre == year_post == test_year.
/// Throws CorpusError if either side is empty.
ChronologicalSplit split_chronological(const std::vector<StatementPair>& pairs, int test_year);

Category categorize(const StatementPair& pair, const nmt::Vocabulary& src_vocab,
                    const nmt::Vocabulary& tgt_vocab);

struct CorpusOptions {
  int test_year = 0;
  std::size_t max_rare_count = 1;
};

struct BuiltCorpus {
  Corpus train;
  std::vector<StatementPair> test;
  FilterLedger ledger;
};

/// The whole corpus pipeline: pairs, fix links, split, steps (6)/(7) and
/// rare-token replacement on the training side, step (7) and category
/// labels on the test side.
BuiltCorpus build_corpus(const std::vector<repo::ChangeHunk>& hunks,
                         const std::vector<repo::FixLink>& links, const CorpusOptions& options);

}  // namespace patchloom::corpus
