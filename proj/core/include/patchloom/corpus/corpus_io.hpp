#pragma once

#include <filesystem>
#include <vector>

#include "patchloom/corpus/corpus.hpp"

namespace patchloom::corpus {

/// Writes a corpus directory:
///   train.src / train.tgt        rare-replaced streams, one statement per line
///   train.abs.src / train.abs.tgt abstracted streams before replacement
///   train.meta.tsv               pair_id commit_pre_origin commit_post year_pre year_post bugfix
///   vocab.src / vocab.tgt        one token per line, id order
///   test.src / test.tgt          abstracted test statements
///   test.query / test.ref        concrete test statements
///   test.meta.tsv                train columns plus category
///   filter_ledger.tsv            step, count, percent
void write_corpus(const std::filesystem::path& dir, const BuiltCorpus& built);

/// Reads the training side. Argument tables are not stored for training
/// pairs and come back empty.
Corpus read_training_corpus(const std::filesystem::path& dir);

/// Reads the test side; argument tables are recovered by re-abstracting the
/// concrete query/reference lines.
std::vector<StatementPair> read_test_pairs(const std::filesystem::path& dir);

FilterLedger read_filter_ledger(const std::filesystem::path& dir);

void write_vocabulary(const std::filesystem::path& file, const nmt::Vocabulary& vocab);
nmt::Vocabulary read_vocabulary(const std::filesystem::path& file);

std::vector<std::vector<std::string>> read_token_lines(const std::filesystem::path& file);
void write_token_lines(const std::filesystem::path& file,
                       const std::vector<std::vector<std::string>>& lines);

}  // namespace patchloom::corpus
