#include "patchloom/corpus/corpus_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace patchloom::corpus {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw CorpusError("cannot write " + file.string());
  return out;
}

std::ifstream open_in(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw CorpusError("cannot read " + file.string());
  return in;
}

std::vector<std::string> read_lines(const fs::path& file) {
  auto in = open_in(file);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, '\t')) cells.push_back(cell);
  if (!line.empty() && line.back() == '\t') cells.emplace_back();
  return cells;
}

constexpr const char* kMetaHeader =
    "pair_id\tcommit_pre_origin\tcommit_post\tyear_pre\tyear_post\tbugfix";

void write_meta(const fs::path& file, const std::vector<StatementPair>& pairs, bool with_category) {
  auto out = open_out(file);
  out << kMetaHeader << (with_category ? "\tcategory" : "") << '\n';
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    out << i << '\t' << p.commit_pre_origin << '\t' << p.commit_post << '\t' << p.year_pre
        << '\t' << p.year_post << '\t' << (p.bugfix ? 1 : 0);
    if (with_category) out << '\t' << category_name(p.category);
    out << '\n';
  }
}

void read_meta(const fs::path& file, std::vector<StatementPair>& pairs, bool with_category) {
  auto lines = read_lines(file);
  const std::size_t columns = with_category ? 7 : 6;
  if (lines.empty()) throw CorpusError(file.string() + ": missing header");
  if (lines.size() - 1 != pairs.size()) {
    throw CorpusError(file.string() + ": row count does not match statement files");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto cells = split_tabs(lines[i]);
    if (cells.size() != columns) {
      throw CorpusError(file.string() + ":" + std::to_string(i + 1) + ": expected " +
                        std::to_string(columns) + " columns");
    }
    auto& p = pairs[i - 1];
    try {
      p.commit_pre_origin = cells[1];
      p.commit_post = cells[2];
      p.year_pre = std::stoi(cells[3]);
      p.year_post = std::stoi(cells[4]);
      p.bugfix = cells[5] == "1";
    } catch (const std::exception&) {
      throw CorpusError(file.string() + ":" + std::to_string(i + 1) + ": bad numeric field");
    }
    if (with_category) {
      auto c = parse_category(cells[6]);
      if (!c) throw CorpusError(file.string() + ": unknown category " + cells[6]);
      p.category = *c;
    }
  }
}

std::vector<std::vector<std::string>> token_lines(const std::vector<StatementPair>& pairs,
                                                  bool pre, bool concrete) {
  std::vector<std::vector<std::string>> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (concrete) {
      out.push_back(pre ? p.concrete_pre().tokens : p.concrete_post().tokens);
    } else {
      out.push_back(pre ? p.pre.tokens : p.post.tokens);
    }
  }
  return out;
}

}  // namespace

std::vector<std::vector<std::string>> read_token_lines(const fs::path& file) {
  std::vector<std::vector<std::string>> out;
  for (const auto& line : read_lines(file)) out.push_back(statement::from_joined(line).tokens);
  return out;
}

void write_token_lines(const fs::path& file, const std::vector<std::vector<std::string>>& lines) {
  auto out = open_out(file);
  for (const auto& l : lines) out << statement::join_tokens(l) << '\n';
}

void write_vocabulary(const fs::path& file, const nmt::Vocabulary& vocab) {
  auto out = open_out(file);
  for (const auto& t : vocab.tokens()) out << t << '\n';
}

nmt::Vocabulary read_vocabulary(const fs::path& file) {
  auto lines = read_lines(file);
  auto vocab = nmt::Vocabulary::with_placeholders();
  if (lines.size() < vocab.size()) throw CorpusError(file.string() + ": truncated vocabulary");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i < vocab.size() && lines[i] != vocab.token(static_cast<nmt::TokenId>(i))) {
      throw CorpusError(file.string() + ": reserved tokens out of order");
    }
    if (vocab.add(lines[i]) != static_cast<nmt::TokenId>(i)) {
      throw CorpusError(file.string() + ": duplicate token " + lines[i]);
    }
  }
  return vocab;
}

void write_corpus(const fs::path& dir, const BuiltCorpus& built) {
  fs::create_directories(dir);
  const auto& train = built.train;
  write_token_lines(dir / "train.src", train.src);
  write_token_lines(dir / "train.tgt", train.tgt);
  write_token_lines(dir / "train.abs.src", token_lines(train.pairs, true, false));
  write_token_lines(dir / "train.abs.tgt", token_lines(train.pairs, false, false));
  write_meta(dir / "train.meta.tsv", train.pairs, false);
  write_vocabulary(dir / "vocab.src", train.src_vocab);
  write_vocabulary(dir / "vocab.tgt", train.tgt_vocab);

  write_token_lines(dir / "test.src", token_lines(built.test, true, false));
  write_token_lines(dir / "test.tgt", token_lines(built.test, false, false));
  write_token_lines(dir / "test.query", token_lines(built.test, true, true));
  write_token_lines(dir / "test.ref", token_lines(built.test, false, true));
  write_meta(dir / "test.meta.tsv", built.test, true);

  const auto& l = built.ledger;
  auto out = open_out(dir / "filter_ledger.tsv");
  out << "step\tcount\tpercent\n";
  auto row = [&](const char* name, std::size_t n) {
    char pct[32];
    std::snprintf(pct, sizeof pct, "%.1f", l.percent(n));
    out << name << '\t' << n << '\t' << pct << '\n';
  };
  row("before_filtering", l.before);
  row("too_short", l.too_short);
  row("unparsable", l.unparsable);
  row("lost_candidates", l.lost_candidates);
  row("identical", l.identical);
  row("final", l.final_pairs);
}

Corpus read_training_corpus(const fs::path& dir) {
  Corpus corpus;
  corpus.src = read_token_lines(dir / "train.src");
  corpus.tgt = read_token_lines(dir / "train.tgt");
  auto abs_src = read_token_lines(dir / "train.abs.src");
  auto abs_tgt = read_token_lines(dir / "train.abs.tgt");
  const auto n = corpus.src.size();
  if (corpus.tgt.size() != n || abs_src.size() != n || abs_tgt.size() != n) {
    throw CorpusError(dir.string() + ": training files are not aligned");
  }
  corpus.pairs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    corpus.pairs[i].pre.tokens = std::move(abs_src[i]);
    corpus.pairs[i].post.tokens = std::move(abs_tgt[i]);
    corpus.pairs[i].pre.raw = corpus.pairs[i].pre.joined();
    corpus.pairs[i].post.raw = corpus.pairs[i].post.joined();
  }
  read_meta(dir / "train.meta.tsv", corpus.pairs, false);
  corpus.src_vocab = read_vocabulary(dir / "vocab.src");
  corpus.tgt_vocab = read_vocabulary(dir / "vocab.tgt");
  if (n > 0) {
    corpus.first_year = corpus.pairs.front().year_post;
    corpus.last_year = corpus.first_year;
    for (const auto& p : corpus.pairs) {
      corpus.first_year = std::min({corpus.first_year, p.year_pre, p.year_post});
      corpus.last_year = std::max(corpus.last_year, p.year_post);
    }
  }
  return corpus;
}

std::vector<StatementPair> read_test_pairs(const fs::path& dir) {
  auto queries = read_lines(dir / "test.query");
  auto refs = read_lines(dir / "test.ref");
  if (queries.size() != refs.size()) throw CorpusError(dir.string() + ": test files are not aligned");
  std::vector<StatementPair> pairs(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    auto pre = statement::abstract_arguments(statement::from_joined(queries[i]));
    auto post = statement::abstract_arguments(statement::from_joined(refs[i]));
    pairs[i].pre = std::move(pre.abstracted);
    pairs[i].pre_args = std::move(pre.args);
    pairs[i].post = std::move(post.abstracted);
    pairs[i].post_args = std::move(post.args);
  }
  read_meta(dir / "test.meta.tsv", pairs, true);
  return pairs;
}

FilterLedger read_filter_ledger(const fs::path& dir) {
  FilterLedger l;
  auto lines = read_lines(dir / "filter_ledger.tsv");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto cells = split_tabs(lines[i]);
    if (cells.size() < 2) continue;
    const auto n = static_cast<std::size_t>(std::stoull(cells[1]));
    if (cells[0] == "before_filtering") l.before = n;
    else if (cells[0] == "too_short") l.too_short = n;
    else if (cells[0] == "unparsable") l.unparsable = n;
    else if (cells[0] == "lost_candidates") l.lost_candidates = n;
    else if (cells[0] == "identical") l.identical = n;
    else if (cells[0] == "final") l.final_pairs = n;
  }
  return l;
}

}  // namespace patchloom::corpus
