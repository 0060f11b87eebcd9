#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "patchloom/nmt/model.hpp"

namespace patchloom::nmt {

namespace {

constexpr char kMagic[4] = {'P', 'L', 'M', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr const char* kLexiconWeight = "config.lexicon_weight";

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u32(std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out_.write(reinterpret_cast<const char*>(b), 4);
  }
  void f32(float f) { u32(std::bit_cast<std::uint32_t>(f)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void vocab(const Vocabulary& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (const auto& t : v.tokens()) str(t);
  }
  void tensor(const std::string& name, const Mat<float>& m) {
    str(name);
    u32(2);
    u32(static_cast<std::uint32_t>(m.rows()));
    u32(static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) f32(m(i, j));
    }
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw ModelError("model file is truncated");
  }
  std::uint32_t u32() {
    unsigned char b[4];
    bytes(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
           static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str() {
    const auto n = u32();
    if (n > (1u << 24)) throw ModelError("model file has an implausible string length");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  Vocabulary vocab() {
    const auto n = u32();
    Vocabulary v = Vocabulary::with_placeholders();
    if (n < v.size()) throw ModelError("model vocabulary lacks reserved tokens");
    for (std::uint32_t i = 0; i < n; ++i) {
      auto t = str();
      if (i < v.size()) {
        if (t != v.token(static_cast<TokenId>(i))) {
          throw ModelError("model vocabulary has unexpected reserved token '" + t + "'");
        }
        continue;
      }
      if (v.add(t) != static_cast<TokenId>(i)) throw ModelError("duplicate vocabulary token");
    }
    return v;
  }
  Mat<float> tensor(std::string& name) {
    name = str();
    const auto rank = u32();
    if (rank != 2) throw ModelError("tensor " + name + " has unsupported rank");
    const auto rows = u32(), cols = u32();
    if (static_cast<std::uint64_t>(rows) * cols > (1ull << 32)) {
      throw ModelError("tensor " + name + " is implausibly large");
    }
    Mat<float> m(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i) {
      for (std::uint32_t j = 0; j < cols; ++j) m(i, j) = f32();
    }
    return m;
  }

 private:
  std::istream& in_;
};

}  // namespace

void save_model(std::ostream& out, const Model& model) {
  Writer w(out);
  out.write(kMagic, 4);
  w.u32(kVersion);
  w.vocab(model.src_vocab);
  w.vocab(model.tgt_vocab);
  std::uint32_t count = 1;
  model.params.for_each([&](const char*, const Mat<float>&) { ++count; });
  w.u32(count);
  Mat<float> lambda(1, 1);
  lambda(0, 0) = static_cast<float>(model.lexicon_weight);
  w.tensor(kLexiconWeight, lambda);
  model.params.for_each([&](const char* name, const Mat<float>& m) { w.tensor(name, m); });
  w.u32(static_cast<std::uint32_t>(model.lexicon.rows.size()));
  for (const auto& row : model.lexicon.rows) {
    w.u32(static_cast<std::uint32_t>(row.size()));
    for (const auto& [e, p] : row) {
      w.u32(static_cast<std::uint32_t>(e));
      w.f32(p);
    }
  }
  if (!out) throw ModelError("failed writing model");
}

Model load_model(std::istream& in) {
  Reader r(in);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw ModelError("not a model file (bad magic)");
  const auto version = r.u32();
  if (version != kVersion) {
    throw ModelError("unsupported model version " + std::to_string(version));
  }
  Model model;
  model.src_vocab = r.vocab();
  model.tgt_vocab = r.vocab();

  std::map<std::string, Mat<float>> tensors;
  const auto count = r.u32();
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string name;
    auto m = r.tensor(name);
    if (!tensors.emplace(name, std::move(m)).second) {
      throw ModelError("duplicate tensor " + name);
    }
  }
  auto lambda = tensors.find(kLexiconWeight);
  if (lambda == tensors.end() || lambda->second.size() != 1) {
    throw ModelError("model lacks " + std::string(kLexiconWeight));
  }
  model.lexicon_weight = static_cast<double>(lambda->second(0, 0));

  auto emb = tensors.find("src.embeddings");
  auto hid = tensors.find("encoder.U");
  if (emb == tensors.end() || hid == tensors.end()) throw ModelError("model lacks core tensors");
  Dimensions dims{static_cast<int>(model.src_vocab.size()),
                  static_cast<int>(model.tgt_vocab.size()),
                  static_cast<int>(emb->second.cols()), static_cast<int>(hid->second.cols())};
  model.params = Parameters<float>::zeros(dims);
  model.params.for_each([&](const char* name, Mat<float>& m) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw ModelError(std::string("model lacks tensor ") + name);
    if (it->second.rows() != m.rows() || it->second.cols() != m.cols()) {
      throw ModelError(std::string("tensor ") + name + " has inconsistent shape");
    }
    m = std::move(it->second);
  });
  if (!model.params.all_finite()) throw ModelError("model has non-finite parameters");

  const auto rows = r.u32();
  if (rows > model.src_vocab.size()) throw ModelError("lexicon has more rows than source tokens");
  model.lexicon.rows.resize(rows);
  for (auto& row : model.lexicon.rows) {
    const auto n = r.u32();
    if (n > model.tgt_vocab.size()) throw ModelError("lexicon row is too long");
    for (std::uint32_t k = 0; k < n; ++k) {
      const auto e = r.u32();
      const float p = r.f32();
      if (e >= model.tgt_vocab.size()) throw ModelError("lexicon target id out of range");
      row.emplace_back(static_cast<TokenId>(e), p);
    }
  }
  return model;
}

void save_model(const std::filesystem::path& file, const Model& model) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ModelError("cannot write " + file.string());
  save_model(out, model);
}

Model load_model(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ModelError("cannot read " + file.string());
  return load_model(in);
}

}  // namespace patchloom::nmt
