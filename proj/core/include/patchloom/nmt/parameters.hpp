#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace patchloom::nmt {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

struct Dimensions {
  int src_vocab = 0;
  int tgt_vocab = 0;
  int embedding = 256;
  int hidden = 512;

  bool operator==(const Dimensions&) const = default;
};

/// Gate rows are stacked input, forget, output, candidate.
template <class T>
struct LstmWeights {
  Mat<T> W;  // 4H x input
  Mat<T> U;  // 4H x H
  Mat<T> b;  // 4H x 1
};

/// All trainable tensors of the encoder-decoder. Embeddings are |V| x d
/// with one row per token; biases are single-column matrices.
template <class T>
struct Parameters {
  Dimensions dims;
  Mat<T> src_embeddings;
  Mat<T> tgt_embeddings;
  LstmWeights<T> encoder;
  LstmWeights<T> decoder;  // input is [embedding; previous attentional state]
  Mat<T> att_Wh;           // H x H
  Mat<T> att_Ws;           // H x H
  Mat<T> att_b;            // H x 1
  Mat<T> att_v;            // H x 1
  Mat<T> comb_W;           // H x 2H, over [decoder state; context]
  Mat<T> comb_b;           // H x 1
  Mat<T> out_W;            // |Vt| x H
  Mat<T> out_b;            // |Vt| x 1

  int hidden() const { return dims.hidden; }
  int embedding() const { return dims.embedding; }

  /// Zero tensors of the right shapes.
  static Parameters zeros(const Dimensions& dims);

  /// Uniform(-scale, scale) initialization; forget-gate biases start at 1.
  static Parameters random(const Dimensions& dims, std::mt19937_64& rng, T scale = T(0.1));

  template <class F>
  void for_each(F&& f) {
    f("src.embeddings", src_embeddings);
    f("tgt.embeddings", tgt_embeddings);
    f("encoder.W", encoder.W);
    f("encoder.U", encoder.U);
    f("encoder.b", encoder.b);
    f("decoder.W", decoder.W);
    f("decoder.U", decoder.U);
    f("decoder.b", decoder.b);
    f("attention.W_h", att_Wh);
    f("attention.W_s", att_Ws);
    f("attention.b", att_b);
    f("attention.v", att_v);
    f("combine.W", comb_W);
    f("combine.b", comb_b);
    f("output.W", out_W);
    f("output.b", out_b);
  }

  template <class F>
  void for_each(F&& f) const {
    const_cast<Parameters*>(this)->for_each(
        [&](const char* name, Mat<T>& m) { f(name, static_cast<const Mat<T>&>(m)); });
  }

  template <class U>
  Parameters<U> cast() const {
    Parameters<U> out = Parameters<U>::zeros(dims);
    std::vector<const Mat<T>*> mine;
    for_each([&](const char*, const Mat<T>& m) { mine.push_back(&m); });
    std::size_t i = 0;
    out.for_each([&](const char*, Mat<U>& m) { m = mine[i++]->template cast<U>(); });
    return out;
  }

  std::size_t parameter_count() const;
  bool all_finite() const;
  void set_zero();
};

extern template struct Parameters<float>;
extern template struct Parameters<double>;

}  // namespace patchloom::nmt
