#include "patchloom/nmt/parameters.hpp"

namespace patchloom::nmt {

template <class T>
Parameters<T> Parameters<T>::zeros(const Dimensions& dims) {
  const int H = dims.hidden, d = dims.embedding;
  Parameters p;
  p.dims = dims;
  p.src_embeddings = Mat<T>::Zero(dims.src_vocab, d);
  p.tgt_embeddings = Mat<T>::Zero(dims.tgt_vocab, d);
  p.encoder = {Mat<T>::Zero(4 * H, d), Mat<T>::Zero(4 * H, H), Mat<T>::Zero(4 * H, 1)};
  p.decoder = {Mat<T>::Zero(4 * H, d + H), Mat<T>::Zero(4 * H, H), Mat<T>::Zero(4 * H, 1)};
  p.att_Wh = Mat<T>::Zero(H, H);
  p.att_Ws = Mat<T>::Zero(H, H);
  p.att_b = Mat<T>::Zero(H, 1);
  p.att_v = Mat<T>::Zero(H, 1);
  p.comb_W = Mat<T>::Zero(H, 2 * H);
  p.comb_b = Mat<T>::Zero(H, 1);
  p.out_W = Mat<T>::Zero(dims.tgt_vocab, H);
  p.out_b = Mat<T>::Zero(dims.tgt_vocab, 1);
  return p;
}

template <class T>
Parameters<T> Parameters<T>::random(const Dimensions& dims, std::mt19937_64& rng, T scale) {
  auto p = zeros(dims);
  std::uniform_real_distribution<double> dist(-static_cast<double>(scale),
                                              static_cast<double>(scale));
  p.for_each([&](const char*, Mat<T>& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<T>(dist(rng));
    }
  });
  const int H = dims.hidden;
  p.encoder.b.middleRows(H, H).setOnes();
  p.decoder.b.middleRows(H, H).setOnes();
  return p;
}

template <class T>
std::size_t Parameters<T>::parameter_count() const {
  std::size_t n = 0;
  for_each([&](const char*, const Mat<T>& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

template <class T>
bool Parameters<T>::all_finite() const {
  bool ok = true;
  for_each([&](const char*, const Mat<T>& m) { ok = ok && m.allFinite(); });
  return ok;
}

template <class T>
void Parameters<T>::set_zero() {
  for_each([](const char*, Mat<T>& m) { m.setZero(); });
}

template struct Parameters<float>;
template struct Parameters<double>;

}  // namespace patchloom::nmt
