#include "patchloom/nmt/network.hpp"

#include <cassert>
#include <cmath>
#include <limits>

namespace patchloom::nmt {

namespace {

template <class T>
Mat<T> sigmoid(const Mat<T>& z) {
  return (T(1) + (-z.array()).exp()).inverse().matrix();
}

/// Column-wise numerically stable softmax; -inf scores get probability zero.
template <class T>
Mat<T> column_softmax(const Mat<T>& scores) {
  Mat<T> out(scores.rows(), scores.cols());
  for (Eigen::Index b = 0; b < scores.cols(); ++b) {
    const T m = scores.col(b).maxCoeff();
    out.col(b) = (scores.col(b).array() - m).exp().matrix();
    out.col(b) /= out.col(b).sum();
  }
  return out;
}

template <class T>
struct GateCache {
  Mat<T> x, h_prev, c_prev;
  Mat<T> i, f, o, g, tanh_c;
};

/// Batched LSTM cell. Returns (h, c); fills `cache` when non-null.
template <class T>
std::pair<Mat<T>, Mat<T>> lstm_forward(const LstmWeights<T>& w, const Mat<T>& x,
                                       const Mat<T>& h_prev, const Mat<T>& c_prev,
                                       GateCache<T>* cache) {
  const Eigen::Index H = h_prev.rows();
  assert(w.W.cols() == x.rows() && w.U.cols() == H && w.W.rows() == 4 * H);
  Mat<T> z = w.W * x + w.U * h_prev;
  z.colwise() += w.b.col(0);
  Mat<T> i = sigmoid<T>(z.topRows(H));
  Mat<T> f = sigmoid<T>(z.middleRows(H, H));
  Mat<T> o = sigmoid<T>(z.middleRows(2 * H, H));
  Mat<T> g = z.bottomRows(H).array().tanh().matrix();
  Mat<T> c = (f.array() * c_prev.array() + i.array() * g.array()).matrix();
  Mat<T> tc = c.array().tanh().matrix();
  Mat<T> h = (o.array() * tc.array()).matrix();
  if (cache) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->c_prev = c_prev;
    cache->i = std::move(i);
    cache->f = std::move(f);
    cache->o = std::move(o);
    cache->g = std::move(g);
    cache->tanh_c = std::move(tc);
  }
  return {std::move(h), std::move(c)};
}

/// Backprop through one LSTM cell. Adds weight gradients into `gw`, returns
/// dx and writes dh_prev / dc_prev.
template <class T>
Mat<T> lstm_backward(const LstmWeights<T>& w, const GateCache<T>& k, const Mat<T>& dh,
                     const Mat<T>& dc, LstmWeights<T>& gw, Mat<T>& dh_prev, Mat<T>& dc_prev) {
  const Eigen::Index H = dh.rows();
  const auto one = T(1);
  Mat<T> d_o = (dh.array() * k.tanh_c.array()).matrix();
  Mat<T> dcn =
      (dc.array() + dh.array() * k.o.array() * (one - k.tanh_c.array().square())).matrix();
  Mat<T> dz(4 * H, dh.cols());
  dz.topRows(H) = (dcn.array() * k.g.array() * k.i.array() * (one - k.i.array())).matrix();
  dz.middleRows(H, H) =
      (dcn.array() * k.c_prev.array() * k.f.array() * (one - k.f.array())).matrix();
  dz.middleRows(2 * H, H) = (d_o.array() * k.o.array() * (one - k.o.array())).matrix();
  dz.bottomRows(H) = (dcn.array() * k.i.array() * (one - k.g.array().square())).matrix();
  dc_prev = (dcn.array() * k.f.array()).matrix();
  gw.W.noalias() += dz * k.x.transpose();
  gw.U.noalias() += dz * k.h_prev.transpose();
  gw.b.col(0) += dz.rowwise().sum();
  dh_prev.noalias() = w.U.transpose() * dz;
  return w.W.transpose() * dz;
}

template <class T>
Mat<T> gather_rows(const Mat<T>& table, const std::vector<TokenId>& ids) {
  Mat<T> out(table.cols(), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t b = 0; b < ids.size(); ++b) {
    out.col(static_cast<Eigen::Index>(b)) = table.row(ids[b]).transpose();
  }
  return out;
}

template <class T>
void scatter_rows(Mat<T>& table, const std::vector<TokenId>& ids, const Mat<T>& grad) {
  for (std::size_t b = 0; b < ids.size(); ++b) {
    table.row(ids[b]) += grad.col(static_cast<Eigen::Index>(b)).transpose();
  }
}

template <class T>
Mat<T> dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::mt19937_64* rng) {
  if (rate <= 0.0) return Mat<T>::Ones(rows, cols);
  std::bernoulli_distribution keep(1.0 - rate);
  const T scale = static_cast<T>(1.0 / (1.0 - rate));
  Mat<T> m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = keep(*rng) ? scale : T(0);
  }
  return m;
}

/// Per-column lexicon terms for the gold token: sum_i alpha_i L[src_i][y]
/// and the attention mass on source tokens without a lexicon row.
struct LexiconTerms {
  double lex_y = 0.0;
  double uncovered = 0.0;
};

}  // namespace

// ---------------------------------------------------------------------------
// Single-sequence operations

template <class T>
LstmState<T> lstm_step(const LstmWeights<T>& w, const Vec<T>& input, const LstmState<T>& prev) {
  auto [h, c] = lstm_forward<T>(w, input, prev.h, prev.c, nullptr);
  return {h.col(0), c.col(0)};
}

template <class T>
std::vector<LstmState<T>> encode(const Parameters<T>& p, const std::vector<TokenId>& src) {
  if (src.empty()) throw std::invalid_argument("encode: empty source sequence");
  const int H = p.hidden();
  LstmState<T> state{Vec<T>::Zero(H), Vec<T>::Zero(H)};
  std::vector<LstmState<T>> out;
  out.reserve(src.size());
  for (TokenId id : src) {
    state = lstm_step<T>(p.encoder, p.src_embeddings.row(id).transpose(), state);
    out.push_back(state);
  }
  return out;
}

template <class T>
AttentionResult<T> attend(const Parameters<T>& p, const Mat<T>& encoder_states,
                          const Vec<T>& decoder_hidden) {
  Vec<T> q = p.att_Ws * decoder_hidden + p.att_b.col(0);
  Mat<T> pre = p.att_Wh * encoder_states;
  pre.colwise() += q;
  Mat<T> scores = (p.att_v.transpose() * pre.array().tanh().matrix()).transpose();
  AttentionResult<T> r;
  r.weights = column_softmax<T>(scores).col(0);
  r.context = encoder_states * r.weights;
  return r;
}

template <class T>
Vec<T> attentional_state(const Parameters<T>& p, const Vec<T>& decoder_hidden,
                         const Vec<T>& context) {
  const int H = p.hidden();
  Vec<T> z = p.comb_W.leftCols(H) * decoder_hidden + p.comb_W.rightCols(H) * context +
             p.comb_b.col(0);
  return z.array().tanh().matrix();
}

namespace {

template <class T>
void mix_lexicon(Mat<T>& dist, const LexiconBias& lexicon, const std::vector<TokenId>& src,
                 const Mat<T>& weights) {
  if (!lexicon.active()) return;
  const T lambda = static_cast<T>(lexicon.weight);
  for (Eigen::Index b = 0; b < dist.cols(); ++b) {
    T uncovered = 0;
    Vec<T> lex = Vec<T>::Zero(dist.rows());
    for (std::size_t i = 0; i < src.size(); ++i) {
      const T a = weights(static_cast<Eigen::Index>(i), b);
      if (!lexicon.lexicon->has_row(src[i])) {
        uncovered += a;
        continue;
      }
      for (const auto& [e, prob] : lexicon.lexicon->rows[src[i]]) lex(e) += a * T(prob);
    }
    dist.col(b) = (T(1) - lambda + lambda * uncovered) * dist.col(b) + lambda * lex;
  }
}

}  // namespace

template <class T>
Vec<T> predict_distribution(const Parameters<T>& p, const Vec<T>& decoder_hidden,
                            const Vec<T>& context, const LexiconBias& lexicon,
                            const std::vector<TokenId>& src, const Vec<T>& attention_weights) {
  Vec<T> ht = attentional_state<T>(p, decoder_hidden, context);
  Mat<T> g = p.out_W * ht + p.out_b;
  Mat<T> dist = column_softmax<T>(g);
  mix_lexicon<T>(dist, lexicon, src, attention_weights);
  return dist.col(0);
}

template <class T>
EncodedSource<T> encode_source(const Parameters<T>& p, const std::vector<TokenId>& src) {
  auto states = encode<T>(p, src);
  EncodedSource<T> enc;
  enc.ids = src;
  enc.states.resize(p.hidden(), static_cast<Eigen::Index>(src.size()));
  for (std::size_t i = 0; i < states.size(); ++i) {
    enc.states.col(static_cast<Eigen::Index>(i)) = states[i].h;
  }
  enc.projected = p.att_Wh * enc.states;
  enc.projected.colwise() += p.att_b.col(0);
  enc.final = states.back();
  return enc;
}

template <class T>
DecoderBatch<T> initial_decoder(const Parameters<T>& p, const EncodedSource<T>& enc, int copies) {
  DecoderBatch<T> s;
  s.h = enc.final.h.replicate(1, copies);
  s.c = enc.final.c.replicate(1, copies);
  s.feed = Mat<T>::Zero(p.hidden(), copies);
  return s;
}

template <class T>
Mat<T> decoder_step(const Parameters<T>& p, const EncodedSource<T>& enc,
                    const LexiconBias& lexicon, DecoderBatch<T>& state,
                    const std::vector<TokenId>& tokens, Mat<T>* attention) {
  const int H = p.hidden(), d = p.embedding();
  const auto K = static_cast<Eigen::Index>(tokens.size());
  const auto n = enc.states.cols();
  Mat<T> x(d + H, K);
  x.topRows(d) = gather_rows<T>(p.tgt_embeddings, tokens);
  x.bottomRows(H) = state.feed;
  auto [h, c] = lstm_forward<T>(p.decoder, x, state.h, state.c, nullptr);

  Mat<T> q = p.att_Ws * h;
  Mat<T> scores(n, K);
  for (Eigen::Index i = 0; i < n; ++i) {
    Mat<T> a = q;
    a.colwise() += enc.projected.col(i);
    scores.row(i) = p.att_v.transpose() * a.array().tanh().matrix();
  }
  Mat<T> alpha = column_softmax<T>(scores);
  Mat<T> ctx = enc.states * alpha;

  Mat<T> z = p.comb_W.leftCols(H) * h + p.comb_W.rightCols(H) * ctx;
  z.colwise() += p.comb_b.col(0);
  Mat<T> ht = z.array().tanh().matrix();
  Mat<T> g = p.out_W * ht;
  g.colwise() += p.out_b.col(0);
  Mat<T> dist = column_softmax<T>(g);
  mix_lexicon<T>(dist, lexicon, enc.ids, alpha);

  state.h = std::move(h);
  state.c = std::move(c);
  state.feed = std::move(ht);
  if (attention) *attention = std::move(alpha);
  return dist;
}

template <class T>
double sequence_log_prob(const Parameters<T>& p, const LexiconBias& lexicon,
                         const std::vector<TokenId>& src, const std::vector<TokenId>& tgt) {
  auto enc = encode_source<T>(p, src);
  auto state = initial_decoder<T>(p, enc);
  double total = 0.0;
  TokenId prev = kBosId;
  for (std::size_t j = 0; j <= tgt.size(); ++j) {
    const TokenId y = j < tgt.size() ? tgt[j] : kEosId;
    Mat<T> dist = decoder_step<T>(p, enc, lexicon, state, {prev});
    total += std::log(static_cast<double>(dist(y, 0)));
    prev = y;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Batched training graph

namespace {

template <class T>
class TrainingGraph {
 public:
  TrainingGraph(const Parameters<T>& p, const LexiconBias& lexicon,
                const std::vector<SequencePair>& batch)
      : p_(p), lex_(lexicon), batch_(batch) {}

  BatchLoss run(double dropout, std::mt19937_64* rng, Parameters<T>* grad) {
    if (dropout > 0.0 && rng == nullptr) {
      throw std::invalid_argument("batch_loss: dropout requires a random generator");
    }
    dropout_ = dropout;
    rng_ = rng;
    grad_ = grad;
    layout();
    forward_encoder();
    forward_decoder();
    if (grad_) {
      backward_decoder();
      backward_encoder();
    }
    return loss_;
  }

 private:
  const Parameters<T>& p_;
  const LexiconBias& lex_;
  const std::vector<SequencePair>& batch_;
  double dropout_ = 0.0;
  std::mt19937_64* rng_ = nullptr;
  Parameters<T>* grad_ = nullptr;

  Eigen::Index B_ = 0, Ls_ = 0, Lt_ = 0;
  std::vector<std::vector<TokenId>> src_ids_;  // [t][b]
  std::vector<Mat<T>> src_mask_;               // [t] 1 x B
  std::vector<std::vector<TokenId>> in_ids_;   // [j][b] decoder input
  std::vector<std::vector<TokenId>> out_ids_;  // [j][b] gold output
  std::vector<Mat<T>> out_mask_;               // [j] 1 x B

  std::vector<GateCache<T>> enc_cache_;
  std::vector<Mat<T>> enc_drop_;
  Mat<T> enc_states_;  // H x (Ls*B), column t*B+b
  Mat<T> projected_;   // W_h states + b
  Mat<T> enc_h_, enc_c_;

  std::vector<GateCache<T>> dec_cache_;
  std::vector<Mat<T>> dec_drop_;   // embedding dropout
  std::vector<Mat<T>> dec_h_;      // decoder hidden s_j
  std::vector<Mat<T>> alpha_;      // Ls x B
  std::vector<Mat<T>> ctx_;        // H x B
  std::vector<Mat<T>> htilde_;     // H x B, before dropout
  std::vector<Mat<T>> ht_drop_;    // dropout mask on htilde
  std::vector<Mat<T>> d_feed_out_; // gradient reaching dropped htilde from the output layer
  std::vector<Mat<T>> d_alpha_lex_;

  BatchLoss loss_;

  Eigen::Index col(Eigen::Index t, Eigen::Index b) const { return t * B_ + b; }

  void layout() {
    B_ = static_cast<Eigen::Index>(batch_.size());
    Ls_ = 0;
    Lt_ = 0;
    loss_ = {};
    for (const auto& s : batch_) {
      if (s.src.empty()) throw std::invalid_argument("batch_loss: empty source sequence");
      Ls_ = std::max<Eigen::Index>(Ls_, static_cast<Eigen::Index>(s.src.size()));
      Lt_ = std::max<Eigen::Index>(Lt_, static_cast<Eigen::Index>(s.tgt.size()) + 1);
      loss_.tokens += s.tgt.size() + 1;
    }
    src_ids_.assign(Ls_, std::vector<TokenId>(B_, kEosId));
    src_mask_.assign(Ls_, Mat<T>::Zero(1, B_));
    in_ids_.assign(Lt_, std::vector<TokenId>(B_, kEosId));
    out_ids_.assign(Lt_, std::vector<TokenId>(B_, kEosId));
    out_mask_.assign(Lt_, Mat<T>::Zero(1, B_));
    for (Eigen::Index b = 0; b < B_; ++b) {
      const auto& s = batch_[b];
      for (std::size_t t = 0; t < s.src.size(); ++t) {
        src_ids_[t][b] = s.src[t];
        src_mask_[t](0, b) = 1;
      }
      for (std::size_t j = 0; j <= s.tgt.size(); ++j) {
        in_ids_[j][b] = j == 0 ? kBosId : s.tgt[j - 1];
        out_ids_[j][b] = j < s.tgt.size() ? s.tgt[j] : kEosId;
        out_mask_[j](0, b) = 1;
      }
    }
  }

  void forward_encoder() {
    const int H = p_.hidden();
    Mat<T> h = Mat<T>::Zero(H, B_), c = Mat<T>::Zero(H, B_);
    enc_cache_.assign(Ls_, {});
    enc_drop_.assign(Ls_, {});
    enc_states_.resize(H, Ls_ * B_);
    for (Eigen::Index t = 0; t < Ls_; ++t) {
      Mat<T> x = gather_rows<T>(p_.src_embeddings, src_ids_[t]);
      enc_drop_[t] = dropout_mask<T>(x.rows(), x.cols(), dropout_, rng_);
      x = (x.array() * enc_drop_[t].array()).matrix();
      auto [hn, cn] = lstm_forward<T>(p_.encoder, x, h, c, &enc_cache_[t]);
      const auto m = src_mask_[t].row(0).array();
      h = (hn.array().rowwise() * m + h.array().rowwise() * (T(1) - m)).matrix();
      c = (cn.array().rowwise() * m + c.array().rowwise() * (T(1) - m)).matrix();
      enc_states_.middleCols(t * B_, B_) = h;
    }
    enc_h_ = h;
    enc_c_ = c;
    projected_ = p_.att_Wh * enc_states_;
    projected_.colwise() += p_.att_b.col(0);
  }

  Mat<T> attention_pre(Eigen::Index i, const Mat<T>& q) const {
    Mat<T> a = q + projected_.middleCols(i * B_, B_);
    return a.array().tanh().matrix();
  }

  LexiconTerms lexicon_terms(Eigen::Index b, TokenId y, const Mat<T>& alpha) const {
    LexiconTerms terms;
    for (Eigen::Index i = 0; i < Ls_; ++i) {
      if (src_mask_[i](0, b) == T(0)) continue;
      const TokenId s = src_ids_[i][b];
      const double a = static_cast<double>(alpha(i, b));
      if (lex_.lexicon->has_row(s)) {
        terms.lex_y += a * lex_.lexicon->lookup(s, y);
      } else {
        terms.uncovered += a;
      }
    }
    return terms;
  }

  void forward_decoder() {
    const int H = p_.hidden(), d = p_.embedding();
    const bool use_lex = lex_.active();
    const double lambda = lex_.weight;
    const double G = 1.0 / static_cast<double>(loss_.tokens);
    Mat<T> h = enc_h_, c = enc_c_, feed = Mat<T>::Zero(H, B_);
    dec_cache_.assign(Lt_, {});
    dec_drop_.assign(Lt_, {});
    dec_h_.assign(Lt_, {});
    alpha_.assign(Lt_, {});
    ctx_.assign(Lt_, {});
    htilde_.assign(Lt_, {});
    ht_drop_.assign(Lt_, {});
    d_feed_out_.assign(Lt_, {});
    d_alpha_lex_.assign(Lt_, {});

    for (Eigen::Index j = 0; j < Lt_; ++j) {
      Mat<T> x(d + H, B_);
      Mat<T> e = gather_rows<T>(p_.tgt_embeddings, in_ids_[j]);
      dec_drop_[j] = dropout_mask<T>(e.rows(), e.cols(), dropout_, rng_);
      x.topRows(d) = (e.array() * dec_drop_[j].array()).matrix();
      x.bottomRows(H) = feed;
      auto [hn, cn] = lstm_forward<T>(p_.decoder, x, h, c, &dec_cache_[j]);
      h = std::move(hn);
      c = std::move(cn);

      Mat<T> q = p_.att_Ws * h;
      Mat<T> scores(Ls_, B_);
      for (Eigen::Index i = 0; i < Ls_; ++i) {
        scores.row(i) = p_.att_v.transpose() * attention_pre(i, q);
      }
      for (Eigen::Index i = 0; i < Ls_; ++i) {
        for (Eigen::Index b = 0; b < B_; ++b) {
          if (src_mask_[i](0, b) == T(0)) scores(i, b) = -std::numeric_limits<T>::infinity();
        }
      }
      Mat<T> alpha = column_softmax<T>(scores);
      Mat<T> ctx = Mat<T>::Zero(H, B_);
      for (Eigen::Index i = 0; i < Ls_; ++i) {
        ctx.array() += enc_states_.middleCols(i * B_, B_).array().rowwise() * alpha.row(i).array();
      }
      Mat<T> z = p_.comb_W.leftCols(H) * h + p_.comb_W.rightCols(H) * ctx;
      z.colwise() += p_.comb_b.col(0);
      Mat<T> ht = z.array().tanh().matrix();
      ht_drop_[j] = dropout_mask<T>(H, B_, dropout_, rng_);
      Mat<T> hd = (ht.array() * ht_drop_[j].array()).matrix();

      Mat<T> g = p_.out_W * hd;
      g.colwise() += p_.out_b.col(0);
      Mat<T> prob = column_softmax<T>(g);

      Mat<T> dg, dalpha;
      if (grad_) {
        dg = Mat<T>::Zero(g.rows(), B_);
        dalpha = Mat<T>::Zero(Ls_, B_);
      }
      for (Eigen::Index b = 0; b < B_; ++b) {
        if (out_mask_[j](0, b) == T(0)) continue;
        const TokenId y = out_ids_[j][b];
        const double py = static_cast<double>(prob(y, b));
        double w = 1.0, pf = py;
        LexiconTerms terms;
        if (use_lex) {
          terms = lexicon_terms(b, y, alpha);
          w = 1.0 - lambda + lambda * terms.uncovered;
          pf = w * py + lambda * terms.lex_y;
        }
        loss_.total_nll -= std::log(pf);
        if (!grad_) continue;
        const double scale = -G * w * py / pf;
        dg.col(b) = static_cast<T>(-scale) * prob.col(b);
        dg(y, b) += static_cast<T>(scale);
        if (use_lex) {
          for (Eigen::Index i = 0; i < Ls_; ++i) {
            if (src_mask_[i](0, b) == T(0)) continue;
            const TokenId s = src_ids_[i][b];
            const double lv = lex_.lexicon->has_row(s) ? lex_.lexicon->lookup(s, y) : py;
            dalpha(i, b) = static_cast<T>(-G * lambda * lv / pf);
          }
        }
      }
      if (grad_) {
        grad_->out_W.noalias() += dg * hd.transpose();
        grad_->out_b.col(0) += dg.rowwise().sum();
        d_feed_out_[j] = p_.out_W.transpose() * dg;
        d_alpha_lex_[j] = std::move(dalpha);
      }
      dec_h_[j] = h;
      alpha_[j] = std::move(alpha);
      ctx_[j] = std::move(ctx);
      htilde_[j] = std::move(ht);
      feed = std::move(hd);
    }
  }

  Mat<T> d_enc_states_;
  Mat<T> d_enc_h_, d_enc_c_;

  void backward_decoder() {
    const int H = p_.hidden(), d = p_.embedding();
    auto& gr = *grad_;
    d_enc_states_ = Mat<T>::Zero(H, Ls_ * B_);
    Mat<T> d_projected = Mat<T>::Zero(H, Ls_ * B_);
    Mat<T> dh_next = Mat<T>::Zero(H, B_), dc_next = Mat<T>::Zero(H, B_);
    Mat<T> dfeed = Mat<T>::Zero(H, B_);
    for (Eigen::Index j = Lt_ - 1; j >= 0; --j) {
      Mat<T> dhd = d_feed_out_[j] + dfeed;
      const auto& ht = htilde_[j];
      Mat<T> dz = (dhd.array() * ht_drop_[j].array() * (T(1) - ht.array().square())).matrix();
      gr.comb_W.leftCols(H).noalias() += dz * dec_h_[j].transpose();
      gr.comb_W.rightCols(H).noalias() += dz * ctx_[j].transpose();
      gr.comb_b.col(0) += dz.rowwise().sum();
      Mat<T> ds = p_.comb_W.leftCols(H).transpose() * dz;
      Mat<T> dctx = p_.comb_W.rightCols(H).transpose() * dz;

      const auto& alpha = alpha_[j];
      Mat<T> dalpha = d_alpha_lex_[j];
      for (Eigen::Index i = 0; i < Ls_; ++i) {
        auto states_i = enc_states_.middleCols(i * B_, B_);
        dalpha.row(i) += (states_i.array() * dctx.array()).colwise().sum().matrix();
        d_enc_states_.middleCols(i * B_, B_).array() +=
            dctx.array().rowwise() * alpha.row(i).array();
      }
      Mat<T> weighted = (alpha.array() * dalpha.array()).colwise().sum().matrix();
      Mat<T> de = (alpha.array() * (dalpha.array().rowwise() - weighted.row(0).array())).matrix();

      Mat<T> q = p_.att_Ws * dec_h_[j];
      Mat<T> dq = Mat<T>::Zero(H, B_);
      for (Eigen::Index i = 0; i < Ls_; ++i) {
        Mat<T> a = attention_pre(i, q);
        gr.att_v.col(0) += a * de.row(i).transpose();
        Mat<T> dpre = ((p_.att_v.col(0) * de.row(i)).array() * (T(1) - a.array().square())).matrix();
        d_projected.middleCols(i * B_, B_) += dpre;
        dq += dpre;
      }
      gr.att_Ws.noalias() += dq * dec_h_[j].transpose();
      ds.noalias() += p_.att_Ws.transpose() * dq;
      ds += dh_next;

      Mat<T> dh_prev, dc_prev;
      Mat<T> dx = lstm_backward<T>(p_.decoder, dec_cache_[j], ds, dc_next, gr.decoder, dh_prev,
                                   dc_prev);
      Mat<T> demb = (dx.topRows(d).array() * dec_drop_[j].array()).matrix();
      scatter_rows<T>(gr.tgt_embeddings, in_ids_[j], demb);
      dfeed = dx.bottomRows(H);
      dh_next = std::move(dh_prev);
      dc_next = std::move(dc_prev);
    }
    gr.att_Wh.noalias() += d_projected * enc_states_.transpose();
    gr.att_b.col(0) += d_projected.rowwise().sum();
    d_enc_states_.noalias() += p_.att_Wh.transpose() * d_projected;
    d_enc_h_ = std::move(dh_next);
    d_enc_c_ = std::move(dc_next);
  }

  void backward_encoder() {
    auto& gr = *grad_;
    Mat<T> dh = d_enc_h_, dc = d_enc_c_;
    for (Eigen::Index t = Ls_ - 1; t >= 0; --t) {
      dh += d_enc_states_.middleCols(t * B_, B_);
      const auto m = src_mask_[t].row(0).array();
      Mat<T> dhn = (dh.array().rowwise() * m).matrix();
      Mat<T> dcn = (dc.array().rowwise() * m).matrix();
      Mat<T> dh_prev, dc_prev;
      Mat<T> dx = lstm_backward<T>(p_.encoder, enc_cache_[t], dhn, dcn, gr.encoder, dh_prev,
                                   dc_prev);
      Mat<T> demb = (dx.array() * enc_drop_[t].array()).matrix();
      scatter_rows<T>(gr.src_embeddings, src_ids_[t], demb);
      dh = (dh_prev.array() + dh.array().rowwise() * (T(1) - m)).matrix();
      dc = (dc_prev.array() + dc.array().rowwise() * (T(1) - m)).matrix();
    }
  }
};

}  // namespace

template <class T>
BatchLoss batch_loss(const Parameters<T>& p, const LexiconBias& lexicon,
                     const std::vector<SequencePair>& batch, double dropout,
                     std::mt19937_64* rng, Parameters<T>* grad) {
  if (batch.empty()) return {};
  TrainingGraph<T> graph(p, lexicon, batch);
  return graph.run(dropout, rng, grad);
}

double relative_error(const Mat<double>& analytic, const Mat<double>& numeric) {
  const double denom = std::max(analytic.norm() + numeric.norm(), 1e-12);
  return (analytic - numeric).norm() / denom;
}

GradientCheckResult gradient_check(const Parameters<double>& p, const LexiconBias& lexicon,
                                   const std::vector<SequencePair>& batch, double dropout,
                                   double step) {
  if (dropout != 0.0) {
    throw GradientCheckError(
        "gradient check needs a deterministic loss: run it with dropout = 0");
  }
  auto grad = Parameters<double>::zeros(p.dims);
  batch_loss<double>(p, lexicon, batch, 0.0, nullptr, &grad);

  Parameters<double> work = p;
  std::vector<std::pair<std::string, Mat<double>*>> tensors;
  work.for_each([&](const char* name, Mat<double>& m) { tensors.emplace_back(name, &m); });
  std::vector<const Mat<double>*> analytic;
  grad.for_each([&](const char*, const Mat<double>& m) { analytic.push_back(&m); });

  GradientCheckResult result;
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    Mat<double>& m = *tensors[k].second;
    Mat<double> numeric(m.rows(), m.cols());
    for (Eigen::Index idx = 0; idx < m.size(); ++idx) {
      const double saved = m.data()[idx];
      m.data()[idx] = saved + step;
      const double up = batch_loss<double>(work, lexicon, batch, 0.0, nullptr, nullptr).mean();
      m.data()[idx] = saved - step;
      const double down = batch_loss<double>(work, lexicon, batch, 0.0, nullptr, nullptr).mean();
      m.data()[idx] = saved;
      numeric.data()[idx] = (up - down) / (2.0 * step);
    }
    TensorCheck check{tensors[k].first, relative_error(*analytic[k], numeric),
                      analytic[k]->norm()};
    result.max_relative_error = std::max(result.max_relative_error, check.relative_error);
    result.tensors.push_back(std::move(check));
  }
  return result;
}

#define PATCHLOOM_INSTANTIATE(T)                                                              \
  template LstmState<T> lstm_step<T>(const LstmWeights<T>&, const Vec<T>&,                    \
                                     const LstmState<T>&);                                    \
  template std::vector<LstmState<T>> encode<T>(const Parameters<T>&,                          \
                                               const std::vector<TokenId>&);                  \
  template AttentionResult<T> attend<T>(const Parameters<T>&, const Mat<T>&, const Vec<T>&);  \
  template Vec<T> attentional_state<T>(const Parameters<T>&, const Vec<T>&, const Vec<T>&);   \
  template Vec<T> predict_distribution<T>(const Parameters<T>&, const Vec<T>&, const Vec<T>&, \
                                          const LexiconBias&, const std::vector<TokenId>&,    \
                                          const Vec<T>&);                                     \
  template EncodedSource<T> encode_source<T>(const Parameters<T>&,                            \
                                             const std::vector<TokenId>&);                    \
  template DecoderBatch<T> initial_decoder<T>(const Parameters<T>&, const EncodedSource<T>&,  \
                                              int);                                           \
  template Mat<T> decoder_step<T>(const Parameters<T>&, const EncodedSource<T>&,              \
                                  const LexiconBias&, DecoderBatch<T>&,                       \
                                  const std::vector<TokenId>&, Mat<T>*);                      \
  template double sequence_log_prob<T>(const Parameters<T>&, const LexiconBias&,              \
                                       const std::vector<TokenId>&,                           \
                                       const std::vector<TokenId>&);                          \
  template BatchLoss batch_loss<T>(const Parameters<T>&, const LexiconBias&,                  \
                                   const std::vector<SequencePair>&, double,                  \
                                   std::mt19937_64*, Parameters<T>*);

PATCHLOOM_INSTANTIATE(float)
PATCHLOOM_INSTANTIATE(double)

#undef PATCHLOOM_INSTANTIATE

}  // namespace patchloom::nmt
