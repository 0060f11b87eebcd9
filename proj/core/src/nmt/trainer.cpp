#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "patchloom/nmt/model.hpp"

namespace patchloom::nmt {

void TrainingConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must be in [0, 1)");
  require(minibatch_words > 0, "minibatch_words must be positive");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0, "adam_beta1 must be in [0, 1)");
  require(adam_beta2 >= 0.0 && adam_beta2 < 1.0, "adam_beta2 must be in [0, 1)");
  require(adam_epsilon > 0.0, "adam_epsilon must be positive");
  require(decay_factor > 0.0 && decay_factor <= 1.0, "decay_factor must be in (0, 1]");
  require(clip_norm >= 0.0, "clip_norm must be non-negative");
  require(max_epochs >= 1, "max_epochs must be at least 1");
  require(embedding >= 1 && hidden >= 1, "embedding and hidden sizes must be positive");
  require(dev_fraction > 0.0 && dev_fraction < 1.0, "dev_fraction must be in (0, 1)");
  require(lexicon_weight >= 0.0 && lexicon_weight <= 1.0, "lexicon_weight must be in [0, 1]");
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> development_split(
    const std::vector<int>& year_post, double fraction) {
  const std::size_t n = year_post.size();
  if (n == 0) return {};
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (n == 1) return {order, order};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return year_post[a] < year_post[b]; });
  auto dev_n = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
  dev_n = std::clamp<std::size_t>(dev_n, 1, n - 1);
  std::vector<std::size_t> train(order.begin(), order.end() - static_cast<std::ptrdiff_t>(dev_n));
  std::vector<std::size_t> dev(order.end() - static_cast<std::ptrdiff_t>(dev_n), order.end());
  std::sort(train.begin(), train.end());
  std::sort(dev.begin(), dev.end());
  return {train, dev};
}

std::vector<std::vector<std::size_t>> make_batches(const std::vector<SequencePair>& pairs,
                                                   const std::vector<std::size_t>& indices,
                                                   std::size_t words) {
  std::vector<std::size_t> order = indices;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = pairs[a];
    const auto& y = pairs[b];
    if (x.tgt.size() != y.tgt.size()) return x.tgt.size() < y.tgt.size();
    return x.src.size() < y.src.size();
  });
  std::vector<std::vector<std::size_t>> batches;
  std::vector<std::size_t> current;
  std::size_t count = 0;
  for (std::size_t i : order) {
    current.push_back(i);
    count += pairs[i].tgt.size() + 1;
    if (count >= words) {
      batches.push_back(std::move(current));
      current.clear();
      count = 0;
    }
  }
  if (!current.empty()) batches.push_back(std::move(current));
  return batches;
}

namespace {

class Adam {
 public:
  Adam(const Dimensions& dims, const TrainingConfig& config)
      : m_(Parameters<float>::zeros(dims)), v_(Parameters<float>::zeros(dims)), config_(config) {}

  void step(Parameters<float>& params, Parameters<float>& grad, double lr) {
    ++t_;
    const double b1 = config_.adam_beta1, b2 = config_.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, t_), c2 = 1.0 - std::pow(b2, t_);
    const auto step_size = static_cast<float>(lr * std::sqrt(c2) / c1);
    const auto eps = static_cast<float>(config_.adam_epsilon * std::sqrt(c2));
    const auto fb1 = static_cast<float>(b1), fb2 = static_cast<float>(b2);
    std::vector<Mat<float>*> ps, gs, ms, vs;
    params.for_each([&](const char*, Mat<float>& x) { ps.push_back(&x); });
    grad.for_each([&](const char*, Mat<float>& x) { gs.push_back(&x); });
    m_.for_each([&](const char*, Mat<float>& x) { ms.push_back(&x); });
    v_.for_each([&](const char*, Mat<float>& x) { vs.push_back(&x); });
    for (std::size_t k = 0; k < ps.size(); ++k) {
      auto g = gs[k]->array();
      auto m = ms[k]->array();
      auto v = vs[k]->array();
      m = fb1 * m + (1.0f - fb1) * g;
      v = fb2 * v + (1.0f - fb2) * g.square();
      ps[k]->array() -= step_size * m / (v.sqrt() + eps);
    }
  }

 private:
  Parameters<float> m_, v_;
  const TrainingConfig& config_;
  int t_ = 0;
};

double global_norm(const Parameters<float>& grad) {
  double sq = 0.0;
  grad.for_each([&](const char*, const Mat<float>& m) {
    sq += m.template cast<double>().squaredNorm();
  });
  return std::sqrt(sq);
}

double evaluate_loss(const Parameters<float>& params, const LexiconBias& bias,
                     const std::vector<SequencePair>& pairs,
                     const std::vector<std::vector<std::size_t>>& batches) {
  BatchLoss total;
  for (const auto& idx : batches) {
    std::vector<SequencePair> batch;
    for (std::size_t i : idx) batch.push_back(pairs[i]);
    auto l = batch_loss<float>(params, bias, batch, 0.0, nullptr, nullptr);
    total.total_nll += l.total_nll;
    total.tokens += l.tokens;
  }
  return total.mean();
}

}  // namespace

TrainingResult train(const TrainingData& data, const TrainingConfig& config,
                     const EpochCallback& on_epoch) {
  config.validate();
  if (data.src.empty() || data.src.size() != data.tgt.size() ||
      data.year_post.size() != data.src.size()) {
    throw std::invalid_argument("train: training data is empty or not aligned");
  }
  std::mt19937_64 rng(config.seed);

  std::vector<SequencePair> pairs(data.src.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    pairs[i].src = data.src_vocab.encode(data.src[i]);
    pairs[i].tgt = data.tgt_vocab.encode(data.tgt[i]);
    if (pairs[i].src.empty()) throw std::invalid_argument("train: empty source statement");
  }
  auto [train_idx, dev_idx] = development_split(data.year_post, config.dev_fraction);

  TrainingResult result;
  Model& model = result.model;
  model.src_vocab = data.src_vocab;
  model.tgt_vocab = data.tgt_vocab;
  model.lexicon_weight = config.use_lexicon ? config.lexicon_weight : 0.0;
  if (config.use_lexicon) {
    std::vector<std::vector<TokenId>> ls, lt;
    for (std::size_t i : train_idx) {
      ls.push_back(pairs[i].src);
      lt.push_back(pairs[i].tgt);
    }
    model.lexicon = build_lexicon(ls, lt, data.src_vocab.size(), data.tgt_vocab.size(),
                                  config.lexicon);
  }

  Dimensions dims{static_cast<int>(data.src_vocab.size()),
                  static_cast<int>(data.tgt_vocab.size()), config.embedding, config.hidden};
  auto params =
      Parameters<float>::random(dims, rng, static_cast<float>(config.init_scale));
  model.params = params;
  const LexiconBias bias = model.bias();

  auto batches = make_batches(pairs, train_idx, config.minibatch_words);
  const auto dev_batches = make_batches(pairs, dev_idx, config.minibatch_words);
  Adam adam(dims, config);
  auto grad = Parameters<float>::zeros(dims);
  double lr = config.learning_rate;
  double best_dev = std::numeric_limits<double>::infinity();
  double prev_dev = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::shuffle(batches.begin(), batches.end(), rng);
    BatchLoss epoch_loss;
    for (const auto& idx : batches) {
      std::vector<SequencePair> batch;
      batch.reserve(idx.size());
      for (std::size_t i : idx) batch.push_back(pairs[i]);
      grad.set_zero();
      auto l = batch_loss<float>(params, bias, batch, config.dropout, &rng, &grad);
      if (!std::isfinite(l.total_nll)) {
        result.aborted = true;
        result.diagnostic = "non-finite training loss in epoch " + std::to_string(epoch) +
                            "; returning the best snapshot so far";
        return result;
      }
      epoch_loss.total_nll += l.total_nll;
      epoch_loss.tokens += l.tokens;
      if (config.clip_norm > 0.0) {
        const double norm = global_norm(grad);
        if (norm > config.clip_norm) {
          const auto s = static_cast<float>(config.clip_norm / norm);
          grad.for_each([&](const char*, Mat<float>& m) { m *= s; });
        }
      }
      adam.step(params, grad, lr);
      if (!params.all_finite()) {
        result.aborted = true;
        result.diagnostic = "non-finite parameters after an update in epoch " +
                            std::to_string(epoch) + "; returning the best snapshot so far";
        return result;
      }
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_loss.mean();
    stats.dev_loss = evaluate_loss(params, bias, pairs, dev_batches);
    stats.learning_rate = lr;
    if (!std::isfinite(stats.dev_loss)) {
      result.aborted = true;
      result.diagnostic = "non-finite development loss in epoch " + std::to_string(epoch) +
                          "; returning the best snapshot so far";
      return result;
    }
    if (stats.dev_loss < best_dev) {
      best_dev = stats.dev_loss;
      model.params = params;
      result.best_epoch = epoch;
      stats.improved = true;
    }
    if (stats.dev_loss > prev_dev) lr *= config.decay_factor;
    prev_dev = stats.dev_loss;
    stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.history.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return result;
}

}  // namespace patchloom::nmt
