#include <benchmark/benchmark.h>

#include <random>

#include "patchloom/nmt/beam_search.hpp"
#include "patchloom/nmt/network.hpp"

using namespace patchloom::nmt;

namespace {

Parameters<float> params(int vocab, int hidden) {
  std::mt19937_64 rng(1);
  return Parameters<float>::random({vocab, vocab, hidden / 2, hidden}, rng);
}

std::vector<TokenId> source(int length, int vocab) {
  std::vector<TokenId> s;
  for (int i = 0; i < length; ++i) s.push_back(static_cast<TokenId>(5 + (i * 7) % (vocab - 5)));
  return s;
}

void BM_DecoderStep(benchmark::State& state) {
  const int hidden = static_cast<int>(state.range(0));
  const int beam = static_cast<int>(state.range(1));
  const auto p = params(2000, hidden);
  const auto enc = encode_source(p, source(20, 2000));
  const std::vector<TokenId> tokens(static_cast<std::size_t>(beam), kBosId);
  for (auto _ : state) {
    auto s = initial_decoder(p, enc, beam);
    benchmark::DoNotOptimize(decoder_step(p, enc, {}, s, tokens));
  }
}
BENCHMARK(BM_DecoderStep)->Args({128, 1})->Args({128, 10})->Args({512, 10});

void BM_BatchLossWithGradient(benchmark::State& state) {
  const int hidden = static_cast<int>(state.range(0));
  const auto p = params(1000, hidden);
  std::vector<SequencePair> batch;
  for (int i = 0; i < 16; ++i) batch.push_back({source(12, 1000), source(12, 1000)});
  auto grad = Parameters<float>::zeros(p.dims);
  std::mt19937_64 rng(2);
  for (auto _ : state) {
    grad.set_zero();
    benchmark::DoNotOptimize(batch_loss<float>(p, {}, batch, 0.2, &rng, &grad));
  }
  state.SetItemsProcessed(state.iterations() * 16 * 13);
}
BENCHMARK(BM_BatchLossWithGradient)->Arg(128)->Arg(256);

void BM_BeamSearch(benchmark::State& state) {
  const auto p = params(1000, 128);
  const auto src = source(15, 1000);
  const BeamOptions opt{static_cast<int>(state.range(0)), 30};
  for (auto _ : state) benchmark::DoNotOptimize(beam_search<float>(p, {}, src, opt));
}
BENCHMARK(BM_BeamSearch)->Arg(1)->Arg(10);

}  // namespace
