#include <benchmark/benchmark.h>

#include "ttalab/adapter.hpp"
#include "ttalab/bank.hpp"
#include "ttalab/corruption.hpp"
#include "ttalab/dataset.hpp"
#include "ttalab/harness.hpp"
#include "ttalab/rng.hpp"
#include "ttalab/stream.hpp"

namespace {

using namespace ttalab;

const ToyDataset& corpus() {
  static const ToyDataset ds = make_toy_dataset(ToyDatasetConfig{});
  return ds;
}

const Model& trained() {
  static const Model m = [] {
    Rng rng(42);
    return train_source_model(corpus(), 30, 0.05, rng);
  }();
  return m;
}

Image test_frame() {
  return corpus().test[0].frames[0];
}

void BM_corrupt_gaussian_noise(benchmark::State& state) {
  const Image src = test_frame();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    Image out = corrupt(src, CorruptionKind::GaussianNoise, 3.0, seed++);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_corrupt_gaussian_noise);

void BM_corrupt_glass_blur(benchmark::State& state) {
  const Image src = test_frame();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    Image out = corrupt(src, CorruptionKind::GlassBlur, 3.0, seed++);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_corrupt_glass_blur);

void BM_build_stream_tracklet_iid(benchmark::State& state) {
  ScenarioConfig cfg;
  cfg.scenario = Scenario::TrackletWiseIID;
  cfg.corruption = CorruptionKind::GaussianNoise;
  cfg.batch_size = 64;
  for (auto _ : state) {
    cfg.seed++;
    Stream s = build_stream(corpus(), cfg);
    benchmark::DoNotOptimize(s.total_rows);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(corpus().test.size()) *
                          corpus().config.frames_per_tracklet);
}
BENCHMARK(BM_build_stream_tracklet_iid)->Unit(benchmark::kMillisecond);

void BM_bank_insert_at_capacity(benchmark::State& state) {
  Rng rng(3);
  MemoryBank bank(64, 21);
  std::vector<double> x(256);
  for (double& v : x) v = rng.uniform();
  for (int i = 0; i < 64; ++i) bank.insert(x, static_cast<int>(rng.bounded(21)), 0.5);
  int label = 0;
  for (auto _ : state) {
    auto evicted = bank.insert(x, label++ % 21, 0.5);
    benchmark::DoNotOptimize(evicted);
    bank.tick();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_bank_insert_at_capacity);

void BM_advmem_init_63(benchmark::State& state) {
  const Model& m = trained();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    Rng rng(seed++);
    MemoryBank bank = advmem_init(m, 21, 63, kAdvMemAlpha, kAdvMemMaxIters, rng, true);
    benchmark::DoNotOptimize(bank.size());
  }
  state.SetItemsProcessed(state.iterations() * 63);
}
BENCHMARK(BM_advmem_init_63)->Unit(benchmark::kMillisecond);

void BM_adapter_step_memshotim(benchmark::State& state) {
  ScenarioConfig cfg;
  cfg.scenario = Scenario::TrackletWiseIID;
  cfg.corruption = CorruptionKind::GaussianNoise;
  cfg.batch_size = 64;
  cfg.seed = 9;
  const Stream s = build_stream(corpus(), cfg);
  AdapterHyper hyper;
  hyper.lr = 0.3;
  Adapter adapter(Method::MemShotIM, trained(), hyper, 11);
  std::size_t i = 0;
  for (auto _ : state) {
    auto preds = adapter.predict_and_adapt(s.batches[i++ % s.batches.size()].x);
    benchmark::DoNotOptimize(preds.data());
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_adapter_step_memshotim)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
