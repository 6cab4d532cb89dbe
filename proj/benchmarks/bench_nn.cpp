#include <benchmark/benchmark.h>

#include "ttalab/matrix.hpp"
#include "ttalab/nn.hpp"
#include "ttalab/rng.hpp"

namespace {

using namespace ttalab;

Matrix random_matrix(int r, int c, Rng& rng) {
  Matrix m(r, c);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

void BM_matmul_64x256x64(benchmark::State& state) {
  Rng rng(1);
  Matrix a = random_matrix(64, 256, rng);
  Matrix b = random_matrix(256, 64, rng);
  Matrix out(64, 64);
  for (auto _ : state) {
    matmul(a, b, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations());
  state.counters["flops"] = benchmark::Counter(
      static_cast<double>(state.iterations()) * 2.0 * 64 * 256 * 64, benchmark::Counter::kIsRate);
}
BENCHMARK(BM_matmul_64x256x64);

void BM_forward_batch64(benchmark::State& state) {
  Rng rng(2);
  Model model = make_mlp(256, 64, 21, rng);
  Matrix x = random_matrix(64, 256, rng);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = 0.5 + 0.1 * x.data()[i];
  for (auto _ : state) {
    Matrix logits = forward(model, x, BnMode::BatchStats);
    benchmark::DoNotOptimize(logits.data());
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_forward_batch64);

void BM_entropy_step_batch64(benchmark::State& state) {
  Rng rng(3);
  Model model = make_mlp(256, 64, 21, rng);
  Matrix x = random_matrix(64, 256, rng);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = 0.5 + 0.1 * x.data()[i];
  for (auto _ : state) {
    LossResult r = loss_and_grads(model, x, Objective::entropy_min(), GradScope::BnAffineOnly);
    sgd_step(model, r.grads, 1e-3, GradScope::BnAffineOnly);
    benchmark::DoNotOptimize(r.loss);
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_entropy_step_batch64);

}  // namespace

BENCHMARK_MAIN();
