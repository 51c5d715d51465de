// Serial reference vs OpenMP kernels on a realistic batch:
// 100 samples, 1024-d image features, 18 seen classes, 80-d class embeddings.

#include <benchmark/benchmark.h>

#include "zsl/kernels.hpp"
#include "zsl/reference.hpp"
#include "zsl/rng.hpp"
#include "zsl/train.hpp"

namespace {

struct Fixture {
  zsl::CompatModel model;
  zsl::Matrix features;
  std::vector<std::size_t> labels;
  zsl::ClassSet classes;

  Fixture(Eigen::Index batch, Eigen::Index d, Eigen::Index m, std::size_t k) {
    zsl::RandomStream rng(7, "bench");
    model = zsl::init_model(static_cast<std::size_t>(d), static_cast<std::size_t>(m), zsl::InitScheme::GlorotUniform, 7);
    features = zsl::Matrix::NullaryExpr(batch, d, [&] { return rng.uniform(-1.0, 1.0); });
    zsl::Matrix psi = zsl::Matrix::NullaryExpr(static_cast<Eigen::Index>(k), m, [&] { return rng.uniform(0.0, 1.0); });
    std::vector<std::string> names;
    for (std::size_t i = 0; i < k; ++i) names.push_back("c" + std::to_string(i));
    classes = zsl::ClassSet(names, psi);
    for (Eigen::Index i = 0; i < batch; ++i) labels.push_back(rng.index(k));
  }
};

const Fixture& fixture() {
  static const Fixture f(100, 1024, 80, 18);
  return f;
}

void BM_GradientReference(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(zsl::reference::batch_gradient(f.model, {f.features, f.labels}, f.classes));
}

void BM_GradientKernel(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(zsl::kernels::batch_gradient(f.model, {f.features, f.labels}, f.classes));
}

void BM_PredictReference(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(zsl::reference::predict_rows(f.model, f.features, f.classes));
}

void BM_PredictKernel(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(zsl::kernels::predict_rows(f.model, f.features, f.classes));
}

}  // namespace

BENCHMARK(BM_GradientReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GradientKernel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictKernel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
