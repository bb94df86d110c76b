#include "lae/losses.hpp"
#include "lae/model.hpp"
#include "lae/pipeline.hpp"
#include "lae/sampling.hpp"
#include "lae/synthdata.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

namespace {

const std::vector<std::size_t> kArch{16, 64, 32, 101};

lae::Matrix random_batch(std::size_t rows, std::size_t cols) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  lae::Matrix x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x.data()[i] = n(rng);
  }
  return x;
}

void BM_Forward(benchmark::State& state) {
  const auto net = lae::init_network(kArch, 1);
  const auto x = random_batch(static_cast<std::size_t>(state.range(0)), kArch.front());
  for (auto _ : state) {
    benchmark::DoNotOptimize(lae::forward(net, x));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Arg(1)->Arg(256);

void BM_ForwardBackward(benchmark::State& state) {
  const auto net = lae::init_network(kArch, 1);
  const auto x = random_batch(static_cast<std::size_t>(state.range(0)), kArch.front());
  const lae::Matrix g = lae::Matrix::Constant(x.rows(), 101, 1e-3);
  lae::ForwardCache cache;
  for (auto _ : state) {
    lae::forward(net, x, &cache);
    benchmark::DoNotOptimize(lae::backward(net, cache, g));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardBackward)->Arg(256);

void BM_LossAndGradient(benchmark::State& state) {
  const auto target = lae::gaussian_label_distribution(37, 1.0, 101);
  std::vector<double> logits(101);
  for (std::size_t k = 0; k < logits.size(); ++k) {
    logits[k] = 0.01 * static_cast<double>(k % 13);
  }
  const auto pred = lae::softmax(logits);
  std::vector<double> grad(101);
  const lae::LossWeights w{1.0, 2.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(lae::loss_and_gradient(lae::LossMode::Classification, target.probs, 37, pred, w, grad));
  }
}
BENCHMARK(BM_LossAndGradient);

void BM_InstanceSampler(benchmark::State& state) {
  std::uint64_t epoch = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lae::instance_sampler(40000, 256, 3, epoch++));
  }
}
BENCHMARK(BM_InstanceSampler);

void BM_ClassBalancedSampler(benchmark::State& state) {
  lae::GenSpec spec;
  spec.n_total = 40000;
  const auto data = lae::generate(spec);
  const lae::ClassIndex index(data.ages(), 101);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lae::class_balanced_sampler(index, 157, 256, 3));
  }
}
BENCHMARK(BM_ClassBalancedSampler);

void BM_GenerateDefault(benchmark::State& state) {
  lae::GenSpec spec;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lae::generate(spec));
  }
}
BENCHMARK(BM_GenerateDefault)->Unit(benchmark::kMillisecond);

void BM_Stage1OneEpoch(benchmark::State& state) {
  lae::GenSpec spec;
  const auto [train, val] = lae::split(lae::generate(spec), 0.8, 0);
  lae::TrainConfig config;
  config.epochs_stage1 = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lae::train_stage1(config, train, val));
  }
}
BENCHMARK(BM_Stage1OneEpoch)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
