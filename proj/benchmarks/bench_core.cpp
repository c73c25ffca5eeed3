#include "trajsal/autoencoder/losses.hpp"
#include "trajsal/autoencoder/network.hpp"
#include "trajsal/numkernel/adam.hpp"
#include "trajsal/saliency/detect.hpp"
#include "trajsal/saliency/distribution.hpp"
#include "trajsal/stms/generator.hpp"

#include <benchmark/benchmark.h>

using namespace trajsal;

namespace {

const ae::Model& model() {
  static const ae::Model m = [] {
    Rng r(1);
    return ae::Model::initialized({}, r);
  }();
  return m;
}

const Batch& batch() {
  static const Batch b = [] {
    Rng r(2);
    return stms::gen_training_batch(r);
  }();
  return b;
}

void BM_Encode(benchmark::State& state) {
  Rng r(3);
  for (auto _ : state) benchmark::DoNotOptimize(ae::encode_all(model(), batch().trajectories, r));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch().size()));
}
BENCHMARK(BM_Encode)->Unit(benchmark::kMillisecond);

void BM_LossForward(benchmark::State& state) {
  Rng r(4);
  for (auto _ : state) benchmark::DoNotOptimize(ae::total_loss(model(), batch(), 1e5, r));
}
BENCHMARK(BM_LossForward)->Unit(benchmark::kMillisecond);

// One training step's worth of work: forward, backward and the Adam update.
void BM_LossForwardBackward(benchmark::State& state) {
  ae::Model m = model();
  nk::ParamBuffer grad(m.param_count());
  nk::AdamState adam({}, m.param_count());
  Rng r(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ae::total_loss(m, batch(), static_cast<double>(state.range(0)), r, grad));
    nk::adam_step(m.params(), grad, adam);
  }
}
BENCHMARK(BM_LossForwardBackward)->Arg(0)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_ScoreAndSweep(benchmark::State& state) {
  const auto scenarios = stms::gen_split(stms::Split::val, 50, 6);
  for (auto _ : state) {
    Rng r(7);
    const auto scored = sal::score_scenarios(scenarios, model(), r);
    benchmark::DoNotOptimize(sal::sweep_lambda(scored));
  }
}
BENCHMARK(BM_ScoreAndSweep)->Unit(benchmark::kMillisecond);

void BM_FitDagum(benchmark::State& state) {
  Rng r(8);
  std::vector<double> q(static_cast<std::size_t>(state.range(0)));
  const auto law = sal::make_fit(sal::Family::dagum_general, {3.0, 0.8, 1.2});
  for (double& v : q) v = sal::lambda_from_pvalue(law, uniform(r, 1e-4, 1 - 1e-4));
  for (auto _ : state) benchmark::DoNotOptimize(sal::fit_distribution(q, sal::Family::dagum_general));
}
BENCHMARK(BM_FitDagum)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
