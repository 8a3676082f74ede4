#include <benchmark/benchmark.h>

#include "tdlab/harness.hpp"
#include "tdlab/learners.hpp"
#include "tdlab/metrics.hpp"

namespace {

using namespace tdlab;

/// Pre-generated off-policy stream on a random MDP with `d`-dimensional
/// tabular features, so the timed loop only runs updates.
struct Fixture {
  Environment env;
  std::vector<TransitionSample> samples;

  explicit Fixture(std::size_t n_states) {
    env.mdp = generate_random_mdp(n_states, 3, 4, 2, 17);
    env.features = make_features(env.mdp, FeatureKind::tabular, 18);
    env.policies = make_policies(env.mdp, 0.9, 0.8, 19);
    Rng rng(20);
    std::size_t s = 0;
    for (int t = 0; t < 4096; ++t) {
      samples.push_back(sample_step(env.mdp, env.policies, s, rng));
      s = samples.back().s_next;
    }
  }
};

const Fixture& fixture(std::size_t n_states) {
  static const Fixture small(30);
  static const Fixture large(512);
  return n_states == 30 ? small : large;
}

void BM_Update(benchmark::State& state, const Algorithm* algorithm) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  const HyperParams hp{0.01, 1.0, 0.9, 0.5};
  auto st = make_learner_state(f.env.features.d);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& t = f.samples[i];
    algorithm->update(st, t, f.env.features(t.s), f.env.features(t.s_next), hp);
    benchmark::DoNotOptimize(st.w.data());
    i = (i + 1) % f.samples.size();
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_Mave(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  const std::size_t n = f.env.mdp.n_states;
  std::vector<double> v(n, 1.0), d(n, 1.0 / static_cast<double>(n)), w(f.env.features.d, 0.5);
  const MetricEvaluator eval(MetricKind::mave, f.env.features, v, d);
  for (auto _ : state) benchmark::DoNotOptimize(eval(w));
}
BENCHMARK(BM_Mave)->Arg(30)->Arg(512);

void BM_Trial500(benchmark::State& state) {
  RunConfig c;
  c.algorithm = "tohtd";
  c.n_mdps = 1;
  const auto problem = make_instance(c, 0);
  const auto& alg = find_algorithm("tohtd");
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_trial(problem, alg, {0.01, 1.0, 0.9, 0.5}, 500, ++seed,
                                       MetricKind::mave));
  }
}
BENCHMARK(BM_Trial500)->Unit(benchmark::kMicrosecond);

[[maybe_unused]] const bool registered = [] {
  for (const auto& a : algorithms()) {
    benchmark::RegisterBenchmark(("BM_Update/" + std::string(a.name)).c_str(), BM_Update, &a)
        ->Arg(30)
        ->Arg(512);
  }
  return true;
}();

}  // namespace
BENCHMARK_MAIN();
