#include "vismax/config.hpp"
#include "vismax/gridworld.hpp"
#include "vismax/trainer.hpp"
#include "vismax/visitation_model.hpp"
#include "vismax/visitation_oracle.hpp"

#include <benchmark/benchmark.h>

using namespace vismax;

namespace {

Gridworld room(int side) {
  return build_gridworld(make_layout("empty-room", {.random_start = true, .width = side, .height = side}), 0.95);
}

void BM_OracleDirect(benchmark::State& state) {
  const Gridworld w = room(static_cast<int>(state.range(0)));
  const Policy pi = uniform_policy(w.mdp.n_states(), w.mdp.n_actions());
  for (auto _ : state) benchmark::DoNotOptimize(feature_visitation_direct(w.mdp, pi, w.features));
  state.SetLabel(std::to_string(w.mdp.n_pairs()) + " pairs");
}
BENCHMARK(BM_OracleDirect)->Arg(5)->Arg(9)->Unit(benchmark::kMillisecond);

void BM_OracleIterative(benchmark::State& state) {
  const Gridworld w = room(static_cast<int>(state.range(0)));
  const Policy pi = uniform_policy(w.mdp.n_states(), w.mdp.n_actions());
  for (auto _ : state) benchmark::DoNotOptimize(feature_visitation(w.mdp, pi, w.features));
}
BENCHMARK(BM_OracleIterative)->Arg(5)->Arg(9)->Unit(benchmark::kMillisecond);

void BM_VisitationTrainStep(benchmark::State& state) {
  const Gridworld w = room(9);
  const Policy beta = uniform_policy(w.mdp.n_states(), w.mdp.n_actions());
  Rng rng(1);
  ReplayBuffer buffer(50000);
  while (buffer.total_pushed() < 50000)
    for (auto& seg : make_segments(sample_episode(w.mdp, beta, 200, rng), 4, &beta)) buffer.push(std::move(seg));
  VisitationTrainConfig cfg;
  cfg.batch_size = static_cast<std::size_t>(state.range(0));
  CategoricalVisitationModel model(w.mdp.n_states(), w.mdp.n_actions(), w.n_features());
  for (auto _ : state) benchmark::DoNotOptimize(train_step(model, buffer, &beta, w.features, cfg, rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_VisitationTrainStep)->Arg(256)->Arg(1024);

void BM_TrainerIteration(benchmark::State& state) {
  RunConfig cfg = parse_config("layout = two-rooms\nmode = explore\n");
  const auto strategy = static_cast<Strategy>(state.range(0));
  Trainer trainer(cfg, strategy, 0);
  for (int i = 0; i < 10; ++i) trainer.iterate();
  for (auto _ : state) benchmark::DoNotOptimize(trainer.iterate());
  state.SetLabel(to_string(strategy));
}
BENCHMARK(BM_TrainerIteration)
    ->Arg(static_cast<int>(Strategy::SAC))
    ->Arg(static_cast<int>(Strategy::MV))
    ->Arg(static_cast<int>(Strategy::CV));

}  // namespace

BENCHMARK_MAIN();
