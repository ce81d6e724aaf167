// Microbenchmarks for the training hot paths: batched network passes,
// optimiser steps, environment stepping and replay access.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "fmh/agents.hpp"
#include "fmh/mlp.hpp"
#include "fmh/replay.hpp"
#include "fmh/rng.hpp"
#include "fmh/trainer.hpp"
#include "fmh/world.hpp"

using namespace fmh;

namespace {

num::Matrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  num::Matrix m(rows, cols);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : m.data) v = normal(rng);
  return m;
}

void bench_mlp_forward(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const int batch = static_cast<int>(state.range(0));
  const num::MlpParams net = num::make_mlp({36, 256, 256, 1}, num::Activation::kIdentity, rng);
  const num::Matrix input = random_matrix(batch, 36, rng);
  for (auto _ : state) {
    num::Matrix out = num::mlp_forward(net, input);
    benchmark::DoNotOptimize(out.data.data());
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(bench_mlp_forward)->Arg(1)->Arg(1024);

void bench_mlp_forward_backward(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const int batch = static_cast<int>(state.range(0));
  const num::MlpParams net = num::make_mlp({36, 256, 256, 1}, num::Activation::kIdentity, rng);
  const num::Matrix input = random_matrix(batch, 36, rng);
  const num::Matrix upstream = random_matrix(batch, 1, rng);
  for (auto _ : state) {
    num::ForwardTrace trace;
    num::Matrix out = num::mlp_forward(net, input, &trace);
    num::BatchGradients grads = num::mlp_backward(net, trace, upstream);
    benchmark::DoNotOptimize(grads.layers.data());
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(bench_mlp_forward_backward)->Arg(1024);

void bench_adam_step(benchmark::State& state) {
  std::mt19937_64 rng(3);
  num::MlpParams net = num::make_mlp({36, 256, 256, 1}, num::Activation::kIdentity, rng);
  num::AdamState opt = num::make_adam_state(net, 1e-3);
  const num::Matrix input = random_matrix(16, 36, rng);
  const num::Matrix upstream = random_matrix(16, 1, rng);
  num::ForwardTrace trace;
  num::mlp_forward(net, input, &trace);
  const num::BatchGradients grads = num::mlp_backward(net, trace, upstream);
  for (auto _ : state) {
    num::adam_step(net, grads.layers, opt);
    benchmark::DoNotOptimize(net.layers.data());
  }
}
BENCHMARK(bench_adam_step);

void bench_world_step(benchmark::State& state) {
  const env::ScenarioConfig scenario =
      env::build_scenario(env::ScenarioKind::kCoopCoord, 3, 6);
  env::WorldState world = env::reset(scenario, 1);
  std::vector<env::AgentAction> actions(static_cast<std::size_t>(scenario.n_agents()));
  for (int a = 0; a < scenario.n_agents(); ++a) {
    auto& action = actions[static_cast<std::size_t>(a)];
    action.force.assign(static_cast<std::size_t>(scenario.force_dim(a)), 0.25);
    action.message.assign(static_cast<std::size_t>(scenario.message_dim(a)), 0.0);
  }
  std::uint64_t episode = 2;
  for (auto _ : state) {
    const env::StepResult result = env::step(scenario, world, actions);
    benchmark::DoNotOptimize(result.collision_counts.data());
    if (world.t == scenario.episode_len) world = env::reset(scenario, episode++);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bench_world_step);

void bench_replay_append_sample(benchmark::State& state) {
  agents::ReplayBuffer buffer(1 << 18, 20, 8, 1, 25);
  const std::vector<double> obs(20, 0.5), act(8, 0.25), next(20, 0.75);
  const double reward = -1.0;
  for (int i = 0; i < (1 << 16); ++i)
    buffer.append(obs, act, {&reward, 1}, next, 0.0);
  std::mt19937_64 rng(4);
  std::vector<std::size_t> rows;
  num::Matrix batch;
  for (auto _ : state) {
    buffer.append(obs, act, {&reward, 1}, next, 0.0);
    buffer.sample_transitions(rng, 1024, rows);
    buffer.gather_obs(rows, batch);
    benchmark::DoNotOptimize(batch.data.data());
  }
}
BENCHMARK(bench_replay_append_sample);

void bench_training_episode(benchmark::State& state) {
  agents::TrainerConfig config;
  config.scenario = env::build_scenario(env::ScenarioKind::kCoopComm, 1, 3);
  config.algorithm = agents::Algorithm::kFmh;
  config.run_seed = 1;
  config.hp.batch_size = 1024;
  agents::Trainer trainer(config);
  int epoch = 0;
  for (auto _ : state) {
    trainer.run_episode(epoch, true, true);
    benchmark::DoNotOptimize(trainer.env_steps());
  }
  state.SetLabel("includes one update round per 4 episodes");
}
BENCHMARK(bench_training_episode)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
