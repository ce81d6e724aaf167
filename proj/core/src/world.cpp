#include "fmh/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace fmh::env {

using fmh::num::require;

namespace {

double dist(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

bool comm_family(const ScenarioConfig& c) {
  return c.kind == ScenarioKind::kCoopComm || c.kind == ScenarioKind::kComSynthetic;
}

bool any_agents_overlap(const WorldState& state) {
  for (std::size_t i = 0; i < state.agents.size(); ++i)
    for (std::size_t j = i + 1; j < state.agents.size(); ++j)
      if (dist(state.agents[i].pos, state.agents[j].pos) <
          state.agents[i].radius + state.agents[j].radius)
        return true;
  return false;
}

void sample_agent_positions(const ScenarioConfig& config, WorldState& state,
                            std::mt19937_64& rng) {
  std::uniform_real_distribution<double> arena(-1.0, 1.0);
  std::uniform_real_distribution<double> bottom(-1.0, -0.8);
  for (int i = 0; i < config.n_agents(); ++i) {
    EntityState& agent = state.agents[static_cast<std::size_t>(i)];
    agent.pos[0] = arena(rng);
    agent.pos[1] = config.kind == ScenarioKind::kTnofEval && !config.is_speaker(i)
                       ? bottom(rng)
                       : arena(rng);
  }
  if (config.speaker_present && config.speaker_offscreen && !config.speaker_mobile) {
    state.agents[static_cast<std::size_t>(config.speaker_index())].pos = {-4.0, -4.0};
  }
}

void place_landmarks(const ScenarioConfig& config, WorldState& state,
                     std::mt19937_64& rng) {
  std::uniform_real_distribution<double> arena(-1.0, 1.0);
  if (config.kind == ScenarioKind::kTnofEval) {
    // Fixed vertical bands: near entities in the bottom 40% of the arena,
    // far entities in the top 30%; x is free. Two near targets, one far
    // target, one near decoy, two far decoys, in shuffled index order.
    std::uniform_real_distribution<double> near_band(-1.0, -0.2);
    std::uniform_real_distribution<double> far_band(0.4, 1.0);
    struct Blueprint {
      bool near;
      bool target;
    };
    std::vector<Blueprint> plan = {{true, true},  {true, true},  {false, true},
                                   {true, false}, {false, false}, {false, false}};
    std::shuffle(plan.begin(), plan.end(), rng);
    for (int l = 0; l < config.n_landmarks; ++l) {
      Landmark& lm = state.landmarks[static_cast<std::size_t>(l)];
      const Blueprint& bp = plan[static_cast<std::size_t>(l)];
      lm.pos[0] = arena(rng);
      lm.pos[1] = bp.near ? near_band(rng) : far_band(rng);
      lm.is_target = bp.target;
      lm.colour = bp.target ? target_green() : decoy_blue();
    }
    return;
  }
  for (int l = 0; l < config.n_landmarks; ++l) {
    Landmark& lm = state.landmarks[static_cast<std::size_t>(l)];
    lm.pos[0] = arena(rng);
    lm.pos[1] = arena(rng);
    lm.colour = config.palette[static_cast<std::size_t>(l)];
  }
  if (!comm_family(config)) {
    // Pick the green targets for this episode.
    std::vector<int> order(static_cast<std::size_t>(config.n_landmarks));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (int l = 0; l < config.n_landmarks; ++l) {
      Landmark& lm = state.landmarks[static_cast<std::size_t>(order[static_cast<std::size_t>(l)])];
      lm.is_target = l < config.n_targets;
      lm.colour = lm.is_target ? target_green() : decoy_blue();
    }
  }
}

}  // namespace

WorldState reset(const ScenarioConfig& config, std::uint64_t seed) {
  config.validate();
  WorldState state;
  state.episode_seed = seed;
  std::mt19937_64 rng(seed);

  state.agents.resize(static_cast<std::size_t>(config.n_agents()));
  for (int i = 0; i < config.n_agents(); ++i) {
    EntityState& agent = state.agents[static_cast<std::size_t>(i)];
    agent.radius = config.agent_radius;
    agent.mass = config.agent_mass(i);
    agent.movable = config.agent_mobile(i);
    agent.vel = {0.0, 0.0};
  }
  sample_agent_positions(config, state, rng);
  if (config.no_auto_collide_spawn) {
    int attempts = 0;
    while (any_agents_overlap(state)) {
      require(++attempts < 1000, "reset: could not find a collision-free spawn");
      sample_agent_positions(config, state, rng);
    }
  }

  state.landmarks.resize(static_cast<std::size_t>(config.n_landmarks));
  place_landmarks(config, state, rng);

  if (comm_family(config)) {
    std::uniform_int_distribution<int> pick(0, config.n_landmarks - 1);
    state.listener_target.resize(static_cast<std::size_t>(config.n_listeners));
    for (int w = 0; w < config.n_listeners; ++w)
      state.listener_target[static_cast<std::size_t>(w)] = pick(rng);
  }
  return state;
}

StepResult step(const ScenarioConfig& config, WorldState& state,
                const std::vector<AgentAction>& actions) {
  require(static_cast<int>(actions.size()) == config.n_agents(),
          "step: one action per agent required");
  require(state.t < config.episode_len, "step: episode already finished");

  for (int i = 0; i < config.n_agents(); ++i) {
    EntityState& agent = state.agents[static_cast<std::size_t>(i)];
    const AgentAction& action = actions[static_cast<std::size_t>(i)];
    if (!agent.movable) {
      require(action.force.empty(), "step: immobile agent given a force");
      continue;
    }
    require(action.force.size() == 2, "step: mobile agent needs a 2-d force");
    const double fx = std::clamp(action.force[0], -1.0, 1.0);
    const double fy = std::clamp(action.force[1], -1.0, 1.0);
    const double gain = config.sensitivity / agent.mass * config.dt;
    agent.vel[0] = (1.0 - config.damping) * agent.vel[0] + gain * fx;
    agent.vel[1] = (1.0 - config.damping) * agent.vel[1] + gain * fy;
    agent.pos[0] += agent.vel[0] * config.dt;
    agent.pos[1] += agent.vel[1] * config.dt;
  }
  state.t += 1;

  StepResult result;
  result.collision_counts.assign(state.agents.size(), 0);
  if (config.collisions_enabled) {
    for (int i = 0; i < config.n_agents(); ++i)
      for (int j = i + 1; j < config.n_agents(); ++j) {
        const EntityState& a = state.agents[static_cast<std::size_t>(i)];
        const EntityState& b = state.agents[static_cast<std::size_t>(j)];
        if (dist(a.pos, b.pos) < a.radius + b.radius) {
          result.collisions.push_back({i, j});
          result.collision_counts[static_cast<std::size_t>(i)] += 1;
          result.collision_counts[static_cast<std::size_t>(j)] += 1;
        }
      }
  }
  return result;
}

double task_reward(const ScenarioConfig& config, const WorldState& state) {
  if (config.kind == ScenarioKind::kComSynthetic) return com_reward(config, state);
  if (config.kind == ScenarioKind::kCoopComm) {
    double total = 0.0;
    for (int w = 0; w < config.n_listeners; ++w) {
      const int target = state.listener_target[static_cast<std::size_t>(w)];
      total -= dist(state.agents[static_cast<std::size_t>(w)].pos,
                    state.landmarks[static_cast<std::size_t>(target)].pos);
    }
    return total / config.n_listeners;
  }
  // Coordination family: each green target scores the closest mobile agent.
  double total = 0.0;
  for (const Landmark& lm : state.landmarks) {
    if (!lm.is_target) continue;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < config.n_agents(); ++i) {
      if (!config.agent_mobile(i)) continue;
      best = std::min(best, dist(state.agents[static_cast<std::size_t>(i)].pos, lm.pos));
    }
    total -= best;
  }
  return total;
}

double worker_reward(const ScenarioConfig& config, const WorldState& state, int worker,
                     int goal_landmark, int own_collisions) {
  require(worker >= 0 && worker < config.n_listeners, "worker_reward: not a worker index");
  require(goal_landmark >= 0 && goal_landmark < config.n_landmarks,
          "worker_reward: goal landmark out of range");
  const double d = dist(state.agents[static_cast<std::size_t>(worker)].pos,
                        state.landmarks[static_cast<std::size_t>(goal_landmark)].pos);
  return -d - static_cast<double>(own_collisions);
}

double com_reward(const ScenarioConfig& config, const WorldState& state) {
  require(!state.landmarks.empty(), "com_reward: need at least one landmark");
  std::array<double, 2> centroid{0.0, 0.0};
  for (const Landmark& lm : state.landmarks) {
    centroid[0] += lm.pos[0];
    centroid[1] += lm.pos[1];
  }
  centroid[0] /= static_cast<double>(state.landmarks.size());
  centroid[1] /= static_cast<double>(state.landmarks.size());
  double total = 0.0;
  for (int w = 0; w < config.n_listeners; ++w)
    total -= dist(state.agents[static_cast<std::size_t>(w)].pos, centroid);
  return total / config.n_listeners;
}

std::vector<double> observe(const ScenarioConfig& config, const WorldState& state,
                            int agent, std::span<const double> last_message) {
  require(agent >= 0 && agent < config.n_agents(), "observe: agent index out of range");
  const EntityState& self = state.agents[static_cast<std::size_t>(agent)];
  std::vector<double> obs;
  obs.reserve(static_cast<std::size_t>(config.observation_dim(agent)));

  if (comm_family(config)) {
    if (config.is_speaker(agent)) {
      // The speaker sees nothing but what each listener needs: the colour
      // of that listener's target. It cannot see the listeners themselves.
      for (int w = 0; w < config.n_listeners; ++w) {
        const int target = state.listener_target[static_cast<std::size_t>(w)];
        const auto& colour = config.palette[static_cast<std::size_t>(target)];
        obs.insert(obs.end(), colour.begin(), colour.end());
      }
    } else {
      obs.push_back(self.vel[0]);
      obs.push_back(self.vel[1]);
      for (const Landmark& lm : state.landmarks) {
        obs.push_back(lm.pos[0] - self.pos[0]);
        obs.push_back(lm.pos[1] - self.pos[1]);
      }
      if (config.speaker_present) {
        const int block = config.goal_dim();
        for (int k = 0; k < block; ++k) {
          const std::size_t idx = static_cast<std::size_t>(agent * block + k);
          obs.push_back(idx < last_message.size() ? last_message[idx] : 0.0);
        }
      }
    }
    return obs;
  }

  // Coordination family: everyone sees its own velocity, relative landmark
  // positions, and the other agents' relative positions and velocities.
  obs.push_back(self.vel[0]);
  obs.push_back(self.vel[1]);
  for (const Landmark& lm : state.landmarks) {
    obs.push_back(lm.pos[0] - self.pos[0]);
    obs.push_back(lm.pos[1] - self.pos[1]);
  }
  if (config.is_speaker(agent)) {
    // Only the speaker sees the colours, which is what marks the targets.
    for (const Landmark& lm : state.landmarks)
      obs.insert(obs.end(), lm.colour.begin(), lm.colour.end());
  }
  for (int other = 0; other < config.n_agents(); ++other) {
    if (other == agent) continue;
    const EntityState& o = state.agents[static_cast<std::size_t>(other)];
    obs.push_back(o.pos[0] - self.pos[0]);
    obs.push_back(o.pos[1] - self.pos[1]);
  }
  for (int other = 0; other < config.n_agents(); ++other) {
    if (other == agent) continue;
    const EntityState& o = state.agents[static_cast<std::size_t>(other)];
    obs.push_back(o.vel[0]);
    obs.push_back(o.vel[1]);
  }
  if (!config.is_speaker(agent)) {
    const int block = config.goal_dim();
    for (int k = 0; k < block; ++k) {
      const std::size_t idx = static_cast<std::size_t>(agent * block + k);
      obs.push_back(idx < last_message.size() ? last_message[idx] : 0.0);
    }
  }
  return obs;
}

int targets_covered(const ScenarioConfig& config, const WorldState& state) {
  const double reach = config.agent_radius + config.landmark_radius;
  if (comm_family(config)) {
    int covered = 0;
    for (int w = 0; w < config.n_listeners; ++w) {
      const int target = state.listener_target[static_cast<std::size_t>(w)];
      if (dist(state.agents[static_cast<std::size_t>(w)].pos,
               state.landmarks[static_cast<std::size_t>(target)].pos) < reach)
        covered += 1;
    }
    return covered;
  }
  int covered = 0;
  for (const Landmark& lm : state.landmarks) {
    if (!lm.is_target) continue;
    for (int i = 0; i < config.n_agents(); ++i) {
      if (!config.agent_mobile(i)) continue;
      if (dist(state.agents[static_cast<std::size_t>(i)].pos, lm.pos) < reach) {
        covered += 1;
        break;
      }
    }
  }
  return covered;
}

}  // namespace fmh::env
