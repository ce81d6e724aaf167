#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fmh/scenario.hpp"

namespace fmh::env {

struct EntityState {
  std::array<double, 2> pos{0.0, 0.0};
  std::array<double, 2> vel{0.0, 0.0};
  double mass = 1.0;
  double radius = 0.05;
  bool movable = true;
};

struct Landmark {
  std::array<double, 2> pos{0.0, 0.0};
  std::array<double, 3> colour{0.0, 0.0, 0.0};
  bool is_target = false;
};

/// Full simulator state. Listener targets are landmark indices for the
/// communication family; the coordination family marks targets on the
/// landmarks instead and leaves `listener_target` empty.
struct WorldState {
  std::vector<EntityState> agents;
  std::vector<Landmark> landmarks;
  int t = 0;
  std::vector<int> listener_target;
  std::uint64_t episode_seed = 0;
};

/// One agent's action: a force in [-1,1]^2 for mobile agents (empty
/// otherwise) and a message vector for speakers (empty otherwise).
struct AgentAction {
  std::vector<double> force;
  std::vector<double> message;
};

struct CollisionEvent {
  int a = 0;  // agent indices, a < b
  int b = 0;
  bool operator==(const CollisionEvent&) const = default;
};

/// Collision outcome of one step: the overlapping pairs plus, per agent,
/// the number of pairs it was part of (its -1 penalty multiplier).
struct StepResult {
  std::vector<CollisionEvent> collisions;
  std::vector<int> collision_counts;
};

WorldState reset(const ScenarioConfig& config, std::uint64_t seed);

/// Advance the world one tick: clamp forces, integrate mobile agents
/// (velocity <- (1-damping)*velocity + sensitivity*force/mass*dt, position
/// <- position + velocity*dt), bump t, then detect collisions on the new
/// positions. Rewards are computed separately on the post-step state.
StepResult step(const ScenarioConfig& config, WorldState& state,
                const std::vector<AgentAction>& actions);

/// Environmental reward shared by every baseline agent and used as the
/// manager's objective: mean negative listener-to-target distance for the
/// communication family, summed negative minimum agent-to-target distance
/// for the coordination family (collision penalties are composed on top by
/// the caller, since who bears them depends on the training mode).
double task_reward(const ScenarioConfig& config, const WorldState& state);

/// Negative distance of one worker to its assigned landmark, minus one per
/// collision this worker was involved in this step.
double worker_reward(const ScenarioConfig& config, const WorldState& state, int worker,
                     int goal_landmark, int own_collisions);

/// Mean negative listener distance to the landmark centroid.
double com_reward(const ScenarioConfig& config, const WorldState& state);

/// Flat observation vector for one agent. `last_message` is the speaker's
/// message head from the previous step (empty or zeros at episode start);
/// listeners see only their own goal-sized block of it.
std::vector<double> observe(const ScenarioConfig& config, const WorldState& state,
                            int agent, std::span<const double> last_message);

/// Number of target landmarks with some mobile agent within touching
/// range (agent radius + landmark radius).
int targets_covered(const ScenarioConfig& config, const WorldState& state);

}  // namespace fmh::env
