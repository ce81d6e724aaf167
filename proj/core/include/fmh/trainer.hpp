#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "fmh/agents.hpp"
#include "fmh/rng.hpp"
#include "fmh/world.hpp"

namespace fmh::agents {

struct TrainerConfig {
  env::ScenarioConfig scenario;
  Algorithm algorithm = Algorithm::kDdpg;
  HyperParams hp;
  bool share_workers = false;  // one bundle for all listeners, donor listener 0
  std::uint64_t run_seed = 0;
  std::size_t planned_steps = 0;  // buffer reservation hint, 0 to skip

  void validate() const;
};

/// Everything one episode produced that metrics care about. `task_return`
/// is the environmental measure reported for every algorithm: summed task
/// reward plus, where collisions exist, the summed per-agent penalties.
struct EpisodeTrace {
  double task_return = 0.0;
  double worker_return = 0.0;  // feudal runs: mean per-worker return
  int targets_covered_final = 0;
  int collision_events = 0;  // overlapping pairs summed over the episode
  std::vector<int> true_target;                 // per listener, comm family
  int far_target = -1;  // index of the far-band target under banded spawns
  std::vector<std::vector<int>> goals_by_step;  // [step][listener]
  std::vector<std::vector<int>> goal_draws;     // [draw][listener], feudal runs
};

/// One (step, agent) sample of an episode for trajectory dumps; positions
/// and velocities are post-step, reward is the agent's routed reward.
struct TrajectoryRow {
  int step = 0;
  int agent = 0;
  double x = 0.0, y = 0.0, vx = 0.0, vy = 0.0;
  double reward = 0.0;
  int goal = -1;       // current goal/message argmax for listeners, else -1
  int collisions = 0;  // pairs this agent was part of this step
};

/// Owns the policy bundles, replay storage and RNG streams of one training
/// run and advances it one episode at a time. The same rollout/update code
/// serves all three algorithms; what differs is critic input assembly and
/// reward routing.
class Trainer {
 public:
  explicit Trainer(const TrainerConfig& config);

  EpisodeTrace run_episode(int epoch, bool learn, bool explore,
                           std::vector<TrajectoryRow>* trajectory = nullptr);

  const TrainerConfig& config() const { return config_; }
  int n_bundles() const { return static_cast<int>(bundles_.size()); }
  PolicyBundle& bundle(int b) { return bundles_[static_cast<std::size_t>(b)].bundle; }
  const PolicyBundle& bundle(int b) const {
    return bundles_[static_cast<std::size_t>(b)].bundle;
  }
  const ReplayBuffer* buffer(int b) const {
    return bundles_[static_cast<std::size_t>(b)].buffer.get();
  }
  const ReplayBuffer* joint_buffer() const { return joint_buffer_.get(); }
  int bundle_of_agent(int agent) const { return bundle_of_[static_cast<std::size_t>(agent)]; }
  const ActionHead& head(int agent) const { return heads_[static_cast<std::size_t>(agent)]; }
  std::uint64_t env_steps() const { return env_steps_; }
  std::uint64_t update_rounds() const { return update_rounds_; }
  std::uint64_t train_episodes() const { return train_episodes_; }

  /// Binary state dump/restore. With buffers included, a restored trainer
  /// continues bit-identically to one that never stopped; policy-only
  /// checkpoints (include_buffers=false) still evaluate identically.
  void save(std::ostream& out, bool include_buffers) const;
  void load(std::istream& in);

  /// Restore only the networks from a checkpoint, for evaluating trained
  /// policies under a different (shape-compatible) scenario — banded-spawn
  /// or off-screen-speaker evaluations of coordination policies. The
  /// algorithm, bundle layout and network shapes must match; counters,
  /// RNG streams and buffers are left as constructed.
  void load_policies(std::istream& in);

 private:
  struct BundleSlot {
    PolicyBundle bundle;
    int owner_agent = 0;  // the member whose experience is stored
    std::unique_ptr<ReplayBuffer> buffer;  // per-agent storage; null for centralised
    std::mt19937_64 sample_rng;
  };

  void update_round(int epoch);
  void decentralised_update(BundleSlot& slot, int agent);
  void centralised_update(BundleSlot& slot, int agent_index);

  TrainerConfig config_;
  std::vector<ActionHead> heads_;
  std::vector<int> bundle_of_;
  std::vector<BundleSlot> bundles_;
  std::unique_ptr<ReplayBuffer> joint_buffer_;  // centralised runs only
  std::vector<std::mt19937_64> noise_rngs_;     // one per agent
  std::vector<int> joint_obs_offset_, joint_act_offset_;
  int joint_obs_dim_ = 0, joint_act_dim_ = 0;
  std::uint64_t env_steps_ = 0;
  std::uint64_t update_rounds_ = 0;
  std::uint64_t train_episodes_ = 0;
  std::uint64_t eval_episodes_ = 0;

  // Update-round workspaces, reused across rounds to avoid reallocation.
  std::vector<std::size_t> batch_rows_;
  num::Matrix obs_batch_, act_batch_, next_batch_, critic_in_, next_in_, target_act_;
  num::Matrix obs_slice_, next_slice_;  // per-agent columns of joint batches
  std::vector<double> reward_batch_, done_batch_;
};

/// Hand-written centroid-seeking controller evaluated on the same rollout
/// machinery: proportional pursuit of the landmark centroid with velocity
/// damping, forces clamped to the unit box. Used as the scripted baseline.
EpisodeTrace scripted_com_episode(const env::ScenarioConfig& config, std::uint64_t seed,
                                  double pursuit_gain = 1.4, double brake_gain = 0.6);

}  // namespace fmh::agents
