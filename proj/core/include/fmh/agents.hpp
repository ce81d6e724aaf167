#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fmh/mlp.hpp"
#include "fmh/replay.hpp"
#include "fmh/scenario.hpp"

namespace fmh::agents {

enum class Algorithm { kFmh, kMaddpg, kDdpg };
std::string to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& name);

struct HyperParams {
  double gamma = 0.75;
  double tau = 0.01;
  double lr = 1e-3;
  std::size_t buffer_capacity = 10'000'000;
  int update_interval = 100;  // environment steps between update rounds
  int batch_size = 1024;
  bool batch_episodes = false;  // sample whole episodes instead of transitions
  int hidden_units = 256;       // two hidden layers of this width everywhere
  int epoch_episodes = 1000;
  int pretrain_epochs = 10;  // workers learn, the manager acts but does not update
  int comm_repeat = 8;       // steps each managerial goal is held
  double exploration_sigma = 0.1;
  double epsilon_final = 0.05;

  void validate() const;
};

/// Linear goal-exploration schedule: 1 at epoch 0 down to epsilon_final at
/// the end of pretraining plus ten epochs, constant afterwards.
double goal_epsilon(const HyperParams& hp, int epoch);

/// Worker/manager learning gates per epoch: workers always learn, the
/// manager only after pretraining. (It still acts and buffers experience.)
struct TrainGate {
  bool workers = true;
  bool manager = true;
};
TrainGate pretrain_gate(int epoch, const HyperParams& hp);

/// Shape of one agent's action head on top of a raw actor output:
/// [force (tanh-squashed) | goal logit blocks (argmax to one-hot) |
/// raw message (identity)]. A feudal speaker has goal blocks; a baseline
/// speaker emits the raw message vector instead.
struct ActionHead {
  int force_dim = 0;
  int goal_blocks = 0;
  int goal_dim = 0;
  int raw_message_dim = 0;

  int net_dim() const { return force_dim + goal_blocks * goal_dim + raw_message_dim; }
  bool discrete_goals() const { return goal_blocks > 0; }
};
ActionHead action_head(const env::ScenarioConfig& config, int agent, Algorithm algorithm);

/// Actor/critic pair with target copies and their optimiser states. Targets
/// start equal to the live networks.
struct PolicyBundle {
  num::MlpParams actor;
  num::MlpParams critic;
  num::MlpParams actor_target;
  num::MlpParams critic_target;
  num::AdamState actor_opt;
  num::AdamState critic_opt;
};
PolicyBundle make_bundle(int obs_dim, int act_dim, int critic_in_dim,
                         const HyperParams& hp, std::mt19937_64& init_rng);

/// One executed action: the flat stored form (what the critic trains on)
/// plus the graded goal picks for feudal speakers.
struct ActResult {
  std::vector<double> stored;  // length head.net_dim()
  std::vector<int> goals;      // one landmark index per goal block
};

/// Deterministic policy with optional exploration: Gaussian noise with
/// `sigma` on the squashed force and raw message, epsilon-uniform draws on
/// goal blocks. explore=false is the greedy policy used for evaluation and
/// target actions.
ActResult act(const num::MlpParams& actor, const ActionHead& head,
              std::span<const double> obs, bool explore, double sigma, double epsilon,
              std::mt19937_64& rng);

/// Greedy head transform applied to a batch of raw actor outputs in place:
/// tanh on force columns, per-block argmax one-hot on goal columns.
void greedy_head_batch(const ActionHead& head, num::Matrix& raw);

/// Batch of greedy target actions: actor_target forward plus greedy head.
void target_actions(const PolicyBundle& bundle, const ActionHead& head,
                    const num::Matrix& next_obs, num::Matrix& out);

struct UpdateStats {
  double critic_loss = 0.0;
  double actor_objective = 0.0;  // batch-mean critic score before the step
};

/// One Adam step on the mean squared Bellman error
/// y = r + gamma * (1-done) * Q_target(next_critic_in). `critic_in` is
/// [obs|action] for the decentralised case and the joint concatenation for
/// centralised critics; the caller builds both it and the target input.
double critic_update(PolicyBundle& bundle, const num::Matrix& critic_in,
                     const num::Matrix& next_critic_in, const std::vector<double>& rewards,
                     const std::vector<double>& done, const HyperParams& hp);

/// One Adam ascent step on the batch-mean critic value with the action
/// taken from the live actor. The critic input is assembled by `place`,
/// which writes each row's relaxed action into the prebuilt critic input
/// matrix at the agent's action offset; gradients flow back through the
/// tanh force head and a softmax relaxation of the goal blocks.
double actor_update(PolicyBundle& bundle, const ActionHead& head,
                    const num::Matrix& obs, num::Matrix& critic_in, int action_offset);

/// Soft-update both target networks toward the live ones.
void update_targets(PolicyBundle& bundle, const HyperParams& hp);

/// Softmax per goal block written onto raw actor outputs (force columns
/// tanh-squashed, message columns untouched); used by the actor update.
void relaxed_head_batch(const ActionHead& head, num::Matrix& raw);

}  // namespace fmh::agents
