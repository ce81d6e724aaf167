#include "fmh/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fmh::agents {

using fmh::num::Matrix;
using fmh::num::require;

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kFmh: return "fmh";
    case Algorithm::kMaddpg: return "maddpg";
    case Algorithm::kDdpg: return "ddpg";
  }
  return "ddpg";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "fmh") return Algorithm::kFmh;
  if (name == "maddpg") return Algorithm::kMaddpg;
  if (name == "ddpg") return Algorithm::kDdpg;
  throw std::runtime_error("unknown algorithm: " + name);
}

void HyperParams::validate() const {
  require(gamma >= 0.0 && gamma < 1.0, "hyperparams: gamma must be in [0,1)");
  require(tau >= 0.0 && tau <= 1.0, "hyperparams: tau must be in [0,1]");
  require(lr > 0.0, "hyperparams: learning rate must be positive");
  require(buffer_capacity > 0, "hyperparams: buffer capacity must be positive");
  require(update_interval > 0, "hyperparams: update interval must be positive");
  require(batch_size > 0, "hyperparams: batch size must be positive");
  require(hidden_units > 0, "hyperparams: hidden width must be positive");
  require(epoch_episodes > 0, "hyperparams: epoch episode count must be positive");
  require(pretrain_epochs >= 0, "hyperparams: pretraining epochs cannot be negative");
  require(comm_repeat >= 1, "hyperparams: goal repeat must be at least 1");
  require(exploration_sigma >= 0.0, "hyperparams: exploration sigma cannot be negative");
  require(epsilon_final >= 0.0 && epsilon_final <= 1.0,
          "hyperparams: final epsilon must be in [0,1]");
}

double goal_epsilon(const HyperParams& hp, int epoch) {
  // Reaches the floor ten epochs after pretraining ends.
  const int anneal_epochs = hp.pretrain_epochs + 10;
  if (epoch >= anneal_epochs) return hp.epsilon_final;
  const double frac = static_cast<double>(epoch) / static_cast<double>(anneal_epochs);
  return 1.0 - (1.0 - hp.epsilon_final) * frac;
}

TrainGate pretrain_gate(int epoch, const HyperParams& hp) {
  return {true, epoch >= hp.pretrain_epochs};
}

ActionHead action_head(const env::ScenarioConfig& config, int agent,
                       Algorithm algorithm) {
  ActionHead head;
  head.force_dim = config.force_dim(agent);
  if (config.is_speaker(agent)) {
    if (algorithm == Algorithm::kFmh) {
      head.goal_blocks = config.n_listeners;
      head.goal_dim = config.goal_dim();
    } else {
      head.raw_message_dim = config.message_dim(agent);
    }
  }
  require(head.net_dim() > 0, "action head: agent has no outputs");
  return head;
}

PolicyBundle make_bundle(int obs_dim, int act_dim, int critic_in_dim,
                         const HyperParams& hp, std::mt19937_64& init_rng) {
  PolicyBundle bundle;
  const int h = hp.hidden_units;
  bundle.actor = num::make_mlp({obs_dim, h, h, act_dim},
                               num::Activation::kIdentity, init_rng);
  bundle.critic = num::make_mlp({critic_in_dim, h, h, 1},
                                num::Activation::kIdentity, init_rng);
  bundle.actor_target = bundle.actor;
  bundle.critic_target = bundle.critic;
  bundle.actor_opt = num::make_adam_state(bundle.actor, hp.lr);
  bundle.critic_opt = num::make_adam_state(bundle.critic, hp.lr);
  return bundle;
}

namespace {

int argmax_span(const double* values, int n) {
  int best = 0;
  for (int k = 1; k < n; ++k)
    if (values[k] > values[best]) best = k;
  return best;
}

void softmax_inplace(double* values, int n) {
  double peak = values[0];
  for (int k = 1; k < n; ++k) peak = std::max(peak, values[k]);
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    values[k] = std::exp(values[k] - peak);
    total += values[k];
  }
  for (int k = 0; k < n; ++k) values[k] /= total;
}

}  // namespace

ActResult act(const num::MlpParams& actor, const ActionHead& head,
              std::span<const double> obs, bool explore, double sigma, double epsilon,
              std::mt19937_64& rng) {
  require(static_cast<int>(obs.size()) == actor.input_dim(),
          "act: observation width mismatch");
  std::vector<double> raw = num::mlp_forward(actor, obs);
  require(static_cast<int>(raw.size()) == head.net_dim(),
          "act: actor output width does not match the action head");

  ActResult result;
  result.stored.resize(raw.size());
  // A fresh distribution per call keeps engine consumption deterministic.
  std::normal_distribution<double> noise(0.0, sigma);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  int at = 0;
  for (int d = 0; d < head.force_dim; ++d, ++at) {
    double f = std::tanh(raw[static_cast<std::size_t>(at)]);
    if (explore) f += noise(rng);
    result.stored[static_cast<std::size_t>(at)] = std::clamp(f, -1.0, 1.0);
  }
  for (int b = 0; b < head.goal_blocks; ++b) {
    const double* logits = raw.data() + at;
    int pick;
    if (explore && coin(rng) < epsilon) {
      std::uniform_int_distribution<int> uniform_goal(0, head.goal_dim - 1);
      pick = uniform_goal(rng);
    } else {
      pick = argmax_span(logits, head.goal_dim);
    }
    result.goals.push_back(pick);
    for (int k = 0; k < head.goal_dim; ++k, ++at)
      result.stored[static_cast<std::size_t>(at)] = k == pick ? 1.0 : 0.0;
  }
  for (int d = 0; d < head.raw_message_dim; ++d, ++at) {
    double m = raw[static_cast<std::size_t>(at)];
    if (explore) m += noise(rng);
    result.stored[static_cast<std::size_t>(at)] = m;
  }
  return result;
}

void greedy_head_batch(const ActionHead& head, Matrix& raw) {
  require(raw.cols == head.net_dim(), "head transform: width mismatch");
  for (int r = 0; r < raw.rows; ++r) {
    double* row = raw.data.data() + static_cast<std::size_t>(r) * raw.cols;
    for (int d = 0; d < head.force_dim; ++d) row[d] = std::tanh(row[d]);
    int at = head.force_dim;
    for (int b = 0; b < head.goal_blocks; ++b, at += head.goal_dim) {
      const int pick = argmax_span(row + at, head.goal_dim);
      for (int k = 0; k < head.goal_dim; ++k) row[at + k] = k == pick ? 1.0 : 0.0;
    }
  }
}

void relaxed_head_batch(const ActionHead& head, Matrix& raw) {
  require(raw.cols == head.net_dim(), "head transform: width mismatch");
  for (int r = 0; r < raw.rows; ++r) {
    double* row = raw.data.data() + static_cast<std::size_t>(r) * raw.cols;
    for (int d = 0; d < head.force_dim; ++d) row[d] = std::tanh(row[d]);
    int at = head.force_dim;
    for (int b = 0; b < head.goal_blocks; ++b, at += head.goal_dim)
      softmax_inplace(row + at, head.goal_dim);
  }
}

void target_actions(const PolicyBundle& bundle, const ActionHead& head,
                    const Matrix& next_obs, Matrix& out) {
  out = num::mlp_forward(bundle.actor_target, next_obs);
  greedy_head_batch(head, out);
}

double critic_update(PolicyBundle& bundle, const Matrix& critic_in,
                     const Matrix& next_critic_in, const std::vector<double>& rewards,
                     const std::vector<double>& done, const HyperParams& hp) {
  const int batch = critic_in.rows;
  require(next_critic_in.rows == batch && static_cast<int>(rewards.size()) == batch &&
              static_cast<int>(done.size()) == batch,
          "critic update: batch size mismatch");

  const Matrix next_q = num::mlp_forward(bundle.critic_target, next_critic_in);
  num::ForwardTrace trace;
  const Matrix q = num::mlp_forward(bundle.critic, critic_in, &trace);

  Matrix upstream(batch, 1);
  double loss = 0.0;
  const double inv = 1.0 / static_cast<double>(batch);
  for (int r = 0; r < batch; ++r) {
    const double target = rewards[static_cast<std::size_t>(r)] +
                          hp.gamma * (1.0 - done[static_cast<std::size_t>(r)]) *
                              next_q.data[static_cast<std::size_t>(r)];
    const double delta = q.data[static_cast<std::size_t>(r)] - target;
    loss += delta * delta * inv;
    upstream.data[static_cast<std::size_t>(r)] = 2.0 * delta * inv;
  }
  require(std::isfinite(loss), "critic update: non-finite Bellman loss");

  num::BatchGradients grads =
      num::mlp_backward(bundle.critic, trace, upstream, {true, false});
  num::adam_step(bundle.critic, grads.layers, bundle.critic_opt);
  return loss;
}

double actor_update(PolicyBundle& bundle, const ActionHead& head, const Matrix& obs,
                    Matrix& critic_in, int action_offset) {
  const int batch = obs.rows;
  require(critic_in.rows == batch, "actor update: batch size mismatch");
  require(action_offset >= 0 && action_offset + head.net_dim() <= critic_in.cols,
          "actor update: action slice out of range");

  num::ForwardTrace actor_trace;
  const Matrix raw = num::mlp_forward(bundle.actor, obs, &actor_trace);
  Matrix relaxed = raw;
  relaxed_head_batch(head, relaxed);
  for (int r = 0; r < batch; ++r) {
    const double* src = relaxed.data.data() + static_cast<std::size_t>(r) * relaxed.cols;
    double* dst = critic_in.data.data() + static_cast<std::size_t>(r) * critic_in.cols +
                  action_offset;
    std::copy(src, src + head.net_dim(), dst);
  }

  num::ForwardTrace critic_trace;
  const Matrix q = num::mlp_forward(bundle.critic, critic_in, &critic_trace);
  double objective = 0.0;
  const double inv = 1.0 / static_cast<double>(batch);
  for (double v : q.data) objective += v * inv;

  // Gradient ascent on mean Q: minimise -mean Q.
  Matrix upstream(batch, 1, -inv);
  num::BatchGradients critic_grads =
      num::mlp_backward(bundle.critic, critic_trace, upstream, {false, true});

  // Chain d(relaxed action) back to the raw actor outputs.
  Matrix d_raw(batch, head.net_dim());
  for (int r = 0; r < batch; ++r) {
    const double* d_in = critic_grads.d_input.data.data() +
                         static_cast<std::size_t>(r) * critic_in.cols + action_offset;
    const double* act_row =
        relaxed.data.data() + static_cast<std::size_t>(r) * relaxed.cols;
    double* out = d_raw.data.data() + static_cast<std::size_t>(r) * d_raw.cols;
    for (int d = 0; d < head.force_dim; ++d) {
      out[d] = d_in[d] * (1.0 - act_row[d] * act_row[d]);  // tanh'
    }
    int at = head.force_dim;
    for (int b = 0; b < head.goal_blocks; ++b, at += head.goal_dim) {
      // Softmax Jacobian: dl_k = s_k (da_k - sum_j da_j s_j).
      double dot = 0.0;
      for (int k = 0; k < head.goal_dim; ++k) dot += d_in[at + k] * act_row[at + k];
      for (int k = 0; k < head.goal_dim; ++k)
        out[at + k] = act_row[at + k] * (d_in[at + k] - dot);
    }
    for (int d = 0; d < head.raw_message_dim; ++d) out[at + d] = d_in[at + d];
  }

  num::BatchGradients actor_grads =
      num::mlp_backward(bundle.actor, actor_trace, d_raw, {true, false});
  num::adam_step(bundle.actor, actor_grads.layers, bundle.actor_opt);
  return objective;
}

void update_targets(PolicyBundle& bundle, const HyperParams& hp) {
  num::soft_update(bundle.actor_target, bundle.actor, hp.tau);
  num::soft_update(bundle.critic_target, bundle.critic, hp.tau);
}

}  // namespace fmh::agents
