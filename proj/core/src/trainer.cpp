#include "fmh/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace fmh::agents {

using fmh::num::Matrix;
using fmh::num::require;

namespace {

// Row-wise [left | right] into `out`.
void hcat(const Matrix& left, const Matrix& right, Matrix& out) {
  require(left.rows == right.rows, "hcat: row mismatch");
  const int cols = left.cols + right.cols;
  if (out.rows != left.rows || out.cols != cols) out = Matrix(left.rows, cols);
  for (int r = 0; r < left.rows; ++r) {
    std::copy(left.row(r).begin(), left.row(r).end(), out.row(r).begin());
    std::copy(right.row(r).begin(), right.row(r).end(), out.row(r).begin() + left.cols);
  }
}

void copy_cols(const Matrix& src, int col0, int width, Matrix& out) {
  if (out.rows != src.rows || out.cols != width) out = Matrix(src.rows, width);
  for (int r = 0; r < src.rows; ++r) {
    const auto row = src.row(r);
    std::copy(row.begin() + col0, row.begin() + col0 + width, out.row(r).begin());
  }
}

void paste_cols(const Matrix& src, Matrix& dst, int col0) {
  require(src.rows == dst.rows && col0 + src.cols <= dst.cols, "paste_cols: shape");
  for (int r = 0; r < src.rows; ++r) {
    const auto row = src.row(r);
    std::copy(row.begin(), row.end(), dst.row(r).begin() + col0);
  }
}

// ---- binary checkpoint plumbing ----

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  require(in.good(), "checkpoint: truncated stream");
  return v;
}

void write_doubles(std::ostream& out, const std::vector<double>& v) {
  write_u64(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_doubles(std::istream& in, std::vector<double>& v) {
  v.resize(read_u64(in));
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
  require(in.good(), "checkpoint: truncated stream");
}

void write_string(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  std::string s(read_u64(in), '\0');
  in.read(s.data(), static_cast<std::streamsize>(s.size()));
  require(in.good(), "checkpoint: truncated stream");
  return s;
}

void write_mlp(std::ostream& out, const num::MlpParams& net) {
  write_u64(out, net.layers.size());
  for (const num::Layer& layer : net.layers) {
    write_u64(out, static_cast<std::uint64_t>(layer.weight.rows));
    write_u64(out, static_cast<std::uint64_t>(layer.weight.cols));
    write_doubles(out, layer.weight.data);
    write_doubles(out, layer.bias);
  }
}

void read_mlp(std::istream& in, num::MlpParams& net) {
  const std::size_t n = read_u64(in);
  require(n == net.layers.size(), "checkpoint: network layer count mismatch");
  for (num::Layer& layer : net.layers) {
    const int rows = static_cast<int>(read_u64(in));
    const int cols = static_cast<int>(read_u64(in));
    require(rows == layer.weight.rows && cols == layer.weight.cols,
            "checkpoint: network shape mismatch");
    read_doubles(in, layer.weight.data);
    read_doubles(in, layer.bias);
    require(layer.weight.data.size() == static_cast<std::size_t>(rows) * cols,
            "checkpoint: weight payload mismatch");
  }
}

void write_adam(std::ostream& out, const num::AdamState& state) {
  write_u64(out, static_cast<std::uint64_t>(state.step));
  for (const num::Layer& l : state.m) {
    write_doubles(out, l.weight.data);
    write_doubles(out, l.bias);
  }
  for (const num::Layer& l : state.v) {
    write_doubles(out, l.weight.data);
    write_doubles(out, l.bias);
  }
}

void read_adam(std::istream& in, num::AdamState& state) {
  state.step = static_cast<long>(read_u64(in));
  for (num::Layer& l : state.m) {
    read_doubles(in, l.weight.data);
    read_doubles(in, l.bias);
  }
  for (num::Layer& l : state.v) {
    read_doubles(in, l.weight.data);
    read_doubles(in, l.bias);
  }
}

void write_rng(std::ostream& out, const std::mt19937_64& rng) {
  std::ostringstream text;
  text << rng;
  write_string(out, text.str());
}

void read_rng(std::istream& in, std::mt19937_64& rng) {
  std::istringstream text(read_string(in));
  text >> rng;
  require(!text.fail(), "checkpoint: bad RNG state");
}

}  // namespace

void TrainerConfig::validate() const {
  scenario.validate();
  hp.validate();
  if (algorithm == Algorithm::kFmh) {
    require(scenario.speaker_present, "feudal training needs a goal-setting speaker");
  }
  require(!(algorithm == Algorithm::kMaddpg && share_workers),
          "parameter sharing is only supported for decentralised training");
}

Trainer::Trainer(const TrainerConfig& config) : config_(config) {
  config_.validate();
  const env::ScenarioConfig& sc = config_.scenario;
  const HyperParams& hp = config_.hp;
  const int n = sc.n_agents();

  heads_.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) heads_.push_back(action_head(sc, i, config_.algorithm));

  joint_obs_offset_.resize(static_cast<std::size_t>(n));
  joint_act_offset_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    joint_obs_offset_[static_cast<std::size_t>(i)] = joint_obs_dim_;
    joint_act_offset_[static_cast<std::size_t>(i)] = joint_act_dim_;
    joint_obs_dim_ += sc.observation_dim(i);
    joint_act_dim_ += heads_[static_cast<std::size_t>(i)].net_dim();
  }

  // Bundle assignment: one per agent, except shared workers which all map
  // onto listener 0's bundle (the experience donor).
  bundle_of_.resize(static_cast<std::size_t>(n));
  std::vector<int> owners;
  for (int i = 0; i < n; ++i) {
    const bool shared_member =
        config_.share_workers && !sc.is_speaker(i) && i > 0;
    if (shared_member) {
      require(sc.observation_dim(i) == sc.observation_dim(0) &&
                  heads_[static_cast<std::size_t>(i)].net_dim() ==
                      heads_[0].net_dim(),
              "sharing: listeners must have identical spaces");
      bundle_of_[static_cast<std::size_t>(i)] = 0;
      continue;
    }
    bundle_of_[static_cast<std::size_t>(i)] = static_cast<int>(owners.size());
    owners.push_back(i);
  }

  const bool centralised = config_.algorithm == Algorithm::kMaddpg;
  for (int owner : owners) {
    BundleSlot slot;
    slot.owner_agent = owner;
    const int obs_dim = sc.observation_dim(owner);
    const int act_dim = heads_[static_cast<std::size_t>(owner)].net_dim();
    const int critic_in =
        centralised ? joint_obs_dim_ + joint_act_dim_ : obs_dim + act_dim;
    std::mt19937_64 init_rng =
        num::make_stream(config_.run_seed, "init", static_cast<std::uint64_t>(owner));
    slot.bundle = make_bundle(obs_dim, act_dim, critic_in, hp, init_rng);
    slot.sample_rng =
        num::make_stream(config_.run_seed, "sample", static_cast<std::uint64_t>(owner));
    if (!centralised) {
      slot.buffer = std::make_unique<ReplayBuffer>(hp.buffer_capacity, obs_dim, act_dim,
                                                   1, sc.episode_len);
      if (config_.planned_steps > 0) slot.buffer->reserve_rows(config_.planned_steps);
    }
    bundles_.push_back(std::move(slot));
  }
  if (centralised) {
    joint_buffer_ = std::make_unique<ReplayBuffer>(hp.buffer_capacity, joint_obs_dim_,
                                                   joint_act_dim_, n, sc.episode_len);
    if (config_.planned_steps > 0) joint_buffer_->reserve_rows(config_.planned_steps);
  }

  noise_rngs_.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    noise_rngs_.push_back(
        num::make_stream(config_.run_seed, "noise", static_cast<std::uint64_t>(i)));
  }
}

EpisodeTrace Trainer::run_episode(int epoch, bool learn, bool explore,
                                  std::vector<TrajectoryRow>* trajectory) {
  const env::ScenarioConfig& sc = config_.scenario;
  const HyperParams& hp = config_.hp;
  const int n = sc.n_agents();
  const bool feudal = config_.algorithm == Algorithm::kFmh;
  const int sp = sc.speaker_present ? sc.speaker_index() : -1;
  const double epsilon = feudal ? goal_epsilon(hp, epoch) : 0.0;

  const std::uint64_t seed =
      learn ? num::stream_seed(config_.run_seed, "episode", train_episodes_++)
            : num::stream_seed(config_.run_seed, "eval-episode", eval_episodes_++);
  env::WorldState state = env::reset(sc, seed);

  std::vector<std::vector<double>> obs(static_cast<std::size_t>(n));
  std::vector<std::vector<double>> stored(static_cast<std::size_t>(n));
  std::vector<double> last_msg;  // speaker's previous message head, delayed one step
  for (int i = 0; i < n; ++i) obs[static_cast<std::size_t>(i)] = observe(sc, state, i, last_msg);

  std::vector<int> held_goals;
  EpisodeTrace trace;
  trace.true_target = state.listener_target;
  for (std::size_t lm = 0; lm < state.landmarks.size(); ++lm) {
    // Banded spawns place far targets in the upper band; elsewhere there is
    // no meaningful near/far split and the field stays -1.
    if (sc.heterogeneous_mass && state.landmarks[lm].is_target &&
        state.landmarks[lm].pos[1] >= 0.4) {
      trace.far_target = static_cast<int>(lm);
    }
  }

  std::vector<env::AgentAction> env_actions(static_cast<std::size_t>(n));
  std::vector<double> rewards(static_cast<std::size_t>(n), 0.0);

  for (int t = 0; t < sc.episode_len; ++t) {
    // Listeners act every step; the speaker redraws its message only every
    // comm_repeat steps (a mobile speaker still recomputes its force each
    // step and holds just the message head).
    for (int i = 0; i < n; ++i) {
      const ActionHead& head = heads_[static_cast<std::size_t>(i)];
      PolicyBundle& bundle = bundles_[static_cast<std::size_t>(
                                          bundle_of_[static_cast<std::size_t>(i)])].bundle;
      const bool redraw = t % hp.comm_repeat == 0;
      if (i != sp) {
        stored[static_cast<std::size_t>(i)] =
            act(bundle.actor, head, obs[static_cast<std::size_t>(i)], explore,
                hp.exploration_sigma, epsilon, noise_rngs_[static_cast<std::size_t>(i)])
                .stored;
        continue;
      }
      if (sc.agent_mobile(i)) {
        ActResult fresh =
            act(bundle.actor, head, obs[static_cast<std::size_t>(i)], explore,
                hp.exploration_sigma, epsilon, noise_rngs_[static_cast<std::size_t>(i)]);
        if (redraw || stored[static_cast<std::size_t>(i)].empty()) {
          stored[static_cast<std::size_t>(i)] = fresh.stored;
          held_goals = fresh.goals;
        } else {
          std::copy(fresh.stored.begin(), fresh.stored.begin() + head.force_dim,
                    stored[static_cast<std::size_t>(i)].begin());
        }
      } else if (redraw) {
        ActResult fresh =
            act(bundle.actor, head, obs[static_cast<std::size_t>(i)], explore,
                hp.exploration_sigma, epsilon, noise_rngs_[static_cast<std::size_t>(i)]);
        stored[static_cast<std::size_t>(i)] = fresh.stored;
        held_goals = fresh.goals;
      }
    }

    for (int i = 0; i < n; ++i) {
      const ActionHead& head = heads_[static_cast<std::size_t>(i)];
      const std::vector<double>& flat = stored[static_cast<std::size_t>(i)];
      env::AgentAction& action = env_actions[static_cast<std::size_t>(i)];
      action.force.assign(flat.begin(), flat.begin() + head.force_dim);
      action.message.assign(flat.begin() + head.force_dim, flat.end());
    }
    const env::StepResult result = env::step(sc, state, env_actions);
    const int pairs = static_cast<int>(result.collisions.size());
    trace.collision_events += pairs;

    const double task = env::task_reward(sc, state);
    double penalty_sum = 0.0;
    for (int c : result.collision_counts) penalty_sum -= static_cast<double>(c);
    trace.task_return += task + penalty_sum;

    if (feudal) {
      double worker_sum = 0.0;
      for (int w = 0; w < sc.n_listeners; ++w) {
        rewards[static_cast<std::size_t>(w)] = env::worker_reward(
            sc, state, w, held_goals[static_cast<std::size_t>(w)],
            result.collision_counts[static_cast<std::size_t>(w)]);
        worker_sum += rewards[static_cast<std::size_t>(w)];
      }
      rewards[static_cast<std::size_t>(sp)] = task;  // the manager sees the raw task
      trace.worker_return += worker_sum / sc.n_listeners;
    } else {
      const double shared = task + penalty_sum;
      for (int i = 0; i < n; ++i) rewards[static_cast<std::size_t>(i)] = shared;
    }

    if (sp >= 0) {
      if (feudal) {
        trace.goals_by_step.push_back(held_goals);
        if (t % hp.comm_repeat == 0) trace.goal_draws.push_back(held_goals);
      } else {
        // Discrete proxy for continuous channels: the argmax of each
        // listener's block of the message actually sent this step.
        const ActionHead& head = heads_[static_cast<std::size_t>(sp)];
        const std::vector<double>& flat = stored[static_cast<std::size_t>(sp)];
        std::vector<int> proxy(static_cast<std::size_t>(sc.n_listeners));
        for (int w = 0; w < sc.n_listeners; ++w) {
          const int block = head.force_dim + w * sc.goal_dim();
          int best = 0;
          for (int k = 1; k < sc.goal_dim(); ++k)
            if (flat[static_cast<std::size_t>(block + k)] >
                flat[static_cast<std::size_t>(block + best)])
              best = k;
          proxy[static_cast<std::size_t>(w)] = best;
        }
        trace.goals_by_step.push_back(std::move(proxy));
      }
    }

    if (trajectory != nullptr) {
      for (int i = 0; i < n; ++i) {
        const env::EntityState& body = state.agents[static_cast<std::size_t>(i)];
        TrajectoryRow row;
        row.step = t;
        row.agent = i;
        row.x = body.pos[0];
        row.y = body.pos[1];
        row.vx = body.vel[0];
        row.vy = body.vel[1];
        row.reward = rewards[static_cast<std::size_t>(i)];
        if (i < sc.n_listeners && !trace.goals_by_step.empty())
          row.goal = trace.goals_by_step.back()[static_cast<std::size_t>(i)];
        row.collisions = result.collision_counts[static_cast<std::size_t>(i)];
        trajectory->push_back(row);
      }
    }

    std::vector<double> new_msg;
    if (sp >= 0) {
      const ActionHead& head = heads_[static_cast<std::size_t>(sp)];
      const std::vector<double>& flat = stored[static_cast<std::size_t>(sp)];
      new_msg.assign(flat.begin() + head.force_dim, flat.end());
    }
    const double done = t + 1 == sc.episode_len ? 1.0 : 0.0;

    if (learn) {
      if (config_.algorithm == Algorithm::kMaddpg) {
        std::vector<double> joint_obs, joint_act, joint_next;
        joint_obs.reserve(static_cast<std::size_t>(joint_obs_dim_));
        joint_act.reserve(static_cast<std::size_t>(joint_act_dim_));
        joint_next.reserve(static_cast<std::size_t>(joint_obs_dim_));
        for (int i = 0; i < n; ++i) {
          joint_obs.insert(joint_obs.end(), obs[static_cast<std::size_t>(i)].begin(),
                           obs[static_cast<std::size_t>(i)].end());
          joint_act.insert(joint_act.end(), stored[static_cast<std::size_t>(i)].begin(),
                           stored[static_cast<std::size_t>(i)].end());
        }
        for (int i = 0; i < n; ++i) {
          const std::vector<double> next_i = observe(sc, state, i, new_msg);
          joint_next.insert(joint_next.end(), next_i.begin(), next_i.end());
          obs[static_cast<std::size_t>(i)] = next_i;
        }
        joint_buffer_->append(joint_obs, joint_act, rewards, joint_next, done);
      } else {
        for (BundleSlot& slot : bundles_) {
          const int a = slot.owner_agent;
          const std::vector<double> next_a = observe(sc, state, a, new_msg);
          slot.buffer->append(obs[static_cast<std::size_t>(a)],
                              stored[static_cast<std::size_t>(a)],
                              {&rewards[static_cast<std::size_t>(a)], 1}, next_a, done);
        }
        for (int i = 0; i < n; ++i)
          obs[static_cast<std::size_t>(i)] = observe(sc, state, i, new_msg);
      }
      env_steps_ += 1;
      if (env_steps_ % static_cast<std::uint64_t>(hp.update_interval) == 0)
        update_round(epoch);
    } else {
      for (int i = 0; i < n; ++i)
        obs[static_cast<std::size_t>(i)] = observe(sc, state, i, new_msg);
    }
    last_msg = std::move(new_msg);
  }

  trace.targets_covered_final = env::targets_covered(sc, state);
  return trace;
}

void Trainer::update_round(int epoch) {
  update_rounds_ += 1;
  const TrainGate gate = pretrain_gate(epoch, config_.hp);
  for (std::size_t b = 0; b < bundles_.size(); ++b) {
    BundleSlot& slot = bundles_[b];
    const bool manager =
        config_.algorithm == Algorithm::kFmh && config_.scenario.is_speaker(slot.owner_agent);
    if (manager && !gate.manager) continue;  // pretraining: manager acts, never learns
    if (config_.algorithm == Algorithm::kMaddpg) {
      centralised_update(slot, slot.owner_agent);
    } else {
      decentralised_update(slot, slot.owner_agent);
    }
  }
}

void Trainer::decentralised_update(BundleSlot& slot, int agent) {
  const HyperParams& hp = config_.hp;
  const ActionHead& head = heads_[static_cast<std::size_t>(agent)];
  if (hp.batch_episodes) {
    slot.buffer->sample_episodes(slot.sample_rng, hp.batch_size, batch_rows_);
  } else {
    slot.buffer->sample_transitions(slot.sample_rng, hp.batch_size, batch_rows_);
  }
  slot.buffer->gather_obs(batch_rows_, obs_batch_);
  slot.buffer->gather_actions(batch_rows_, act_batch_);
  slot.buffer->gather_next_obs(batch_rows_, next_batch_);
  slot.buffer->gather_rewards(batch_rows_, 0, reward_batch_);
  slot.buffer->gather_done(batch_rows_, done_batch_);

  hcat(obs_batch_, act_batch_, critic_in_);
  target_actions(slot.bundle, head, next_batch_, target_act_);
  hcat(next_batch_, target_act_, next_in_);
  critic_update(slot.bundle, critic_in_, next_in_, reward_batch_, done_batch_, hp);
  actor_update(slot.bundle, head, obs_batch_, critic_in_, obs_batch_.cols);
  update_targets(slot.bundle, hp);
}

void Trainer::centralised_update(BundleSlot& slot, int agent) {
  const HyperParams& hp = config_.hp;
  if (hp.batch_episodes) {
    joint_buffer_->sample_episodes(slot.sample_rng, hp.batch_size, batch_rows_);
  } else {
    joint_buffer_->sample_transitions(slot.sample_rng, hp.batch_size, batch_rows_);
  }
  joint_buffer_->gather_obs(batch_rows_, obs_batch_);
  joint_buffer_->gather_actions(batch_rows_, act_batch_);
  joint_buffer_->gather_next_obs(batch_rows_, next_batch_);
  joint_buffer_->gather_rewards(batch_rows_, agent, reward_batch_);
  joint_buffer_->gather_done(batch_rows_, done_batch_);

  hcat(obs_batch_, act_batch_, critic_in_);
  // Next joint action: every agent's target actor on its own next slice.
  if (next_in_.rows != next_batch_.rows ||
      next_in_.cols != joint_obs_dim_ + joint_act_dim_) {
    next_in_ = Matrix(next_batch_.rows, joint_obs_dim_ + joint_act_dim_);
  }
  paste_cols(next_batch_, next_in_, 0);
  for (int j = 0; j < config_.scenario.n_agents(); ++j) {
    const int obs_dim = config_.scenario.observation_dim(j);
    copy_cols(next_batch_, joint_obs_offset_[static_cast<std::size_t>(j)], obs_dim,
              next_slice_);
    const PolicyBundle& other =
        bundles_[static_cast<std::size_t>(bundle_of_[static_cast<std::size_t>(j)])].bundle;
    target_actions(other, heads_[static_cast<std::size_t>(j)], next_slice_, target_act_);
    paste_cols(target_act_, next_in_,
               joint_obs_dim_ + joint_act_offset_[static_cast<std::size_t>(j)]);
  }
  critic_update(slot.bundle, critic_in_, next_in_, reward_batch_, done_batch_, hp);

  const int obs_dim = config_.scenario.observation_dim(agent);
  copy_cols(obs_batch_, joint_obs_offset_[static_cast<std::size_t>(agent)], obs_dim,
            obs_slice_);
  actor_update(slot.bundle, heads_[static_cast<std::size_t>(agent)], obs_slice_,
               critic_in_,
               joint_obs_dim_ + joint_act_offset_[static_cast<std::size_t>(agent)]);
  update_targets(slot.bundle, hp);
}

void Trainer::save(std::ostream& out, bool include_buffers) const {
  write_string(out, "fmh-checkpoint-v1");
  write_string(out, env::scenario_to_text(config_.scenario));
  write_string(out, to_string(config_.algorithm));
  write_u64(out, config_.share_workers ? 1 : 0);
  write_u64(out, config_.run_seed);
  write_u64(out, env_steps_);
  write_u64(out, update_rounds_);
  write_u64(out, train_episodes_);
  write_u64(out, eval_episodes_);
  write_u64(out, bundles_.size());
  for (const BundleSlot& slot : bundles_) {
    write_u64(out, static_cast<std::uint64_t>(slot.owner_agent));
    write_mlp(out, slot.bundle.actor);
    write_mlp(out, slot.bundle.critic);
    write_mlp(out, slot.bundle.actor_target);
    write_mlp(out, slot.bundle.critic_target);
    write_adam(out, slot.bundle.actor_opt);
    write_adam(out, slot.bundle.critic_opt);
    write_rng(out, slot.sample_rng);
  }
  write_u64(out, noise_rngs_.size());
  for (const std::mt19937_64& rng : noise_rngs_) write_rng(out, rng);
  write_u64(out, include_buffers ? 1 : 0);
  if (include_buffers) {
    if (joint_buffer_ != nullptr) {
      joint_buffer_->save(out);
    } else {
      for (const BundleSlot& slot : bundles_) slot.buffer->save(out);
    }
  }
}

void Trainer::load(std::istream& in) {
  require(read_string(in) == "fmh-checkpoint-v1", "checkpoint: unknown format");
  require(read_string(in) == env::scenario_to_text(config_.scenario),
          "checkpoint: scenario does not match this trainer");
  require(read_string(in) == to_string(config_.algorithm),
          "checkpoint: algorithm does not match this trainer");
  require((read_u64(in) != 0) == config_.share_workers,
          "checkpoint: sharing flag does not match this trainer");
  require(read_u64(in) == config_.run_seed,
          "checkpoint: run seed does not match this trainer");
  env_steps_ = read_u64(in);
  update_rounds_ = read_u64(in);
  train_episodes_ = read_u64(in);
  eval_episodes_ = read_u64(in);
  require(read_u64(in) == bundles_.size(), "checkpoint: bundle count mismatch");
  for (BundleSlot& slot : bundles_) {
    require(read_u64(in) == static_cast<std::uint64_t>(slot.owner_agent),
            "checkpoint: bundle owner mismatch");
    read_mlp(in, slot.bundle.actor);
    read_mlp(in, slot.bundle.critic);
    read_mlp(in, slot.bundle.actor_target);
    read_mlp(in, slot.bundle.critic_target);
    read_adam(in, slot.bundle.actor_opt);
    read_adam(in, slot.bundle.critic_opt);
    read_rng(in, slot.sample_rng);
  }
  require(read_u64(in) == noise_rngs_.size(), "checkpoint: RNG count mismatch");
  for (std::mt19937_64& rng : noise_rngs_) read_rng(in, rng);
  if (read_u64(in) != 0) {
    if (joint_buffer_ != nullptr) {
      joint_buffer_->load(in);
    } else {
      for (BundleSlot& slot : bundles_) slot.buffer->load(in);
    }
  }
}

void Trainer::load_policies(std::istream& in) {
  require(read_string(in) == "fmh-checkpoint-v1", "checkpoint: unknown format");
  read_string(in);  // training scenario; only network shapes must match here
  require(read_string(in) == to_string(config_.algorithm),
          "checkpoint: algorithm does not match this trainer");
  require((read_u64(in) != 0) == config_.share_workers,
          "checkpoint: sharing flag does not match this trainer");
  read_u64(in);                              // training run seed
  for (int i = 0; i < 4; ++i) read_u64(in);  // counters stay as constructed
  require(read_u64(in) == bundles_.size(), "checkpoint: bundle count mismatch");
  std::mt19937_64 scratch;
  for (BundleSlot& slot : bundles_) {
    require(read_u64(in) == static_cast<std::uint64_t>(slot.owner_agent),
            "checkpoint: bundle owner mismatch");
    read_mlp(in, slot.bundle.actor);
    read_mlp(in, slot.bundle.critic);
    read_mlp(in, slot.bundle.actor_target);
    read_mlp(in, slot.bundle.critic_target);
    read_adam(in, slot.bundle.actor_opt);
    read_adam(in, slot.bundle.critic_opt);
    read_rng(in, scratch);
  }
  require(read_u64(in) == noise_rngs_.size(), "checkpoint: RNG count mismatch");
  for (std::size_t i = 0; i < noise_rngs_.size(); ++i) read_rng(in, scratch);
  if (read_u64(in) != 0) {
    const std::size_t stored_buffers = joint_buffer_ != nullptr ? 1 : bundles_.size();
    std::vector<double> column;
    for (std::size_t b = 0; b < stored_buffers; ++b) {
      for (int i = 0; i < 6; ++i) read_u64(in);
      for (int i = 0; i < 5; ++i) read_doubles(in, column);
    }
  }
}

EpisodeTrace scripted_com_episode(const env::ScenarioConfig& config, std::uint64_t seed,
                                  double pursuit_gain, double brake_gain) {
  env::WorldState state = env::reset(config, seed);
  EpisodeTrace trace;
  trace.true_target = state.listener_target;
  std::vector<env::AgentAction> actions(static_cast<std::size_t>(config.n_agents()));
  for (int t = 0; t < config.episode_len; ++t) {
    std::array<double, 2> centroid{0.0, 0.0};
    for (const env::Landmark& lm : state.landmarks) {
      centroid[0] += lm.pos[0];
      centroid[1] += lm.pos[1];
    }
    centroid[0] /= static_cast<double>(state.landmarks.size());
    centroid[1] /= static_cast<double>(state.landmarks.size());
    for (int i = 0; i < config.n_agents(); ++i) {
      env::AgentAction& action = actions[static_cast<std::size_t>(i)];
      if (!config.agent_mobile(i)) {
        action.force.clear();
        action.message.assign(static_cast<std::size_t>(config.message_dim(i)), 0.0);
        continue;
      }
      const env::EntityState& self = state.agents[static_cast<std::size_t>(i)];
      action.force = {
          std::clamp(pursuit_gain * (centroid[0] - self.pos[0]) - brake_gain * self.vel[0],
                     -1.0, 1.0),
          std::clamp(pursuit_gain * (centroid[1] - self.pos[1]) - brake_gain * self.vel[1],
                     -1.0, 1.0)};
      action.message.assign(static_cast<std::size_t>(config.message_dim(i)), 0.0);
    }
    env::step(config, state, actions);
    trace.task_return += env::task_reward(config, state);
  }
  trace.targets_covered_final = env::targets_covered(config, state);
  return trace;
}

}  // namespace fmh::agents
