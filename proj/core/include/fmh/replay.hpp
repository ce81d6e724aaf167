#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "fmh/matrix.hpp"

namespace fmh::agents {

/// Ring buffer of transitions in column layout: one flat array per field so
/// batch gathers are cache-friendly copies. A row is (obs, action, rewards,
/// next_obs, done); `reward_dim` is 1 for a per-agent buffer and the agent
/// count for a joint buffer serving centralised critics.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int obs_dim, int act_dim, int reward_dim,
               int episode_len);

  void append(std::span<const double> obs, std::span<const double> action,
              std::span<const double> rewards, std::span<const double> next_obs,
              double done);

  /// Pre-size the columns for a known number of upcoming rows (capped at
  /// capacity) so long runs never pay vector-doubling spikes.
  void reserve_rows(std::size_t rows);

  std::size_t size() const { return size_; }
  std::size_t inserted() const { return inserted_; }
  std::size_t capacity() const { return capacity_; }
  int obs_dim() const { return obs_dim_; }
  int act_dim() const { return act_dim_; }

  /// Uniform independent draws (with replacement) of stored row indices.
  void sample_transitions(std::mt19937_64& rng, int batch,
                          std::vector<std::size_t>& out) const;

  /// Draws of whole stored episodes: `batch` uniform episode picks expanded
  /// to their episode_len consecutive rows. Only complete episodes are
  /// sampled; capacity is forced to a multiple of episode_len so wraparound
  /// never splits an episode.
  void sample_episodes(std::mt19937_64& rng, int batch,
                       std::vector<std::size_t>& out) const;

  void gather_obs(std::span<const std::size_t> rows, num::Matrix& out) const;
  void gather_actions(std::span<const std::size_t> rows, num::Matrix& out) const;
  void gather_next_obs(std::span<const std::size_t> rows, num::Matrix& out) const;
  /// One reward column (per-agent buffers use column 0).
  void gather_rewards(std::span<const std::size_t> rows, int column,
                      std::vector<double>& out) const;
  void gather_done(std::span<const std::size_t> rows, std::vector<double>& out) const;

  /// Direct row access for tests and checkpoint invariants.
  std::span<const double> obs_row(std::size_t row) const;
  std::span<const double> action_row(std::size_t row) const;

  /// Binary round-trip of the stored rows; load requires matching dimensions.
  void save(std::ostream& out) const;
  void load(std::istream& in);

 private:
  std::size_t slot(std::size_t insertion_index) const { return insertion_index % capacity_; }
  static void gather(const std::vector<double>& column, int dim,
                     std::span<const std::size_t> rows, num::Matrix& out);

  std::size_t capacity_;
  int obs_dim_;
  int act_dim_;
  int reward_dim_;
  int episode_len_;
  std::size_t size_ = 0;
  std::size_t inserted_ = 0;
  std::vector<double> obs_;
  std::vector<double> actions_;
  std::vector<double> rewards_;
  std::vector<double> next_obs_;
  std::vector<double> done_;
};

}  // namespace fmh::agents
