#include "fmh/replay.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

namespace fmh::agents {

using fmh::num::require;

ReplayBuffer::ReplayBuffer(std::size_t capacity, int obs_dim, int act_dim,
                           int reward_dim, int episode_len)
    : capacity_(capacity),
      obs_dim_(obs_dim),
      act_dim_(act_dim),
      reward_dim_(reward_dim),
      episode_len_(episode_len) {
  require(capacity > 0, "replay: capacity must be positive");
  require(obs_dim > 0 && act_dim > 0 && reward_dim > 0 && episode_len > 0,
          "replay: dimensions must be positive");
  // Episode-aligned capacity keeps whole-episode sampling trivially correct
  // under ring wraparound.
  capacity_ -= capacity_ % static_cast<std::size_t>(episode_len);
  require(capacity_ > 0, "replay: capacity smaller than one episode");
}

void ReplayBuffer::reserve_rows(std::size_t rows) {
  const std::size_t n = std::min(rows, capacity_);
  obs_.reserve(n * static_cast<std::size_t>(obs_dim_));
  actions_.reserve(n * static_cast<std::size_t>(act_dim_));
  rewards_.reserve(n * static_cast<std::size_t>(reward_dim_));
  next_obs_.reserve(n * static_cast<std::size_t>(obs_dim_));
  done_.reserve(n);
}

void ReplayBuffer::append(std::span<const double> obs, std::span<const double> action,
                          std::span<const double> rewards,
                          std::span<const double> next_obs, double done) {
  require(obs.size() == static_cast<std::size_t>(obs_dim_) &&
              next_obs.size() == static_cast<std::size_t>(obs_dim_),
          "replay: observation width mismatch");
  require(action.size() == static_cast<std::size_t>(act_dim_),
          "replay: action width mismatch");
  require(rewards.size() == static_cast<std::size_t>(reward_dim_),
          "replay: reward width mismatch");

  const std::size_t row = slot(inserted_);
  if (size_ < capacity_ && row == size_) {
    obs_.insert(obs_.end(), obs.begin(), obs.end());
    actions_.insert(actions_.end(), action.begin(), action.end());
    rewards_.insert(rewards_.end(), rewards.begin(), rewards.end());
    next_obs_.insert(next_obs_.end(), next_obs.begin(), next_obs.end());
    done_.push_back(done);
    size_ += 1;
  } else {
    std::copy(obs.begin(), obs.end(),
              obs_.begin() + static_cast<std::ptrdiff_t>(row * obs.size()));
    std::copy(action.begin(), action.end(),
              actions_.begin() + static_cast<std::ptrdiff_t>(row * action.size()));
    std::copy(rewards.begin(), rewards.end(),
              rewards_.begin() + static_cast<std::ptrdiff_t>(row * rewards.size()));
    std::copy(next_obs.begin(), next_obs.end(),
              next_obs_.begin() + static_cast<std::ptrdiff_t>(row * next_obs.size()));
    done_[row] = done;
  }
  inserted_ += 1;
}

void ReplayBuffer::sample_transitions(std::mt19937_64& rng, int batch,
                                      std::vector<std::size_t>& out) const {
  require(size_ > 0, "replay: cannot sample from an empty buffer");
  out.resize(static_cast<std::size_t>(batch));
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  for (auto& idx : out) idx = pick(rng);
}

void ReplayBuffer::sample_episodes(std::mt19937_64& rng, int batch,
                                   std::vector<std::size_t>& out) const {
  const std::size_t len = static_cast<std::size_t>(episode_len_);
  const std::size_t episodes = size_ / len;  // partial trailing episode excluded
  require(episodes > 0, "replay: no complete episode stored yet");
  out.clear();
  out.reserve(static_cast<std::size_t>(batch) * len);
  std::uniform_int_distribution<std::size_t> pick(0, episodes - 1);
  for (int b = 0; b < batch; ++b) {
    std::size_t start = pick(rng) * len;
    // When full, rows keep their physical slots; episode alignment holds
    // because capacity is a multiple of the episode length, but the oldest
    // complete episode may start mid-array. Slots are valid either way.
    for (std::size_t k = 0; k < len; ++k) out.push_back(start + k);
  }
}

void ReplayBuffer::gather(const std::vector<double>& column, int dim,
                          std::span<const std::size_t> rows, num::Matrix& out) {
  if (out.rows != static_cast<int>(rows.size()) || out.cols != dim) {
    out = num::Matrix(static_cast<int>(rows.size()), dim);
  }
  const std::size_t width = static_cast<std::size_t>(dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double* src = column.data() + rows[r] * width;
    std::copy(src, src + width, out.data.data() + r * width);
  }
}

void ReplayBuffer::gather_obs(std::span<const std::size_t> rows, num::Matrix& out) const {
  gather(obs_, obs_dim_, rows, out);
}

void ReplayBuffer::gather_actions(std::span<const std::size_t> rows,
                                  num::Matrix& out) const {
  gather(actions_, act_dim_, rows, out);
}

void ReplayBuffer::gather_next_obs(std::span<const std::size_t> rows,
                                   num::Matrix& out) const {
  gather(next_obs_, obs_dim_, rows, out);
}

void ReplayBuffer::gather_rewards(std::span<const std::size_t> rows, int column,
                                  std::vector<double>& out) const {
  require(column >= 0 && column < reward_dim_, "replay: reward column out of range");
  out.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    out[r] = rewards_[rows[r] * static_cast<std::size_t>(reward_dim_) +
                      static_cast<std::size_t>(column)];
}

void ReplayBuffer::gather_done(std::span<const std::size_t> rows,
                               std::vector<double>& out) const {
  out.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) out[r] = done_[rows[r]];
}

std::span<const double> ReplayBuffer::obs_row(std::size_t row) const {
  return {obs_.data() + row * static_cast<std::size_t>(obs_dim_),
          static_cast<std::size_t>(obs_dim_)};
}

std::span<const double> ReplayBuffer::action_row(std::size_t row) const {
  return {actions_.data() + row * static_cast<std::size_t>(act_dim_),
          static_cast<std::size_t>(act_dim_)};
}

namespace {

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  require(in.good(), "replay: truncated stream");
  return v;
}

void write_column(std::ostream& out, const std::vector<double>& column) {
  write_u64(out, column.size());
  out.write(reinterpret_cast<const char*>(column.data()),
            static_cast<std::streamsize>(column.size() * sizeof(double)));
}

void read_column(std::istream& in, std::vector<double>& column) {
  column.resize(read_u64(in));
  in.read(reinterpret_cast<char*>(column.data()),
          static_cast<std::streamsize>(column.size() * sizeof(double)));
  require(in.good(), "replay: truncated stream");
}

}  // namespace

void ReplayBuffer::save(std::ostream& out) const {
  write_u64(out, static_cast<std::uint64_t>(obs_dim_));
  write_u64(out, static_cast<std::uint64_t>(act_dim_));
  write_u64(out, static_cast<std::uint64_t>(reward_dim_));
  write_u64(out, static_cast<std::uint64_t>(episode_len_));
  write_u64(out, size_);
  write_u64(out, inserted_);
  write_column(out, obs_);
  write_column(out, actions_);
  write_column(out, rewards_);
  write_column(out, next_obs_);
  write_column(out, done_);
}

void ReplayBuffer::load(std::istream& in) {
  require(read_u64(in) == static_cast<std::uint64_t>(obs_dim_) &&
              read_u64(in) == static_cast<std::uint64_t>(act_dim_) &&
              read_u64(in) == static_cast<std::uint64_t>(reward_dim_) &&
              read_u64(in) == static_cast<std::uint64_t>(episode_len_),
          "replay: stored dimensions do not match this buffer");
  size_ = read_u64(in);
  inserted_ = read_u64(in);
  require(size_ <= capacity_, "replay: stored rows exceed capacity");
  read_column(in, obs_);
  read_column(in, actions_);
  read_column(in, rewards_);
  read_column(in, next_obs_);
  read_column(in, done_);
  require(obs_.size() == size_ * static_cast<std::size_t>(obs_dim_) &&
              done_.size() == size_,
          "replay: stored payload does not match row count");
}

}  // namespace fmh::agents
