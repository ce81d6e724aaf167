#include "fmh/metrics.hpp"

#include <cmath>
#include <limits>

namespace fmh::metrics {

using fmh::num::require;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Quarter of step t in an episode of n steps; boundaries at ceil(q*n/4) so
// a 25-step episode splits 7/6/6/6.
int quarter_of(int t, int n) {
  for (int q = 3; q >= 1; --q) {
    if (t >= (q * n + 3) / 4) return q;
  }
  return 0;
}

double histogram_entropy_bits(const std::vector<long>& counts) {
  long total = 0;
  for (long c : counts) total += c;
  if (total == 0) return kNan;
  double entropy = 0.0;
  for (long c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    entropy -= p * std::log2(p);
  }
  return entropy;
}

}  // namespace

std::optional<double> correct_assignment_probability(const agents::EpisodeTrace& trace) {
  if (trace.goal_draws.empty() || trace.true_target.empty()) return std::nullopt;
  long correct = 0, total = 0;
  for (const std::vector<int>& draw : trace.goal_draws) {
    for (std::size_t w = 0; w < trace.true_target.size(); ++w) {
      require(w < draw.size(), "assignment: draw narrower than listener count");
      correct += draw[w] == trace.true_target[w] ? 1 : 0;
      total += 1;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

std::optional<double> far_assignment_probability(const agents::EpisodeTrace& trace) {
  if (trace.goal_draws.empty() || trace.far_target < 0) return std::nullopt;
  long hits = 0;
  for (const std::vector<int>& draw : trace.goal_draws) {
    require(!draw.empty(), "assignment: empty goal draw");
    hits += draw[0] == trace.far_target ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(trace.goal_draws.size());
}

std::array<double, 4> communication_entropy(const agents::EpisodeTrace& trace,
                                            int goal_count) {
  require(goal_count > 0, "metrics: goal count must be positive");
  std::array<std::vector<long>, 4> counts;
  for (auto& c : counts) c.assign(static_cast<std::size_t>(goal_count), 0);
  const int steps = static_cast<int>(trace.goals_by_step.size());
  for (int t = 0; t < steps; ++t) {
    auto& quarter = counts[static_cast<std::size_t>(quarter_of(t, steps))];
    for (int goal : trace.goals_by_step[static_cast<std::size_t>(t)]) {
      require(goal >= 0 && goal < goal_count, "metrics: goal index out of range");
      quarter[static_cast<std::size_t>(goal)] += 1;
    }
  }
  std::array<double, 4> entropy{};
  for (std::size_t q = 0; q < 4; ++q) entropy[q] = histogram_entropy_bits(counts[q]);
  return entropy;
}

EpochAccumulator::EpochAccumulator(int goal_count, int episode_len, bool feudal)
    : goal_count_(goal_count), episode_len_(episode_len), feudal_(feudal) {
  require(goal_count > 0 && episode_len > 0, "metrics: dimensions must be positive");
}

void EpochAccumulator::add(const agents::EpisodeTrace& trace) {
  episodes_ += 1;
  task_sum_ += trace.task_return;
  worker_sum_ += trace.worker_return;
  covered_sum_ += trace.targets_covered_final;
  collision_sum_ += trace.collision_events;

  if (const auto p = correct_assignment_probability(trace)) {
    assignment_sum_ += *p;
    assignment_n_ += 1;
  }
  if (const auto p = far_assignment_probability(trace)) {
    far_sum_ += *p;
    far_n_ += 1;
  }
  if (!trace.goals_by_step.empty()) {
    require(static_cast<int>(trace.goals_by_step.size()) == episode_len_,
            "metrics: trace length does not match the episode length");
    const std::array<double, 4> entropy = communication_entropy(trace, goal_count_);
    for (std::size_t q = 0; q < 4; ++q) {
      if (std::isnan(entropy[q])) continue;
      entropy_sum_[q] += entropy[q];
      entropy_n_[q] += 1;
    }
  }
}

EpochMetrics EpochAccumulator::finish() const {
  require(episodes_ > 0, "metrics: no episodes accumulated");
  EpochMetrics row;
  const double inv = 1.0 / static_cast<double>(episodes_);
  row.task_return = task_sum_ * inv;
  row.worker_return = feudal_ ? worker_sum_ * inv : kNan;
  row.assignment_probability =
      assignment_n_ > 0 ? assignment_sum_ / assignment_n_ : kNan;
  row.far_assignment_probability = far_n_ > 0 ? far_sum_ / far_n_ : kNan;
  for (std::size_t q = 0; q < 4; ++q)
    row.entropy[q] = entropy_n_[q] > 0 ? entropy_sum_[q] / entropy_n_[q] : kNan;
  row.targets_covered = covered_sum_ * inv;
  row.collisions = collision_sum_ * inv;
  return row;
}

std::optional<int> convergence_epoch(const std::vector<double>& curve) {
  const int n = static_cast<int>(curve.size());
  require(n >= 15, "convergence: curve shorter than fifteen epochs");
  const int window = 5;
  auto window_mean = [&](int start) {
    double sum = 0.0;
    for (int i = 0; i < window; ++i) sum += curve[static_cast<std::size_t>(start + i)];
    return sum / window;
  };
  const double final_mean = window_mean(n - window);
  const double band = 0.02 * std::abs(final_mean);

  // Walk backwards: the answer is the earliest start from which every
  // window stays inside the band.
  int first = -1;
  for (int start = n - window; start >= 0; --start) {
    if (std::abs(window_mean(start) - final_mean) <= band) {
      first = start;
    } else {
      break;
    }
  }
  if (first < 0 || first >= n - 10) return std::nullopt;
  return first;
}

}  // namespace fmh::metrics
