#pragma once

#include <array>
#include <optional>
#include <vector>

#include "fmh/trainer.hpp"

namespace fmh::metrics {

/// Aggregated measures of one epoch of episodes. Fields that do not apply
/// to a run (worker returns outside feudal training, assignment without a
/// goal-setting speaker) hold NaN rather than a misleading zero.
struct EpochMetrics {
  double task_return = 0.0;
  double worker_return = 0.0;
  double assignment_probability = 0.0;
  std::array<double, 4> entropy{};  // goal-choice entropy per episode quarter
  double far_assignment_probability = 0.0;  // fastest agent on the far target
  double targets_covered = 0.0;
  double collisions = 0.0;
};

/// Fraction of goal draws in one episode that named the drawing listener's
/// true target, averaged over listeners; empty when the trace has no draws
/// or no per-listener targets.
std::optional<double> correct_assignment_probability(const agents::EpisodeTrace& trace);

/// Fraction of goal draws assigning listener 0 (the fastest agent under
/// heterogeneous masses) to the far target; empty without a far target.
std::optional<double> far_assignment_probability(const agents::EpisodeTrace& trace);

/// Shannon entropy (bits) of the goals commanded during each quarter of one
/// episode, pooled over the trace's listeners. A speaker that holds one goal
/// all episode reads zero everywhere; a quarter whose steps spread evenly
/// over L goals reads log2(L). NaN for quarters without any commands.
std::array<double, 4> communication_entropy(const agents::EpisodeTrace& trace,
                                            int goal_count);

/// Streams episode traces and produces the epoch row. Goal-choice entropy is
/// computed per episode (communication_entropy) and averaged across the
/// epoch's episodes, so it measures how much the commanded goal varies
/// within episodes — not how varied the targets were across them.
class EpochAccumulator {
 public:
  EpochAccumulator(int goal_count, int episode_len, bool feudal);

  void add(const agents::EpisodeTrace& trace);
  EpochMetrics finish() const;
  int episodes() const { return episodes_; }

 private:
  int goal_count_;
  int episode_len_;
  bool feudal_;
  int episodes_ = 0;
  double task_sum_ = 0.0;
  double worker_sum_ = 0.0;
  double covered_sum_ = 0.0;
  double collision_sum_ = 0.0;
  double assignment_sum_ = 0.0;
  int assignment_n_ = 0;
  double far_sum_ = 0.0;
  int far_n_ = 0;
  std::array<double, 4> entropy_sum_{};
  std::array<int, 4> entropy_n_{};
};

/// First epoch index whose 5-epoch window mean is within 2% of the final
/// 5-epoch mean and stays within it for every later window; empty when
/// that happens only inside the last 10 epochs (or never). The band is
/// relative to |final mean| since rewards here are negative.
std::optional<int> convergence_epoch(const std::vector<double>& curve);

}  // namespace fmh::metrics
