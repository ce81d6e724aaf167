#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fmh/metrics.hpp"
#include "fmh/trainer.hpp"

namespace fmh::harness {

/// One full experiment: the trainer configuration replicated across seeds,
/// trained for `epochs` epochs of `hp.epoch_episodes` episodes each, with
/// metrics and checkpoints written under `out_dir`.
struct ExperimentConfig {
  agents::TrainerConfig trainer;  // run_seed is overridden per seed below
  int epochs = 100;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::filesystem::path out_dir;
  int checkpoint_interval = 10;  // epochs between rolling checkpoints
  bool force = false;            // rerun even when finished output exists
  std::string preset = "desk";   // scale label recorded in the sidecar
  std::string code_hash = "unhashed";

  void validate() const;
};

struct SeedSeries {
  std::uint64_t seed = 0;
  std::vector<metrics::EpochMetrics> epochs;
};

struct ExperimentResult {
  std::vector<SeedSeries> seeds;
  bool reused = false;  // finished output was loaded instead of retrained
  std::filesystem::path metrics_csv;
  std::filesystem::path sidecar_json;

  /// Final-epoch mean task return across seeds — the headline number.
  double final_task_return() const;
  /// Per-epoch task return averaged across seeds.
  std::vector<double> mean_task_curve() const;
};

/// Train every seed sequentially (each seed fully deterministic and
/// independent), appending one CSV row per finished epoch so partial runs
/// survive interruption; a finished experiment with an identical
/// configuration is loaded from disk instead of rerun unless forced.
/// Interrupted seeds resume from their newest checkpoint.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Pure evaluation of checkpointed policies: no learning, no exploration.
/// The evaluation scenario may differ from the training one as long as
/// network shapes match (banded spawns, off-screen speaker, and so on).
std::vector<metrics::EpochMetrics> evaluate_policies(
    const agents::TrainerConfig& eval_config, std::istream& checkpoint, int epochs,
    int episodes_per_epoch, std::vector<agents::TrajectoryRow>* trajectories = nullptr);

/// The scripted centroid chaser run through the same evaluation shape.
std::vector<metrics::EpochMetrics> evaluate_scripted_com(
    const env::ScenarioConfig& scenario, std::uint64_t run_seed, int epochs,
    int episodes_per_epoch, double pursuit_gain = 1.4, double brake_gain = 0.6);

/// Scale applied uniformly to every grid cell.
struct GridScale {
  int epochs = 40;
  int epoch_episodes = 150;
  std::vector<std::uint64_t> seeds{1};
  std::string preset = "smoke";
};

/// One line of the grid summary. `final_value` is the final mean task
/// return for trained cells, the mean return for the scripted baseline,
/// and the evaluated metric itself for the two post-training evaluations.
struct GridCellResult {
  std::string cell;
  std::string algorithm;
  double final_value = 0.0;
  std::string convergence;  // epoch number, "none", or "n/a"
};

/// The full comparison: every (listeners, landmarks) speaker task under all
/// three learners plus the scripted baseline, the coordination family
/// (fixed speaker, mobile speaker, heavy/light team), and the two
/// post-training evaluations (off-screen-speaker coverage, far-target
/// assignment on banded spawns). Results land under
/// `out_root/<cell>/<algorithm>/`; a summary table is written to
/// `out_root/summary.csv` and returned. Finished cells are reused.
std::vector<GridCellResult> run_grid(
    const std::filesystem::path& out_root, const GridScale& scale, bool force,
    const std::string& code_hash,
    const std::function<void(const std::string&)>& on_start = {});

// ---- file formats (shared by the CLI and tests) ----

std::string metrics_csv_header();
std::string metrics_csv_row(std::uint64_t seed, int epoch, const metrics::EpochMetrics& m);
std::vector<SeedSeries> read_metrics_csv(const std::filesystem::path& path);

void write_trajectory_csv(std::ostream& out,
                          const std::vector<agents::TrajectoryRow>& rows);

/// Canonical JSON echo of the configuration and its content hash; the hash
/// decides whether an existing output directory already answers this exact
/// experiment.
std::string experiment_config_json(const ExperimentConfig& config);
std::string experiment_config_hash(const ExperimentConfig& config);

}  // namespace fmh::harness
