#include "fmh/harness.hpp"

#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "fmh/rng.hpp"

namespace fmh::harness {

namespace fs = std::filesystem;
using fmh::num::require;
using nlohmann::json;

namespace {

// Shortest decimal form that parses back to the exact same double.
std::string format_value(double v) {
  char buf[32];
  const std::to_chars_result r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

// strtod accepts the "nan"/"inf" spellings %.17g produces.
double parse_value(const std::string& field) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  require(end != field.c_str(), "metrics csv: unparseable number: " + field);
  return v;
}

// FNV-1a; the hash only has to distinguish configurations, not resist attack.
std::uint64_t content_hash(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  return fields;
}

json hyperparams_json(const agents::HyperParams& hp) {
  return json{{"gamma", hp.gamma},
              {"tau", hp.tau},
              {"lr", hp.lr},
              {"buffer_capacity", hp.buffer_capacity},
              {"update_interval", hp.update_interval},
              {"batch_size", hp.batch_size},
              {"batch_episodes", hp.batch_episodes},
              {"hidden_units", hp.hidden_units},
              {"epoch_episodes", hp.epoch_episodes},
              {"pretrain_epochs", hp.pretrain_epochs},
              {"comm_repeat", hp.comm_repeat},
              {"exploration_sigma", hp.exploration_sigma},
              {"epsilon_final", hp.epsilon_final}};
}

void save_checkpoint(const agents::Trainer& trainer, const fs::path& path) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), "cannot open checkpoint for writing: " + tmp.string());
    trainer.save(out, true);
    require(out.good(), "checkpoint write failed: " + tmp.string());
  }
  fs::rename(tmp, path);  // atomic replace keeps the old checkpoint on crash
}

void append_row(const fs::path& part, const std::string& row) {
  std::ofstream out(part, std::ios::app);
  require(out.good(), "cannot append to metrics file: " + part.string());
  out << row << '\n';
  require(out.good(), "metrics append failed: " + part.string());
}

void start_part_file(const fs::path& part) {
  std::ofstream out(part, std::ios::trunc);
  require(out.good(), "cannot create metrics file: " + part.string());
  out << metrics_csv_header() << '\n';
}

// Rewrite a part file to its first `rows` data rows (checkpoint older than
// the file: the dropped rows are regenerated deterministically).
void truncate_part_file(const fs::path& part, const SeedSeries& series,
                        std::uint64_t seed, int rows) {
  std::ofstream out(part, std::ios::trunc);
  require(out.good(), "cannot rewrite metrics file: " + part.string());
  out << metrics_csv_header() << '\n';
  for (int e = 0; e < rows; ++e)
    out << metrics_csv_row(seed, e, series.epochs[static_cast<std::size_t>(e)]) << '\n';
}

}  // namespace

void ExperimentConfig::validate() const {
  trainer.validate();
  require(epochs >= 1, "experiment: at least one epoch");
  require(!seeds.empty(), "experiment: seed list must not be empty");
  require(!out_dir.empty(), "experiment: output directory required");
  require(checkpoint_interval >= 0, "experiment: checkpoint interval cannot be negative");
}

double ExperimentResult::final_task_return() const {
  require(!seeds.empty() && !seeds.front().epochs.empty(), "experiment: no results");
  double sum = 0.0;
  for (const SeedSeries& series : seeds) sum += series.epochs.back().task_return;
  return sum / static_cast<double>(seeds.size());
}

std::vector<double> ExperimentResult::mean_task_curve() const {
  require(!seeds.empty() && !seeds.front().epochs.empty(), "experiment: no results");
  const std::size_t epochs = seeds.front().epochs.size();
  std::vector<double> curve(epochs, 0.0);
  for (const SeedSeries& series : seeds) {
    require(series.epochs.size() == epochs, "experiment: ragged seed series");
    for (std::size_t e = 0; e < epochs; ++e)
      curve[e] += series.epochs[e].task_return / static_cast<double>(seeds.size());
  }
  return curve;
}

std::string metrics_csv_header() {
  return "seed,epoch,task_return,worker_return,assignment_prob,entropy_q1,entropy_q2,"
         "entropy_q3,entropy_q4,far_assignment_prob,targets_covered,collisions";
}

std::string metrics_csv_row(std::uint64_t seed, int epoch,
                            const metrics::EpochMetrics& m) {
  std::string row = std::to_string(seed) + "," + std::to_string(epoch);
  for (double v : {m.task_return, m.worker_return, m.assignment_probability,
                   m.entropy[0], m.entropy[1], m.entropy[2], m.entropy[3],
                   m.far_assignment_probability, m.targets_covered, m.collisions})
    row += "," + format_value(v);
  return row;
}

std::vector<SeedSeries> read_metrics_csv(const fs::path& path) {
  std::ifstream in(path);
  require(in.good(), "cannot read metrics file: " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "metrics csv: empty file");
  require(line == metrics_csv_header(), "metrics csv: unexpected header");

  std::vector<SeedSeries> all;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    require(fields.size() == 12, "metrics csv: wrong column count");
    const std::uint64_t seed = std::stoull(fields[0]);
    const int epoch = std::stoi(fields[1]);
    if (all.empty() || all.back().seed != seed) all.push_back({seed, {}});
    require(epoch == static_cast<int>(all.back().epochs.size()),
            "metrics csv: epochs out of order");
    metrics::EpochMetrics m;
    m.task_return = parse_value(fields[2]);
    m.worker_return = parse_value(fields[3]);
    m.assignment_probability = parse_value(fields[4]);
    for (int q = 0; q < 4; ++q)
      m.entropy[static_cast<std::size_t>(q)] = parse_value(fields[5 + static_cast<std::size_t>(q)]);
    m.far_assignment_probability = parse_value(fields[9]);
    m.targets_covered = parse_value(fields[10]);
    m.collisions = parse_value(fields[11]);
    all.back().epochs.push_back(m);
  }
  return all;
}

void write_trajectory_csv(std::ostream& out,
                          const std::vector<agents::TrajectoryRow>& rows) {
  out << "step,agent,x,y,vx,vy,reward,goal,collision\n";
  for (const agents::TrajectoryRow& r : rows) {
    out << r.step << ',' << r.agent << ',' << format_value(r.x) << ','
        << format_value(r.y) << ',' << format_value(r.vx) << ',' << format_value(r.vy)
        << ',' << format_value(r.reward) << ',' << r.goal << ',' << r.collisions
        << '\n';
  }
}

std::string experiment_config_json(const ExperimentConfig& config) {
  json doc;
  doc["scenario"] = env::scenario_to_text(config.trainer.scenario);
  doc["algorithm"] = agents::to_string(config.trainer.algorithm);
  doc["share_workers"] = config.trainer.share_workers;
  doc["hyperparams"] = hyperparams_json(config.trainer.hp);
  doc["epochs"] = config.epochs;
  doc["seeds"] = config.seeds;
  doc["preset"] = config.preset;
  return doc.dump(2);
}

std::string experiment_config_hash(const ExperimentConfig& config) {
  const std::uint64_t h = content_hash(experiment_config_json(config));
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  fs::create_directories(config.out_dir);

  ExperimentResult result;
  result.metrics_csv = config.out_dir / "metrics.csv";
  result.sidecar_json = config.out_dir / "metrics.json";
  const std::string config_hash = experiment_config_hash(config);

  // A finished experiment with this exact configuration is a no-op.
  if (!config.force && fs::exists(result.sidecar_json) && fs::exists(result.metrics_csv)) {
    std::ifstream side(result.sidecar_json);
    json doc = json::parse(side, nullptr, false);
    if (!doc.is_discarded() && doc.value("config_hash", "") == config_hash) {
      std::vector<SeedSeries> stored = read_metrics_csv(result.metrics_csv);
      bool complete = stored.size() == config.seeds.size();
      for (std::size_t s = 0; complete && s < stored.size(); ++s)
        complete = stored[s].seed == config.seeds[s] &&
                   static_cast<int>(stored[s].epochs.size()) == config.epochs;
      if (complete) {
        result.seeds = std::move(stored);
        result.reused = true;
        return result;
      }
    }
  }

  const bool feudal = config.trainer.algorithm == agents::Algorithm::kFmh;
  const int episode_len = config.trainer.scenario.episode_len;
  const int goal_count = config.trainer.scenario.goal_dim();

  for (std::uint64_t seed : config.seeds) {
    const fs::path part = config.out_dir / ("metrics_seed" + std::to_string(seed) + ".csv");
    const fs::path ckpt =
        config.out_dir / ("checkpoint_seed" + std::to_string(seed) + ".bin");

    agents::TrainerConfig tc = config.trainer;
    tc.run_seed = seed;
    tc.planned_steps = static_cast<std::size_t>(config.epochs) *
                       static_cast<std::size_t>(tc.hp.epoch_episodes) *
                       static_cast<std::size_t>(episode_len);

    SeedSeries series{seed, {}};
    int have_rows = 0;
    if (!config.force && fs::exists(part)) {
      try {
        std::vector<SeedSeries> parsed = read_metrics_csv(part);
        if (parsed.size() == 1 && parsed.front().seed == seed &&
            static_cast<int>(parsed.front().epochs.size()) <= config.epochs) {
          series = std::move(parsed.front());
          have_rows = static_cast<int>(series.epochs.size());
        }
      } catch (const std::exception&) {
        have_rows = 0;  // corrupt part file: regenerate from scratch
      }
    }

    agents::Trainer trainer(tc);
    int start_epoch = 0;
    if (have_rows == config.epochs) {
      result.seeds.push_back(std::move(series));
      continue;
    }
    if (!config.force && have_rows > 0 && fs::exists(ckpt)) {
      try {
        std::ifstream in(ckpt, std::ios::binary);
        trainer.load(in);
        const int ep_done = static_cast<int>(
            trainer.train_episodes() / static_cast<std::uint64_t>(tc.hp.epoch_episodes));
        if (ep_done > 0 && ep_done <= have_rows && ep_done < config.epochs) {
          start_epoch = ep_done;
          series.epochs.resize(static_cast<std::size_t>(ep_done));
          truncate_part_file(part, series, seed, ep_done);
        } else {
          trainer = agents::Trainer(tc);  // checkpoint unusable: restart
        }
      } catch (const std::exception&) {
        trainer = agents::Trainer(tc);
      }
    }
    if (start_epoch == 0) {
      series.epochs.clear();
      start_part_file(part);
    }

    for (int epoch = start_epoch; epoch < config.epochs; ++epoch) {
      metrics::EpochAccumulator acc(goal_count, episode_len, feudal);
      for (int e = 0; e < tc.hp.epoch_episodes; ++e)
        acc.add(trainer.run_episode(epoch, true, true));
      const metrics::EpochMetrics row = acc.finish();
      series.epochs.push_back(row);
      append_row(part, metrics_csv_row(seed, epoch, row));
      const bool last = epoch + 1 == config.epochs;
      if (last || (config.checkpoint_interval > 0 &&
                   (epoch + 1) % config.checkpoint_interval == 0)) {
        save_checkpoint(trainer, ckpt);
      }
    }

    {
      const fs::path policy =
          config.out_dir / ("policy_seed" + std::to_string(seed) + ".bin");
      std::ofstream out(policy, std::ios::binary | std::ios::trunc);
      require(out.good(), "cannot write policy checkpoint: " + policy.string());
      trainer.save(out, false);
    }
    result.seeds.push_back(std::move(series));
  }

  // Collector: merge the per-seed parts into one deterministic file.
  {
    std::ofstream merged(result.metrics_csv, std::ios::trunc);
    require(merged.good(), "cannot write merged metrics: " + result.metrics_csv.string());
    merged << metrics_csv_header() << '\n';
    for (const SeedSeries& series : result.seeds)
      for (std::size_t e = 0; e < series.epochs.size(); ++e)
        merged << metrics_csv_row(series.seed, static_cast<int>(e), series.epochs[e])
               << '\n';
  }
  {
    json doc;
    doc["config"] = json::parse(experiment_config_json(config));
    doc["config_hash"] = config_hash;
    doc["code_hash"] = config.code_hash;
    doc["format_version"] = 1;
    doc["notes"] = json::array(
        {"convergence band: |window mean - final mean| <= 0.02 * |final mean|",
         "assignment probability counted per goal draw, not per step",
         "entropy: per-episode quarter entropies averaged across an epoch's episodes"});
    std::ofstream side(result.sidecar_json, std::ios::trunc);
    require(side.good(), "cannot write sidecar: " + result.sidecar_json.string());
    side << doc.dump(2) << '\n';
  }
  return result;
}

std::vector<metrics::EpochMetrics> evaluate_policies(
    const agents::TrainerConfig& eval_config, std::istream& checkpoint, int epochs,
    int episodes_per_epoch, std::vector<agents::TrajectoryRow>* trajectories) {
  require(epochs >= 1 && episodes_per_epoch >= 1, "evaluation: counts must be positive");
  agents::Trainer trainer(eval_config);
  trainer.load_policies(checkpoint);
  const bool feudal = eval_config.algorithm == agents::Algorithm::kFmh;
  std::vector<metrics::EpochMetrics> rows;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    metrics::EpochAccumulator acc(eval_config.scenario.goal_dim(),
                                  eval_config.scenario.episode_len, feudal);
    for (int e = 0; e < episodes_per_epoch; ++e)
      acc.add(trainer.run_episode(epoch, false, false, trajectories));
    rows.push_back(acc.finish());
  }
  return rows;
}

namespace {

std::string describe_convergence(const std::vector<double>& curve) {
  if (curve.size() < 15) return "n/a";
  const std::optional<int> epoch = metrics::convergence_epoch(curve);
  return epoch ? std::to_string(*epoch) : "none";
}

ExperimentConfig grid_cell_config(const GridScale& scale,
                                  const env::ScenarioConfig& scenario,
                                  agents::Algorithm algorithm, bool share, bool force,
                                  const std::string& code_hash,
                                  const fs::path& out_dir) {
  ExperimentConfig config;
  config.trainer.scenario = scenario;
  config.trainer.algorithm = algorithm;
  config.trainer.share_workers = share;
  config.trainer.hp.epoch_episodes = scale.epoch_episodes;
  config.epochs = scale.epochs;
  config.seeds = scale.seeds;
  config.out_dir = out_dir;
  config.force = force;
  config.preset = scale.preset;
  config.code_hash = code_hash;
  return config;
}

double mean_of(const std::vector<metrics::EpochMetrics>& rows,
               double metrics::EpochMetrics::* field) {
  double sum = 0.0;
  for (const metrics::EpochMetrics& m : rows) sum += m.*field;
  return rows.empty() ? 0.0 : sum / static_cast<double>(rows.size());
}

}  // namespace

std::vector<GridCellResult> run_grid(
    const fs::path& out_root, const GridScale& scale, bool force,
    const std::string& code_hash,
    const std::function<void(const std::string&)>& on_start) {
  require(scale.epochs >= 1 && scale.epoch_episodes >= 1 && !scale.seeds.empty(),
          "grid: scale must be positive with at least one seed");
  fs::create_directories(out_root);
  const auto announce = [&](const std::string& label) {
    if (on_start) on_start(label);
  };

  struct TrainedCell {
    std::string cell;
    std::string algorithm;
    ExperimentConfig config;
  };
  const std::vector<std::pair<int, int>> comm_cells = {{1, 3}, {1, 6}, {1, 12},
                                                       {3, 6}, {5, 6}, {10, 6}};
  std::vector<TrainedCell> runs;
  for (const auto& [listeners, landmarks] : comm_cells) {
    const std::string cell =
        "comm_l" + std::to_string(listeners) + "_m" + std::to_string(landmarks);
    const env::ScenarioConfig scenario =
        env::build_scenario(env::ScenarioKind::kCoopComm, listeners, landmarks);
    for (const agents::Algorithm algorithm :
         {agents::Algorithm::kFmh, agents::Algorithm::kMaddpg,
          agents::Algorithm::kDdpg}) {
      const bool share = algorithm == agents::Algorithm::kFmh && listeners > 1;
      runs.push_back({cell, agents::to_string(algorithm),
                      grid_cell_config(scale, scenario, algorithm, share, force,
                                       code_hash,
                                       out_root / cell / agents::to_string(algorithm))});
    }
  }
  const env::ScenarioConfig coord =
      env::build_scenario(env::ScenarioKind::kCoopCoord, 3, 6);
  for (const agents::Algorithm algorithm :
       {agents::Algorithm::kFmh, agents::Algorithm::kMaddpg, agents::Algorithm::kDdpg}) {
    const bool share = algorithm == agents::Algorithm::kFmh;
    runs.push_back({"coord", agents::to_string(algorithm),
                    grid_cell_config(scale, coord, algorithm, share, force, code_hash,
                                     out_root / "coord" / agents::to_string(algorithm))});
  }
  const env::ScenarioConfig coord_mobile =
      env::build_scenario(env::ScenarioKind::kCoopCoordMobileManager, 3, 6);
  runs.push_back({"coord_mobile", "fmh",
                  grid_cell_config(scale, coord_mobile, agents::Algorithm::kFmh, true,
                                   force, code_hash, out_root / "coord_mobile" / "fmh")});
  env::ScenarioConfig coord_hetero = coord;
  coord_hetero.heterogeneous_mass = true;
  runs.push_back({"coord_hetero", "fmh",
                  grid_cell_config(scale, coord_hetero, agents::Algorithm::kFmh, true,
                                   force, code_hash, out_root / "coord_hetero" / "fmh")});

  std::vector<GridCellResult> table;
  for (const TrainedCell& run : runs) {
    announce(run.cell + "/" + run.algorithm);
    const ExperimentResult result = run_experiment(run.config);
    table.push_back({run.cell, run.algorithm, result.final_task_return(),
                     describe_convergence(result.mean_task_curve())});
  }

  // Scripted centroid baseline on each communication cell: a 10-epoch pure
  // evaluation, no training.
  for (const auto& [listeners, landmarks] : comm_cells) {
    const std::string cell =
        "comm_l" + std::to_string(listeners) + "_m" + std::to_string(landmarks);
    announce(cell + "/com");
    const env::ScenarioConfig scenario =
        env::build_scenario(env::ScenarioKind::kCoopComm, listeners, landmarks);
    const std::vector<metrics::EpochMetrics> rows =
        evaluate_scripted_com(scenario, scale.seeds.front(), 10, scale.epoch_episodes);
    table.push_back({cell, "com", mean_of(rows, &metrics::EpochMetrics::task_return),
                     "n/a"});
  }

  // Post-training evaluations of the coordination policies. Coverage is
  // measured with the speaker parked off-screen; the far-target assignment
  // rate of the light agent is measured on banded two-near-one-far spawns
  // using the heavy/light team's policies.
  const auto evaluate_coord = [&](const std::string& trained_cell,
                                  const env::ScenarioConfig& eval_scenario,
                                  const std::string& result_cell,
                                  double metrics::EpochMetrics::* field) {
    announce(result_cell + "/fmh");
    agents::TrainerConfig eval_config;
    eval_config.scenario = eval_scenario;
    eval_config.algorithm = agents::Algorithm::kFmh;
    eval_config.share_workers = true;
    eval_config.run_seed = scale.seeds.front();
    const fs::path policy =
        out_root / trained_cell / "fmh" /
        ("policy_seed" + std::to_string(scale.seeds.front()) + ".bin");
    std::ifstream in(policy, std::ios::binary);
    require(in.good(), "grid: missing policy checkpoint " + policy.string());
    const std::vector<metrics::EpochMetrics> rows =
        evaluate_policies(eval_config, in, 10, scale.epoch_episodes);
    table.push_back({result_cell, "fmh", mean_of(rows, field), "n/a"});
  };
  env::ScenarioConfig offscreen = coord;
  offscreen.speaker_offscreen = true;
  evaluate_coord("coord", offscreen, "coord_eval_offscreen",
                 &metrics::EpochMetrics::targets_covered);
  evaluate_coord("coord_hetero", env::build_scenario(env::ScenarioKind::kTnofEval, 3, 6),
                 "coord_eval_tnof", &metrics::EpochMetrics::far_assignment_probability);

  const fs::path summary = out_root / "summary.csv";
  std::ofstream out(summary, std::ios::trunc);
  require(out.good(), "cannot write grid summary: " + summary.string());
  out << "cell,algorithm,final_value,convergence_epoch\n";
  for (const GridCellResult& row : table)
    out << row.cell << ',' << row.algorithm << ',' << format_value(row.final_value)
        << ',' << row.convergence << '\n';
  return table;
}

std::vector<metrics::EpochMetrics> evaluate_scripted_com(
    const env::ScenarioConfig& scenario, std::uint64_t run_seed, int epochs,
    int episodes_per_epoch, double pursuit_gain, double brake_gain) {
  require(epochs >= 1 && episodes_per_epoch >= 1, "evaluation: counts must be positive");
  std::vector<metrics::EpochMetrics> rows;
  std::uint64_t counter = 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    metrics::EpochAccumulator acc(scenario.goal_dim(), scenario.episode_len, false);
    for (int e = 0; e < episodes_per_epoch; ++e) {
      const std::uint64_t seed = num::stream_seed(run_seed, "eval-episode", counter++);
      acc.add(agents::scripted_com_episode(scenario, seed, pursuit_gain, brake_gain));
    }
    rows.push_back(acc.finish());
  }
  return rows;
}

}  // namespace fmh::harness
