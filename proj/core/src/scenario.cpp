#include "fmh/scenario.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

namespace fmh::env {

using fmh::num::require;

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kCoopComm: return "coop_comm";
    case ScenarioKind::kCoopCoord: return "coop_coord";
    case ScenarioKind::kCoopCoordMobileManager: return "coop_coord_mobile_manager";
    case ScenarioKind::kTnofEval: return "tnof_eval";
    case ScenarioKind::kComSynthetic: return "com_synthetic";
  }
  return "coop_comm";
}

ScenarioKind scenario_kind_from_string(const std::string& name) {
  if (name == "coop_comm") return ScenarioKind::kCoopComm;
  if (name == "coop_coord") return ScenarioKind::kCoopCoord;
  if (name == "coop_coord_mobile_manager") return ScenarioKind::kCoopCoordMobileManager;
  if (name == "tnof_eval") return ScenarioKind::kTnofEval;
  if (name == "com_synthetic") return ScenarioKind::kComSynthetic;
  throw std::runtime_error("unknown scenario kind: " + name);
}

const std::vector<std::array<double, 3>>& landmark_palette12() {
  static const std::vector<std::array<double, 3>> palette = {
      {0.65, 0.15, 0.15}, {0.15, 0.65, 0.15}, {0.15, 0.15, 0.65},
      {0.65, 0.65, 0.15}, {0.15, 0.65, 0.65}, {0.65, 0.15, 0.65},
      {0.65, 0.65, 0.65}, {0.15, 0.15, 0.15}, {0.40, 0.40, 0.65},
      {0.40, 0.40, 0.15}, {0.15, 0.40, 0.40}, {0.65, 0.40, 0.40},
  };
  return palette;
}

std::array<double, 3> target_green() { return {0.15, 0.65, 0.15}; }
std::array<double, 3> decoy_blue() { return {0.15, 0.15, 0.65}; }

int ScenarioConfig::message_dim(int agent) const {
  // Emission head width: only the speaker talks, one goal block per listener.
  if (!speaker_present || !is_speaker(agent)) return 0;
  return n_listeners * goal_dim();
}

double ScenarioConfig::agent_mass(int agent) const {
  if (!heterogeneous_mass || is_speaker(agent)) return 1.0;
  // Listener 0 is the light one, the rest are heavy.
  return agent == 0 ? 0.5 : 2.0;
}

int ScenarioConfig::observation_dim(int agent) const {
  const bool comm_family =
      kind == ScenarioKind::kCoopComm || kind == ScenarioKind::kComSynthetic;
  const int heard = speaker_present ? goal_dim() : 0;  // listener's received block
  if (comm_family) {
    if (speaker_present && is_speaker(agent)) return 3 * n_listeners;  // target colours only
    return 2 + 2 * n_landmarks + heard;
  }
  // Coordination family: everyone sees everyone else's position and velocity.
  const int others = n_agents() - 1;
  if (is_speaker(agent)) {
    return 2 + 2 * n_landmarks + 3 * n_landmarks + 2 * others + 2 * others;
  }
  return 2 + 2 * n_landmarks + 2 * others + 2 * others + heard;
}

void ScenarioConfig::validate() const {
  require(n_listeners >= 1, "scenario: need at least one listener");
  require(n_landmarks >= 1, "scenario: need at least one landmark");
  require(episode_len >= 1, "scenario: episode length must be positive");
  require(dt > 0 && damping >= 0 && damping < 1 && sensitivity > 0,
          "scenario: physics constants out of range");
  require(agent_radius > 0 && landmark_radius > 0, "scenario: radii must be positive");
  require(static_cast<int>(palette.size()) == n_landmarks,
          "scenario: palette size must equal landmark count");
  if (kind == ScenarioKind::kComSynthetic) {
    require(!speaker_present, "scenario: synthetic centroid task has no speaker");
  }
  if (kind == ScenarioKind::kCoopCoord || kind == ScenarioKind::kCoopCoordMobileManager ||
      kind == ScenarioKind::kTnofEval) {
    require(n_targets >= 1 && n_targets <= n_landmarks,
            "scenario: target count out of range");
  }
  if (kind == ScenarioKind::kTnofEval) {
    require(heterogeneous_mass, "scenario: the two-near-one-far layout needs the "
                                "heterogeneous-mass flag");
    require(n_landmarks == 6 && n_targets == 3,
            "scenario: two-near-one-far uses 6 landmarks with 3 targets");
  }
}

ScenarioConfig build_scenario(ScenarioKind kind, int listeners, int landmarks) {
  ScenarioConfig config;
  config.kind = kind;
  config.n_listeners = listeners;
  config.n_landmarks = landmarks;
  switch (kind) {
    case ScenarioKind::kCoopComm:
      require(landmarks <= static_cast<int>(landmark_palette12().size()),
              "scenario: at most 12 distinguishable landmarks");
      config.palette.assign(landmark_palette12().begin(),
                            landmark_palette12().begin() + landmarks);
      config.n_targets = 1;
      break;
    case ScenarioKind::kComSynthetic:
      require(landmarks <= static_cast<int>(landmark_palette12().size()),
              "scenario: at most 12 distinguishable landmarks");
      config.palette.assign(landmark_palette12().begin(),
                            landmark_palette12().begin() + landmarks);
      config.speaker_present = false;
      config.n_targets = 1;
      break;
    case ScenarioKind::kCoopCoord:
    case ScenarioKind::kCoopCoordMobileManager:
    case ScenarioKind::kTnofEval:
      // Colours are per-episode (targets green, decoys blue); the palette
      // entries here are placeholders replaced at reset.
      config.palette.assign(static_cast<std::size_t>(landmarks), decoy_blue());
      config.n_targets = 3;
      config.agent_radius = 0.15;  // "large in size"
      config.collisions_enabled = true;
      config.no_auto_collide_spawn = true;
      config.speaker_mobile = kind == ScenarioKind::kCoopCoordMobileManager;
      config.heterogeneous_mass = kind == ScenarioKind::kTnofEval;
      break;
  }
  config.validate();
  return config;
}

std::string scenario_to_text(const ScenarioConfig& c) {
  std::ostringstream out;
  out << "kind=" << to_string(c.kind) << "\n";
  out << "listeners=" << c.n_listeners << "\n";
  out << "landmarks=" << c.n_landmarks << "\n";
  out << "targets=" << c.n_targets << "\n";
  out << "speaker_present=" << (c.speaker_present ? 1 : 0) << "\n";
  out << "speaker_mobile=" << (c.speaker_mobile ? 1 : 0) << "\n";
  out << "heterogeneous_mass=" << (c.heterogeneous_mass ? 1 : 0) << "\n";
  out << "collisions_enabled=" << (c.collisions_enabled ? 1 : 0) << "\n";
  out << "no_auto_collide_spawn=" << (c.no_auto_collide_spawn ? 1 : 0) << "\n";
  out << "speaker_offscreen=" << (c.speaker_offscreen ? 1 : 0) << "\n";
  out << "agent_radius=" << c.agent_radius << "\n";
  out << "landmark_radius=" << c.landmark_radius << "\n";
  out << "dt=" << c.dt << "\n";
  out << "damping=" << c.damping << "\n";
  out << "sensitivity=" << c.sensitivity << "\n";
  out << "episode_len=" << c.episode_len << "\n";
  return out.str();
}

ScenarioConfig scenario_from_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, "scenario file: expected key=value, got: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  require(kv.count("kind") != 0, "scenario file: missing kind=");
  const ScenarioKind kind = scenario_kind_from_string(kv.at("kind"));
  auto get_int = [&](const std::string& key, int fallback) {
    return kv.count(key) ? std::stoi(kv.at(key)) : fallback;
  };
  auto get_real = [&](const std::string& key, double fallback) {
    return kv.count(key) ? std::stod(kv.at(key)) : fallback;
  };
  ScenarioConfig c = build_scenario(kind, get_int("listeners", 1), get_int("landmarks", 3));
  c.n_targets = get_int("targets", c.n_targets);
  c.speaker_mobile = get_int("speaker_mobile", c.speaker_mobile ? 1 : 0) != 0;
  c.heterogeneous_mass = get_int("heterogeneous_mass", c.heterogeneous_mass ? 1 : 0) != 0;
  c.collisions_enabled = get_int("collisions_enabled", c.collisions_enabled ? 1 : 0) != 0;
  c.no_auto_collide_spawn =
      get_int("no_auto_collide_spawn", c.no_auto_collide_spawn ? 1 : 0) != 0;
  c.speaker_offscreen = get_int("speaker_offscreen", c.speaker_offscreen ? 1 : 0) != 0;
  c.agent_radius = get_real("agent_radius", c.agent_radius);
  c.landmark_radius = get_real("landmark_radius", c.landmark_radius);
  c.dt = get_real("dt", c.dt);
  c.damping = get_real("damping", c.damping);
  c.sensitivity = get_real("sensitivity", c.sensitivity);
  c.episode_len = get_int("episode_len", c.episode_len);
  c.validate();
  return c;
}

}  // namespace fmh::env
