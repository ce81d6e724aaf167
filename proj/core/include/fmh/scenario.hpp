#pragma once

#include <array>
#include <string>
#include <vector>

#include "fmh/matrix.hpp"

namespace fmh::env {

enum class ScenarioKind {
  kCoopComm,               // speaker tells each listener which landmark to cover
  kCoopCoord,              // team of three must cover the three green targets
  kCoopCoordMobileManager, // as above but the speaker also moves and covers
  kTnofEval,               // two-near-one-far evaluation layout, never trained on
  kComSynthetic,           // listeners rewarded for reaching the landmark centroid
};

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string& name);

/// Complete immutable description of one task: entity counts, physics
/// constants, radii, colours, and reward-rule selectors. Everything a
/// WorldState needs to be reset, stepped, observed and scored.
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::kCoopComm;
  int n_listeners = 1;
  int n_landmarks = 3;
  int n_targets = 1;  // green targets per episode (coordination family)

  bool speaker_present = true;
  bool speaker_mobile = false;
  bool heterogeneous_mass = false;  // one light listener, two heavy
  bool collisions_enabled = false;
  bool no_auto_collide_spawn = false;  // resample overlapping agent spawns
  bool speaker_offscreen = false;      // evaluation tweak: park the immobile speaker far away

  double agent_radius = 0.05;
  double landmark_radius = 0.05;
  double dt = 0.1;
  double damping = 0.25;
  double sensitivity = 5.0;  // force-to-acceleration gain for mobile agents
  int episode_len = 25;

  // One RGB triple per landmark. Fixed identity colours for the
  // communication family; per-episode target/decoy colours for the
  // coordination family are written onto the landmarks at reset.
  std::vector<std::array<double, 3>> palette;

  int n_agents() const { return n_listeners + (speaker_present ? 1 : 0); }
  int speaker_index() const { return n_listeners; }
  bool is_speaker(int agent) const { return speaker_present && agent == n_listeners; }
  bool agent_mobile(int agent) const { return !is_speaker(agent) || speaker_mobile; }

  /// Number of selectable goals == landmarks; each listener's message slot
  /// and each per-listener block of the speaker's message head has this width.
  int goal_dim() const { return n_landmarks; }
  int message_dim(int agent) const;  // width of the message head of `agent`
  int force_dim(int agent) const { return agent_mobile(agent) ? 2 : 0; }
  int action_dim(int agent) const { return force_dim(agent) + message_dim(agent); }
  int observation_dim(int agent) const;

  double agent_mass(int agent) const;

  void validate() const;  // throws on inconsistent configs
};

ScenarioConfig build_scenario(ScenarioKind kind, int listeners, int landmarks);

/// key=value text round-trip for scenario files.
std::string scenario_to_text(const ScenarioConfig& config);
ScenarioConfig scenario_from_text(const std::string& text);

/// The fixed 12-colour landmark palette of the communication task: the three
/// base colours, the remaining cube vertices, and four face centres.
const std::vector<std::array<double, 3>>& landmark_palette12();
std::array<double, 3> target_green();
std::array<double, 3> decoy_blue();

}  // namespace fmh::env
