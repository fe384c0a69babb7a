#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uavcover/environment.hpp"

namespace uavcover {

inline constexpr int kTraceSchemaVersion = 1;

/// Snapshot of the world after one step, plus that step's outcomes.
struct StepTrace {
  int time_step = 0;
  std::vector<AgentState> agents;
  std::vector<NonAgentState> non_agents;
  std::vector<int> assignment;  // per user: covering UAV row, or -1
  std::vector<RewardBreakdown> rewards;
  double omega = 0.0;
  double support = 0.0;

  bool operator==(const StepTrace&) const = default;
};

/// One full episode: a header (static layout) and T step records.
struct EpisodeTrace {
  int schema_version = kTraceSchemaVersion;
  double field_size = 0.0;
  int num_agents = 0;
  int num_users = 0;
  int num_non_agents = 0;
  int episode_steps = 0;
  std::vector<int> resolutions;
  int leader_index = 0;
  std::vector<UserState> users;
  std::vector<StepTrace> steps;

  bool operator==(const EpisodeTrace&) const = default;
};

/// Per-user covering row (or -1) from an association matrix.
std::vector<int> assignment_of(const AssociationMatrix& assoc);

/// JSON-lines: first line the header record, then one line per step.
/// Round-trips exactly (doubles are emitted with shortest-round-trip
/// precision). Throws IoError on unreadable/unparsable files.
void write_trace(const EpisodeTrace& trace, const std::string& path);
EpisodeTrace read_trace(const std::string& path);

/// Reproducibility sidecar written by every CLI run.
struct RunManifest {
  std::string command;
  std::string config_path;
  std::uint64_t config_hash = 0;  // FNV-1a of the config file, 0 if none
  std::string scheme;
  int episodes = 0;
  int iterations = 0;
  std::uint64_t seed = 0;
  int seed_stride = 0;
  std::string checkpoint_path;
  std::uint64_t checkpoint_hash = 0;
};

void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace uavcover
