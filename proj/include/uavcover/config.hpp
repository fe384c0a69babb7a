#pragma once

#include <cstdint>
#include <string>

#include "uavcover/energy.hpp"
#include "uavcover/geometry.hpp"

namespace uavcover {

/// Full scenario + training parameterization. Field names double as the
/// keys of the flat key/value config file.
struct ScenarioConfig {
  // world
  double field_size = 2400.0;  // meters, square field
  int num_agents = 4;          // M
  int num_users = 25;          // N
  int num_non_agents = 3;      // K
  int episode_steps = 40;      // T
  double alpha = 333.0;        // axis move, meters
  double beta = 236.0;         // diagonal move, meters per axis
  ResolutionSet resolutions;   // 720p / 1080p / 2160p
  double base_radius = 600.0;  // coverage radius at the lowest level, m
  double cell_size = 5.0;      // raster cell for coverage areas, m
  double omega_threshold = 0.5;
  double malfunction_prob = 0.03;    // per non-agent per step
  double non_agent_ring = 750.0;     // spawn circle radius, m
  double battery_capacity = 10000.0; // watt-minutes
  EnergyParams energy;

  // reward coefficients
  double rho_e1 = 1.0;
  double rho_e2 = 1.0;
  double rho_c = 1.0;
  double rho_u = 3.0;

  // training
  double discount = 0.95;
  double learning_rate = 0.001;        // critic Adam
  double actor_learning_rate = 1e-4;   // slower: the softmax must not
                                       // saturate before the critic settles
  double entropy_weight = 2.0;  // actor entropy bonus; keeps near-tied
                                // actions stochastic so identically
                                // observed agents can still split up
  int batch_size = 32;
  int buffer_capacity = 10000;
  int update_period = 40;  // steps between actor updates (critic: every step)
  int target_sync_period = 100;
  int hidden_width = 64;
  int dense_layers = 6;
  double epsilon_initial = 0.3;
  double epsilon_anneal = 0.0001;
  double epsilon_floor = 0.01;
  double grad_clip_norm = 10.0;
  int episodes = 2000;
  std::uint64_t seed = 1;

  // evaluation
  int eval_iterations = 25;
  int eval_seed_stride = 1;

  bool operator==(const ScenarioConfig&) const = default;

  FieldGrid grid() const { return {field_size, cell_size}; }

  /// Largest coverage radius (lowest resolution).
  double max_radius() const { return base_radius; }

  /// Normalizer for the energy reward: the largest possible per-step draw.
  double energy_norm() const {
    return base_energy(true, energy) +
           energy.surveil_power_max * energy.step_minutes;
  }
};

/// Parses a flat key/value file ("key = value", '#' comments). Unknown
/// keys or malformed values throw ConfigError; a missing file throws
/// IoError. Keys not present keep their defaults.
ScenarioConfig load_scenario(const std::string& path);
void save_scenario(const ScenarioConfig& config, const std::string& path);

/// Full cross-field validation; throws ConfigError.
void validate(const ScenarioConfig& config);

/// FNV-1a (64-bit) over a file's bytes; used in run manifests.
std::uint64_t fnv1a_file(const std::string& path);
std::uint64_t fnv1a_bytes(const void* data, std::size_t size);

}  // namespace uavcover
