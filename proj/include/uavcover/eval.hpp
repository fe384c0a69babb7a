#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <optional>

#include "uavcover/config.hpp"
#include "uavcover/environment.hpp"
#include "uavcover/net.hpp"
#include "uavcover/policy.hpp"
#include "uavcover/trace.hpp"

namespace uavcover {

struct RolloutResult {
  EpisodeTrace trace;
  Eigen::VectorXd total_reward_per_agent;
  double support_mean = 0.0;
  double omega_mean = 0.0;
};

/// One greedy (epsilon = 0) episode. `layout_seed` fixes users and the
/// leader; when `dynamics_seed` is set the malfunction stream is re-seeded
/// after layout so it can vary independently.
RolloutResult run_episode(const Network& actor, const ScenarioConfig& config,
                          Scheme scheme, std::uint64_t layout_seed,
                          std::optional<std::uint64_t> dynamics_seed);

struct EvalReport {
  int iterations = 0;
  double support_rate_mean = 0.0;
  double support_rate_std = 0.0;
  double omega_mean = 0.0;
  double omega_std = 0.0;
  double total_reward_mean = 0.0;         // per-agent average episode total
  Eigen::VectorXd users_per_uav_mean;     // M+K rows, mean assigned per step
  Eigen::VectorXd support_rate_per_step;  // T
  Eigen::MatrixXd resolution_step_mean;   // T x M, mean pixel values
};

/// Fixed-layout evaluation: every iteration lays the world out from
/// `seed`; iteration i re-seeds only the malfunction stream with
/// mix(seed, 1 + i*seed_stride). stride 0 makes all iterations identical.
/// Iterations run in parallel and merge in index order. Throws
/// CheckpointMismatch when the actor does not fit the scenario.
EvalReport evaluate(const Network& actor, const ScenarioConfig& config,
                    Scheme scheme, int iterations, std::uint64_t seed,
                    int seed_stride);

void print_eval(const EvalReport& report, std::ostream& out);

/// Throws CheckpointMismatch unless the network's input/output dims match
/// the scenario's observation and action dims.
void check_actor_compatible(const Network& actor,
                            const ScenarioConfig& config);

}  // namespace uavcover
