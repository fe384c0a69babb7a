#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "uavcover/config.hpp"
#include "uavcover/energy.hpp"
#include "uavcover/geometry.hpp"
#include "uavcover/rng.hpp"

namespace uavcover {

enum class Action : int {
  MoveXPlus = 0,
  MoveXMinus = 1,
  MoveYPlus = 2,
  MoveYMinus = 3,
  MoveDiagPP = 4,  // +x +y
  MoveDiagPM = 5,  // +x -y
  MoveDiagMP = 6,  // -x +y
  MoveDiagMM = 7,  // -x -y
  ResolutionUp = 8,
  ResolutionDown = 9,
};
inline constexpr int kActionCount = 10;

bool is_move_action(Action a);

struct AgentState {
  int id = 0;
  Position position{0.0, 0.0};
  int resolution_index = 0;
  EnergyLedger energy;
  bool operating = true;
  bool is_leader = false;

  bool operator==(const AgentState&) const;
};

struct UserState {
  int id = 0;
  Position position{0.0, 0.0};

  bool operator==(const UserState&) const;
};

struct NonAgentState {
  int id = 0;  // row M + id in the association matrix
  Position position{0.0, 0.0};
  int resolution_index = 0;
  bool malfunctioned = false;

  bool operator==(const NonAgentState&) const;
};

struct WorldState {
  int time_step = 0;
  std::vector<AgentState> agents;
  std::vector<UserState> users;
  std::vector<NonAgentState> non_agents;
  Rng rng;  // dynamics stream (malfunction draws)

  int leader_index() const;  // index of the unique leader agent

  bool operator==(const WorldState&) const;
};

/// (M+K) x N binary matrix: agent rows first, then non-agents. Column
/// sums are <= 1: each user is served by at most one UAV.
using AssociationMatrix = Eigen::MatrixXi;

struct RewardBreakdown {
  double r_e = 0.0;      // energy (always <= 0)
  double r_c = 0.0;      // surveillance quality
  double r_u = 0.0;      // shared utilization bonus
  double r_total = 0.0;  // r_e + r_c + r_u
  double omega = 0.0;    // agent-disk overlap ratio this step

  bool operator==(const RewardBreakdown&) const = default;
};

// --- dynamics primitives -------------------------------------------------

/// Axis moves displace +-alpha, diagonal moves +-beta on both axes,
/// resolution actions shift the level index. Position and index clamp to
/// the field and [0, resolution_count).
std::pair<Position, int> apply_action(const Position& pos,
                                      int resolution_index, Action action,
                                      double alpha, double beta,
                                      double field_size,
                                      int resolution_count);

/// Each live non-agent flips to malfunctioned with probability `prob`;
/// malfunction is absorbing. Exactly one uniform draw per non-agent per
/// call, so the event times depend only on the dynamics stream.
void malfunction_update(WorldState& state, double prob);

/// C1-C3 association: a user joins the covering operational UAV with the
/// highest resolution; ties by smaller distance, then lower row index.
AssociationMatrix associate_users(const WorldState& state,
                                  const ScenarioConfig& config);

// --- rewards --------------------------------------------------------------

/// -rho_e1*(e_b+e_c)/e_norm - rho_e2*[operating]; 0 for a dead agent.
double reward_energy(bool operating, double e_b, double e_c, double rho_e1,
                     double rho_e2, double e_norm);

/// rho_c * ln(pixel_value) * assigned_users.
double reward_surveillance(int pixel_value, int assigned_users, double rho_c);

/// rho_u * (agent-assigned users)/N when omega < omega_th, else 0. Only
/// the first `num_agents` rows of `assoc` count.
double reward_utilization(const AssociationMatrix& assoc, int num_agents,
                          double omega, double omega_th, double rho_u,
                          int num_users);

/// Assigned users (all rows) / N.
double support_rate(const AssociationMatrix& assoc, int num_users);

// --- observations -----------------------------------------------------------

int observation_dim(int num_agents, int num_users, int num_non_agents);

/// Flat per-agent view: own position, relative vectors and distances to
/// the other agents, users, and non-agents, own energy draws, coverage
/// radius, resolution index, assigned-user count, operating flag. Every
/// entry is normalized into [-1, 1].
Eigen::VectorXd observe(const WorldState& state, int agent_index,
                        const AssociationMatrix& assoc,
                        const ScenarioConfig& config);

// --- episode driver ---------------------------------------------------------

class Environment {
 public:
  explicit Environment(ScenarioConfig config);

  /// Seeds the world: agents at the field center at the lowest resolution
  /// with full batteries, non-agents equally spaced on the spawn ring
  /// starting at 90 degrees, users uniform in the field, one uniformly
  /// drawn leader. Returns observations as one column per agent.
  Eigen::MatrixXd reset(std::uint64_t seed);

  /// Replaces the dynamics stream (malfunction draws) without touching
  /// the laid-out world.
  void reseed_dynamics(std::uint64_t seed);

  struct StepResult {
    Eigen::MatrixXd observations;  // obs_dim x M
    std::vector<RewardBreakdown> rewards;
    bool done = false;
    double omega = 0.0;
    double support = 0.0;
  };

  /// One synchronous step: apply all actions, drain batteries, run the
  /// malfunction process, re-associate users, score rewards. Throws
  /// ArityError on a wrong action count and EpisodeOver past the horizon.
  StepResult step(std::span<const Action> actions);

  bool done() const { return state_.time_step >= config_.episode_steps; }
  const WorldState& state() const { return state_; }
  const ScenarioConfig& config() const { return config_; }
  const AssociationMatrix& last_association() const { return assoc_; }
  int observation_dim() const;
  Eigen::MatrixXd observations() const;

 private:
  double agent_radius(const AgentState& agent) const;

  ScenarioConfig config_;
  WorldState state_;
  AssociationMatrix assoc_;
  std::vector<std::uint8_t> coverage_workspace_;
};

}  // namespace uavcover
