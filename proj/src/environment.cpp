#include "uavcover/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "uavcover/errors.hpp"

namespace uavcover {

namespace {

bool same_position(const Position& a, const Position& b) {
  return a.x() == b.x() && a.y() == b.y();
}

}  // namespace

bool is_move_action(Action a) {
  return static_cast<int>(a) <= static_cast<int>(Action::MoveDiagMM);
}

bool AgentState::operator==(const AgentState& o) const {
  return id == o.id && same_position(position, o.position) &&
         resolution_index == o.resolution_index && energy == o.energy &&
         operating == o.operating && is_leader == o.is_leader;
}

bool UserState::operator==(const UserState& o) const {
  return id == o.id && same_position(position, o.position);
}

bool NonAgentState::operator==(const NonAgentState& o) const {
  return id == o.id && same_position(position, o.position) &&
         resolution_index == o.resolution_index &&
         malfunctioned == o.malfunctioned;
}

int WorldState::leader_index() const {
  int found = -1;
  for (std::size_t m = 0; m < agents.size(); ++m) {
    if (agents[m].is_leader) {
      if (found >= 0) throw ConfigError("more than one leader agent");
      found = static_cast<int>(m);
    }
  }
  if (found < 0) throw ConfigError("no leader agent");
  return found;
}

bool WorldState::operator==(const WorldState& o) const {
  return time_step == o.time_step && agents == o.agents && users == o.users &&
         non_agents == o.non_agents && rng == o.rng;
}

std::pair<Position, int> apply_action(const Position& pos,
                                      int resolution_index, Action action,
                                      double alpha, double beta,
                                      double field_size,
                                      int resolution_count) {
  Position next = pos;
  int res = resolution_index;
  switch (action) {
    case Action::MoveXPlus:
      next.x() += alpha;
      break;
    case Action::MoveXMinus:
      next.x() -= alpha;
      break;
    case Action::MoveYPlus:
      next.y() += alpha;
      break;
    case Action::MoveYMinus:
      next.y() -= alpha;
      break;
    case Action::MoveDiagPP:
      next.x() += beta;
      next.y() += beta;
      break;
    case Action::MoveDiagPM:
      next.x() += beta;
      next.y() -= beta;
      break;
    case Action::MoveDiagMP:
      next.x() -= beta;
      next.y() += beta;
      break;
    case Action::MoveDiagMM:
      next.x() -= beta;
      next.y() -= beta;
      break;
    case Action::ResolutionUp:
      res += 1;
      break;
    case Action::ResolutionDown:
      res -= 1;
      break;
  }
  next.x() = std::clamp(next.x(), 0.0, field_size);
  next.y() = std::clamp(next.y(), 0.0, field_size);
  res = std::clamp(res, 0, resolution_count - 1);
  return {next, res};
}

void malfunction_update(WorldState& state, double prob) {
  // One draw per non-agent regardless of its flag keeps the event stream
  // a pure function of the dynamics seed.
  for (auto& na : state.non_agents) {
    const double u = state.rng.uniform();
    if (!na.malfunctioned && u < prob) na.malfunctioned = true;
  }
}

AssociationMatrix associate_users(const WorldState& state,
                                  const ScenarioConfig& config) {
  const int num_agents = static_cast<int>(state.agents.size());
  const int num_non_agents = static_cast<int>(state.non_agents.size());
  const int rows = num_agents + num_non_agents;
  const int cols = static_cast<int>(state.users.size());
  AssociationMatrix assoc = AssociationMatrix::Zero(rows, cols);

  struct Candidate {
    int row;
    int pixel;
    double dist;
  };

  for (int n = 0; n < cols; ++n) {
    const Position& user = state.users[static_cast<std::size_t>(n)].position;
    Candidate best{-1, 0, 0.0};
    auto consider = [&](int row, int res_index, const Position& pos) {
      const auto level = config.resolutions.level(res_index);
      const double radius =
          coverage_radius(level, config.base_radius,
                          config.resolutions.lowest_pixel());
      const double d = distance(pos, user);
      if (d > radius) return;
      const bool better =
          best.row < 0 || level.pixel_value > best.pixel ||
          (level.pixel_value == best.pixel && d < best.dist);
      if (better) best = {row, level.pixel_value, d};
    };
    for (int m = 0; m < num_agents; ++m) {
      const auto& agent = state.agents[static_cast<std::size_t>(m)];
      if (!agent.operating) continue;
      consider(m, agent.resolution_index, agent.position);
    }
    for (int k = 0; k < num_non_agents; ++k) {
      const auto& na = state.non_agents[static_cast<std::size_t>(k)];
      if (na.malfunctioned) continue;
      consider(num_agents + k, na.resolution_index, na.position);
    }
    if (best.row >= 0) assoc(best.row, n) = 1;
  }
  return assoc;
}

double reward_energy(bool operating, double e_b, double e_c, double rho_e1,
                     double rho_e2, double e_norm) {
  if (!(e_norm > 0.0)) {
    throw ConfigError("energy normalizer must be positive");
  }
  return -rho_e1 * (e_b + e_c) / e_norm - (operating ? rho_e2 : 0.0);
}

double reward_surveillance(int pixel_value, int assigned_users,
                           double rho_c) {
  if (assigned_users == 0) return 0.0;
  if (pixel_value <= 0) {
    throw ConfigError("pixel value must be positive");
  }
  return rho_c * std::log(static_cast<double>(pixel_value)) *
         static_cast<double>(assigned_users);
}

double reward_utilization(const AssociationMatrix& assoc, int num_agents,
                          double omega, double omega_th, double rho_u,
                          int num_users) {
  if (num_users <= 0) throw ConfigError("num_users must be positive");
  if (num_agents < 0 || num_agents > assoc.rows()) {
    throw ConfigError("agent row count exceeds association matrix");
  }
  if (omega >= omega_th) return 0.0;
  const double covered = assoc.topRows(num_agents).cast<double>().sum();
  return rho_u * covered / static_cast<double>(num_users);
}

double support_rate(const AssociationMatrix& assoc, int num_users) {
  if (num_users <= 0) throw ConfigError("num_users must be positive");
  return assoc.cast<double>().sum() / static_cast<double>(num_users);
}

int observation_dim(int num_agents, int num_users, int num_non_agents) {
  return 2 + 3 * (num_agents - 1) + 3 * num_users + 3 * num_non_agents + 6;
}

Eigen::VectorXd observe(const WorldState& state, int agent_index,
                        const AssociationMatrix& assoc,
                        const ScenarioConfig& config) {
  const int num_agents = static_cast<int>(state.agents.size());
  const int num_users = static_cast<int>(state.users.size());
  const int num_non_agents = static_cast<int>(state.non_agents.size());
  if (agent_index < 0 || agent_index >= num_agents) {
    throw ConfigError("agent index out of range");
  }
  const auto& self = state.agents[static_cast<std::size_t>(agent_index)];
  const double field = config.field_size;
  const double diag = field * std::numbers::sqrt2;

  Eigen::VectorXd obs(observation_dim(num_agents, num_users, num_non_agents));
  Eigen::Index i = 0;
  obs[i++] = self.position.x() / field;
  obs[i++] = self.position.y() / field;

  auto put_relative = [&](const Position& other) {
    const Position rel = other - self.position;
    obs[i++] = rel.x() / field;
    obs[i++] = rel.y() / field;
    obs[i++] = rel.norm() / diag;
  };
  for (int m = 0; m < num_agents; ++m) {
    if (m == agent_index) continue;
    put_relative(state.agents[static_cast<std::size_t>(m)].position);
  }
  for (int n = 0; n < num_users; ++n) {
    put_relative(state.users[static_cast<std::size_t>(n)].position);
  }
  for (int k = 0; k < num_non_agents; ++k) {
    put_relative(state.non_agents[static_cast<std::size_t>(k)].position);
  }

  const double base_norm = base_energy(true, config.energy);
  obs[i++] = base_norm > 0.0 ? self.energy.e_b / base_norm : 0.0;
  const double surveil_norm =
      config.energy.surveil_power_max * config.energy.step_minutes;
  obs[i++] = surveil_norm > 0.0 ? self.energy.e_c / surveil_norm : 0.0;
  obs[i++] = coverage_radius(config.resolutions, self.resolution_index,
                             config.base_radius) /
             config.base_radius;
  const int levels = config.resolutions.count();
  obs[i++] = levels > 1 ? static_cast<double>(self.resolution_index) /
                              static_cast<double>(levels - 1)
                        : 0.0;
  obs[i++] = static_cast<double>(assoc.row(agent_index).sum()) /
             static_cast<double>(num_users);
  obs[i++] = self.operating ? 1.0 : 0.0;
  return obs;
}

Environment::Environment(ScenarioConfig config) : config_(std::move(config)) {
  validate(config_);
}

double Environment::agent_radius(const AgentState& agent) const {
  return coverage_radius(config_.resolutions, agent.resolution_index,
                         config_.base_radius);
}

Eigen::MatrixXd Environment::reset(std::uint64_t seed) {
  state_ = WorldState();
  state_.rng = Rng(seed);

  const double center = config_.field_size / 2.0;
  state_.agents.resize(static_cast<std::size_t>(config_.num_agents));
  for (int m = 0; m < config_.num_agents; ++m) {
    auto& agent = state_.agents[static_cast<std::size_t>(m)];
    agent.id = m;
    agent.position = Position(center, center);
    agent.resolution_index = 0;
    agent.energy = EnergyLedger{0.0, 0.0, config_.battery_capacity};
    agent.operating = true;
    agent.is_leader = false;
  }

  state_.users.resize(static_cast<std::size_t>(config_.num_users));
  for (int n = 0; n < config_.num_users; ++n) {
    auto& user = state_.users[static_cast<std::size_t>(n)];
    user.id = n;
    user.position.x() = state_.rng.uniform(0.0, config_.field_size);
    user.position.y() = state_.rng.uniform(0.0, config_.field_size);
  }

  state_.non_agents.resize(static_cast<std::size_t>(config_.num_non_agents));
  for (int k = 0; k < config_.num_non_agents; ++k) {
    auto& na = state_.non_agents[static_cast<std::size_t>(k)];
    na.id = k;
    const double angle =
        std::numbers::pi / 2.0 +
        2.0 * std::numbers::pi * static_cast<double>(k) /
            static_cast<double>(config_.num_non_agents);
    na.position = Position(center + config_.non_agent_ring * std::cos(angle),
                           center + config_.non_agent_ring * std::sin(angle));
    na.position.x() = std::clamp(na.position.x(), 0.0, config_.field_size);
    na.position.y() = std::clamp(na.position.y(), 0.0, config_.field_size);
    na.resolution_index = 0;
    na.malfunctioned = false;
  }

  const int leader = state_.rng.uniform_int(config_.num_agents);
  state_.agents[static_cast<std::size_t>(leader)].is_leader = true;

  assoc_ = associate_users(state_, config_);
  return observations();
}

void Environment::reseed_dynamics(std::uint64_t seed) {
  state_.rng = Rng(seed);
}

int Environment::observation_dim() const {
  return uavcover::observation_dim(config_.num_agents, config_.num_users,
                                   config_.num_non_agents);
}

Eigen::MatrixXd Environment::observations() const {
  Eigen::MatrixXd obs(observation_dim(), config_.num_agents);
  for (int m = 0; m < config_.num_agents; ++m) {
    obs.col(m) = observe(state_, m, assoc_, config_);
  }
  return obs;
}

Environment::StepResult Environment::step(std::span<const Action> actions) {
  if (done()) {
    throw EpisodeOver("episode is over at step " +
                      std::to_string(state_.time_step));
  }
  if (static_cast<int>(actions.size()) != config_.num_agents) {
    throw ArityError("got " + std::to_string(actions.size()) +
                     " actions for " + std::to_string(config_.num_agents) +
                     " agents");
  }

  std::vector<bool> operating_at_start(
      static_cast<std::size_t>(config_.num_agents));
  for (int m = 0; m < config_.num_agents; ++m) {
    auto& agent = state_.agents[static_cast<std::size_t>(m)];
    operating_at_start[static_cast<std::size_t>(m)] = agent.operating;
    if (!agent.operating) {
      agent.energy.e_b = 0.0;
      agent.energy.e_c = 0.0;
      continue;
    }
    const Action action = actions[static_cast<std::size_t>(m)];
    const auto [pos, res] =
        apply_action(agent.position, agent.resolution_index, action,
                     config_.alpha, config_.beta, config_.field_size,
                     config_.resolutions.count());
    agent.position = pos;
    agent.resolution_index = res;
    const double e_b = base_energy(is_move_action(action), config_.energy);
    const double e_c = surveillance_energy(agent_radius(agent),
                                           config_.max_radius(), config_.energy);
    agent.energy = drain(agent.energy, e_b, e_c);
    if (agent.energy.battery_remaining <= 0.0) agent.operating = false;
  }

  malfunction_update(state_, config_.malfunction_prob);
  assoc_ = associate_users(state_, config_);

  std::vector<CoverageDisk> agent_disks;
  agent_disks.reserve(state_.agents.size());
  for (const auto& agent : state_.agents) {
    if (!agent.operating) continue;
    agent_disks.push_back({agent.position, agent_radius(agent)});
  }
  double omega = 0.0;
  if (!agent_disks.empty()) {
    try {
      omega = coverage_stats(agent_disks, config_.grid(), coverage_workspace_)
                  .omega;
    } catch (const ZeroUnion&) {
      omega = 0.0;
    }
  }

  const double r_u =
      reward_utilization(assoc_, config_.num_agents, omega,
                         config_.omega_threshold, config_.rho_u,
                         config_.num_users);
  const double e_norm = config_.energy_norm();

  StepResult result;
  result.rewards.resize(static_cast<std::size_t>(config_.num_agents));
  for (int m = 0; m < config_.num_agents; ++m) {
    const auto& agent = state_.agents[static_cast<std::size_t>(m)];
    auto& breakdown = result.rewards[static_cast<std::size_t>(m)];
    breakdown.r_e = reward_energy(operating_at_start[static_cast<std::size_t>(m)],
                                  agent.energy.e_b, agent.energy.e_c,
                                  config_.rho_e1, config_.rho_e2, e_norm);
    const int pixel =
        config_.resolutions.level(agent.resolution_index).pixel_value;
    breakdown.r_c = reward_surveillance(
        pixel, static_cast<int>(assoc_.row(m).sum()), config_.rho_c);
    breakdown.r_u = r_u;
    breakdown.r_total = breakdown.r_e + breakdown.r_c + breakdown.r_u;
    breakdown.omega = omega;
  }

  state_.time_step += 1;
  result.done = done();
  result.omega = omega;
  result.support = support_rate(assoc_, config_.num_users);
  result.observations = observations();
  return result;
}

}  // namespace uavcover
