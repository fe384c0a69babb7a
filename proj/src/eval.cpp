#include "uavcover/eval.hpp"

#include <atomic>
#include <cmath>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "uavcover/errors.hpp"

namespace uavcover {

void check_actor_compatible(const Network& actor,
                            const ScenarioConfig& config) {
  const int obs_dim = observation_dim(config.num_agents, config.num_users,
                                      config.num_non_agents);
  if (actor.input_dim() != obs_dim) {
    throw CheckpointMismatch(
        "actor expects " + std::to_string(actor.input_dim()) +
        " inputs, scenario observations have " + std::to_string(obs_dim));
  }
  if (actor.output_dim() != kActionCount) {
    throw CheckpointMismatch("actor has " +
                             std::to_string(actor.output_dim()) +
                             " outputs, action space has " +
                             std::to_string(kActionCount));
  }
  for (std::size_t l = 1; l < actor.layers.size(); ++l) {
    if (actor.layers[l].in_features() !=
        2 * actor.layers[l - 1].out_features()) {
      throw CheckpointMismatch(
          "layer " + std::to_string(l) +
          " is not shaped for a (state, communication) pair");
    }
  }
}

RolloutResult run_episode(const Network& actor, const ScenarioConfig& config,
                          Scheme scheme, std::uint64_t layout_seed,
                          std::optional<std::uint64_t> dynamics_seed) {
  check_actor_compatible(actor, config);
  Environment env(config);
  Eigen::MatrixXd obs = env.reset(layout_seed);
  if (dynamics_seed) env.reseed_dynamics(*dynamics_seed);

  const int m = config.num_agents;
  const int leader = env.state().leader_index();
  const auto kinds = scheme_kinds(scheme, m, leader);

  RolloutResult result;
  result.trace.field_size = config.field_size;
  result.trace.num_agents = m;
  result.trace.num_users = config.num_users;
  result.trace.num_non_agents = config.num_non_agents;
  result.trace.episode_steps = config.episode_steps;
  result.trace.resolutions = config.resolutions.pixels();
  result.trace.leader_index = leader;
  result.trace.users = env.state().users;
  result.total_reward_per_agent = Eigen::VectorXd::Zero(m);

  double support_sum = 0.0;
  double omega_sum = 0.0;
  int steps = 0;
  while (!env.done()) {
    const Eigen::MatrixXd dist = commnet_forward(actor, obs, kinds, m);
    std::vector<Action> actions(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) {
      actions[static_cast<std::size_t>(a)] =
          static_cast<Action>(argmax_index(dist.col(a)));
    }
    auto step = env.step(actions);

    StepTrace st;
    st.time_step = env.state().time_step;
    st.agents = env.state().agents;
    st.non_agents = env.state().non_agents;
    st.assignment = assignment_of(env.last_association());
    st.rewards = step.rewards;
    st.omega = step.omega;
    st.support = step.support;
    result.trace.steps.push_back(std::move(st));

    for (int a = 0; a < m; ++a) {
      result.total_reward_per_agent[a] +=
          step.rewards[static_cast<std::size_t>(a)].r_total;
    }
    support_sum += step.support;
    omega_sum += step.omega;
    ++steps;
    obs = std::move(step.observations);
  }
  result.support_mean = steps > 0 ? support_sum / steps : 0.0;
  result.omega_mean = steps > 0 ? omega_sum / steps : 0.0;
  return result;
}

EvalReport evaluate(const Network& actor, const ScenarioConfig& config,
                    Scheme scheme, int iterations, std::uint64_t seed,
                    int seed_stride) {
  check_actor_compatible(actor, config);
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (seed_stride < 0) throw ConfigError("seed_stride must be >= 0");

  const int m = config.num_agents;
  const int rows = m + config.num_non_agents;
  const int horizon = config.episode_steps;

  struct IterStats {
    double support_mean = 0.0;
    double omega_mean = 0.0;
    double reward_mean = 0.0;
    Eigen::VectorXd users_per_uav;
    Eigen::VectorXd support_per_step;
    Eigen::MatrixXd res_pixels;
  };
  std::vector<IterStats> stats(static_cast<std::size_t>(iterations));

  auto run_one = [&](int i) {
    const std::uint64_t dyn =
        mix_seed(seed, 1 + static_cast<std::uint64_t>(i) *
                               static_cast<std::uint64_t>(seed_stride));
    const RolloutResult rollout =
        run_episode(actor, config, scheme, seed, dyn);
    IterStats s;
    s.support_mean = rollout.support_mean;
    s.omega_mean = rollout.omega_mean;
    s.reward_mean = rollout.total_reward_per_agent.size() > 0
                        ? rollout.total_reward_per_agent.mean()
                        : 0.0;
    s.users_per_uav = Eigen::VectorXd::Zero(rows);
    s.support_per_step = Eigen::VectorXd::Zero(horizon);
    s.res_pixels = Eigen::MatrixXd::Zero(horizon, m);
    for (int t = 0; t < static_cast<int>(rollout.trace.steps.size()); ++t) {
      const auto& st = rollout.trace.steps[static_cast<std::size_t>(t)];
      for (const int row : st.assignment) {
        if (row >= 0 && row < rows) s.users_per_uav[row] += 1.0;
      }
      s.support_per_step[t] = st.support;
      for (int a = 0; a < m; ++a) {
        s.res_pixels(t, a) = config.resolutions
                                 .level(st.agents[static_cast<std::size_t>(a)]
                                            .resolution_index)
                                 .pixel_value;
      }
    }
    if (horizon > 0) s.users_per_uav /= static_cast<double>(horizon);
    stats[static_cast<std::size_t>(i)] = std::move(s);
  };

  const unsigned hw = std::thread::hardware_concurrency();
  const int workers =
      std::max(1, std::min<int>(static_cast<int>(hw ? hw : 2), iterations));
  if (workers == 1) {
    for (int i = 0; i < iterations; ++i) run_one(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < iterations;
             i = next.fetch_add(1)) {
          run_one(i);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  EvalReport report;
  report.iterations = iterations;
  report.users_per_uav_mean = Eigen::VectorXd::Zero(rows);
  report.support_rate_per_step = Eigen::VectorXd::Zero(horizon);
  report.resolution_step_mean = Eigen::MatrixXd::Zero(horizon, m);
  double support_sum = 0.0, omega_sum = 0.0, reward_sum = 0.0;
  for (const auto& s : stats) {
    support_sum += s.support_mean;
    omega_sum += s.omega_mean;
    reward_sum += s.reward_mean;
    report.users_per_uav_mean += s.users_per_uav;
    report.support_rate_per_step += s.support_per_step;
    report.resolution_step_mean += s.res_pixels;
  }
  const double n = static_cast<double>(iterations);
  report.support_rate_mean = support_sum / n;
  report.omega_mean = omega_sum / n;
  report.total_reward_mean = reward_sum / n;
  report.users_per_uav_mean /= n;
  report.support_rate_per_step /= n;
  report.resolution_step_mean /= n;
  double support_var = 0.0, omega_var = 0.0;
  for (const auto& s : stats) {
    support_var += (s.support_mean - report.support_rate_mean) *
                   (s.support_mean - report.support_rate_mean);
    omega_var += (s.omega_mean - report.omega_mean) *
                 (s.omega_mean - report.omega_mean);
  }
  report.support_rate_std = std::sqrt(support_var / n);
  report.omega_std = std::sqrt(omega_var / n);
  return report;
}

void print_eval(const EvalReport& report, std::ostream& out) {
  out << "iterations:        " << report.iterations << "\n";
  out << "support rate:      " << report.support_rate_mean << " +- "
      << report.support_rate_std << "\n";
  out << "overlap ratio:     " << report.omega_mean << " +- "
      << report.omega_std << "\n";
  out << "mean agent reward: " << report.total_reward_mean << "\n";
  out << "users per uav:    ";
  for (Eigen::Index r = 0; r < report.users_per_uav_mean.size(); ++r) {
    out << " " << report.users_per_uav_mean[r];
  }
  out << "\n";
  if (report.support_rate_per_step.size() > 0) {
    out << "final-step support: "
        << report.support_rate_per_step[report.support_rate_per_step.size() -
                                        1]
        << "\n";
    out << "final-step resolution per agent:";
    for (Eigen::Index a = 0; a < report.resolution_step_mean.cols(); ++a) {
      out << " "
          << report.resolution_step_mean(
                 report.resolution_step_mean.rows() - 1, a);
    }
    out << "\n";
  }
}

}  // namespace uavcover
