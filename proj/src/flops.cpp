#include "uavcover/flops.hpp"

#include <ostream>

#include "uavcover/environment.hpp"
#include "uavcover/errors.hpp"
#include "uavcover/policy.hpp"

namespace uavcover {

FlopsReport compose_flops(std::uint64_t commnet_cost, std::uint64_t dnn_cost,
                          int num_agents) {
  if (num_agents < 1) throw ConfigError("num_agents must be positive");
  FlopsReport report;
  report.commnet_cost = commnet_cost;
  report.dnn_cost = dnn_cost;
  report.num_agents = num_agents;
  const auto m = static_cast<std::uint64_t>(num_agents);
  report.proposed = commnet_cost + (m - 1) * dnn_cost;
  report.comp1 = m * commnet_cost;
  report.comp2 = m * dnn_cost;
  return report;
}

FlopsReport flops_report(const Network& actor, int comm_layers,
                         int num_agents) {
  const std::uint64_t commnet_cost =
      flops_count(actor, comm_layers, num_agents);
  const std::uint64_t dnn_cost = flops_count(actor, 0, num_agents);
  if (commnet_cost <= dnn_cost) {
    throw ConfigError("communication must add cost (need comm_layers >= 1 "
                      "and at least one mixed hidden state)");
  }
  return compose_flops(commnet_cost, dnn_cost, num_agents);
}

FlopsReport flops_report(const ScenarioConfig& config) {
  const int obs_dim = observation_dim(config.num_agents, config.num_users,
                                      config.num_non_agents);
  const Network actor =
      make_policy_network(obs_dim, config.hidden_width, config.dense_layers,
                          kActionCount, /*seed=*/0);
  return flops_report(actor, config.dense_layers - 1, config.num_agents);
}

void print_flops(const FlopsReport& report, std::ostream& out) {
  out << "policy costs per forward pass [FLOPS]\n";
  out << "  commnet: " << report.commnet_cost << "\n";
  out << "  dnn:     " << report.dnn_cost << "\n";
  out << "scheme totals for " << report.num_agents << " agents [FLOPS]\n";
  out << "  proposed (1 commnet + " << report.num_agents - 1
      << " dnn): " << report.proposed << "\n";
  out << "  comp1    (" << report.num_agents
      << " commnet):        " << report.comp1 << "\n";
  out << "  comp2    (" << report.num_agents
      << " dnn):            " << report.comp2 << "\n";
}

}  // namespace uavcover
