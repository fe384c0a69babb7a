#pragma once

#include <cstdint>
#include <iosfwd>

#include "uavcover/config.hpp"
#include "uavcover/net.hpp"

namespace uavcover {

/// Per-policy forward costs and their per-scheme totals for M agents:
/// proposed = C + (M-1)*D, comp1 = M*C, comp2 = M*D.
struct FlopsReport {
  std::uint64_t commnet_cost = 0;  // C: one CommNet-kind forward
  std::uint64_t dnn_cost = 0;      // D: one Dnn-kind forward
  int num_agents = 0;
  std::uint64_t proposed = 0;
  std::uint64_t comp1 = 0;
  std::uint64_t comp2 = 0;
};

FlopsReport compose_flops(std::uint64_t commnet_cost, std::uint64_t dnn_cost,
                          int num_agents);

/// Counts C and D for the given actor (comm mixing at every hidden
/// transition for C, none for D) and composes the scheme totals.
/// Requires C > D.
FlopsReport flops_report(const Network& actor, int comm_layers,
                         int num_agents);

/// Report for the scenario's default actor architecture.
FlopsReport flops_report(const ScenarioConfig& config);

void print_flops(const FlopsReport& report, std::ostream& out);

}  // namespace uavcover
