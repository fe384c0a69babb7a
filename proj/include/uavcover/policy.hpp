#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uavcover/net.hpp"
#include "uavcover/rng.hpp"

namespace uavcover {

/// Dnn is exactly CommNet with every communication vector forced to zero;
/// both kinds share one parameter set.
enum class PolicyKind { CommNet, Dnn };

/// Proposed: the leader is CommNet, the rest Dnn. Comp1: all CommNet.
/// Comp2: all Dnn (independent actors).
enum class Scheme { Proposed, Comp1, Comp2 };

Scheme parse_scheme(std::string_view name);  // proposed | comp1 | comp2
std::string_view scheme_name(Scheme scheme);
std::vector<PolicyKind> scheme_kinds(Scheme scheme, int num_agents,
                                     int leader_index);

struct EpsilonSchedule {
  double initial = 0.3;
  double anneal_per_update = 0.0001;
  double floor = 0.01;
};

/// max(floor, initial - anneal_per_update * update_count)
double epsilon(const EpsilonSchedule& schedule, long long update_count);

/// Tape of one joint policy forward: per-layer stacked inputs (hidden
/// state over communication mean) and pre-activations, one column per
/// agent sample.
struct JointTape {
  std::vector<Eigen::MatrixXd> inputs;
  std::vector<Eigen::MatrixXd> preacts;
  Eigen::MatrixXd output;
  std::vector<PolicyKind> kinds;  // one per column
  int group_size = 0;
};

/// Joint forward over one or more agent groups. `observations` holds one
/// column per agent, groups of `group_size` consecutive columns; `kinds`
/// gives each column's policy kind. At every hidden-layer transition each
/// CommNet column consumes the mean of the other group members' current
/// hidden states; Dnn columns consume zeros. The final layer is the
/// network's own activation (softmax for actors).
///
/// Throws DimensionMismatch on shape violations and SingleAgentComm when a
/// CommNet column sits in a group of one.
Eigen::MatrixXd commnet_forward(const Network& net,
                                const Eigen::MatrixXd& observations,
                                std::span<const PolicyKind> kinds,
                                int group_size, JointTape* tape = nullptr);

/// Gradients of a joint forward, including the communication paths that
/// route each CommNet column's comm gradient back into the other group
/// members' hidden states. Parameter gradients sum over all columns.
NetGrads commnet_backward(const Network& net, const JointTape& tape,
                          const Eigen::MatrixXd& output_grad);

/// Lowest index among maximal entries.
int argmax_index(const Eigen::VectorXd& values);

/// Per column: with probability eps a uniform action, else the argmax.
std::vector<int> select_actions(const Eigen::MatrixXd& distributions,
                                double eps, Rng& rng);

/// Per column: with probability eps a uniform action, else a draw from the
/// column's distribution (the softmax head is a stochastic policy). The
/// training loop uses this; identical distributions still produce diverse
/// joint actions, which is what lets co-located agents split up.
std::vector<int> sample_actions(const Eigen::MatrixXd& distributions,
                                double eps, Rng& rng);

/// Actor: obs -> width, then (width+width) -> width hidden transitions,
/// final (width+width) -> actions softmax. The doubled fan-in carries the
/// communication mean (zero for Dnn agents).
Network make_policy_network(int obs_dim, int hidden_width, int dense_layers,
                            int action_count, std::uint64_t seed);

/// Critic: plain chain obs -> width ... -> one value per action, linear.
Network make_critic_network(int obs_dim, int hidden_width, int dense_layers,
                            int action_count, std::uint64_t seed);

}  // namespace uavcover
