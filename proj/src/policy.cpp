#include "uavcover/policy.hpp"

#include <algorithm>
#include <string>

#include "uavcover/errors.hpp"

namespace uavcover {

Scheme parse_scheme(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "proposed") return Scheme::Proposed;
  if (lower == "comp1") return Scheme::Comp1;
  if (lower == "comp2") return Scheme::Comp2;
  throw ConfigError("unknown scheme: " + std::string(name) +
                    " (expected proposed | comp1 | comp2)");
}

std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::Proposed:
      return "proposed";
    case Scheme::Comp1:
      return "comp1";
    case Scheme::Comp2:
      return "comp2";
  }
  throw Error("Error", "unreachable scheme");
}

std::vector<PolicyKind> scheme_kinds(Scheme scheme, int num_agents,
                                     int leader_index) {
  if (num_agents < 1) throw ConfigError("num_agents must be positive");
  switch (scheme) {
    case Scheme::Proposed: {
      if (leader_index < 0 || leader_index >= num_agents) {
        throw ConfigError("leader index out of range");
      }
      std::vector<PolicyKind> kinds(static_cast<std::size_t>(num_agents),
                                    PolicyKind::Dnn);
      kinds[static_cast<std::size_t>(leader_index)] = PolicyKind::CommNet;
      return kinds;
    }
    case Scheme::Comp1:
      return std::vector<PolicyKind>(static_cast<std::size_t>(num_agents),
                                     PolicyKind::CommNet);
    case Scheme::Comp2:
      return std::vector<PolicyKind>(static_cast<std::size_t>(num_agents),
                                     PolicyKind::Dnn);
  }
  throw Error("Error", "unreachable scheme");
}

double epsilon(const EpsilonSchedule& schedule, long long update_count) {
  return std::max(schedule.floor,
                  schedule.initial -
                      schedule.anneal_per_update *
                          static_cast<double>(update_count));
}

namespace {

void check_joint_shapes(const Network& net, Eigen::Index obs_rows,
                        Eigen::Index cols,
                        std::span<const PolicyKind> kinds, int group_size) {
  if (net.layers.empty()) {
    throw DimensionMismatch("joint forward on an empty network");
  }
  if (group_size < 1) {
    throw DimensionMismatch("group size must be positive");
  }
  if (cols == 0 || cols % group_size != 0) {
    throw DimensionMismatch("column count " + std::to_string(cols) +
                            " is not a multiple of group size " +
                            std::to_string(group_size));
  }
  if (static_cast<Eigen::Index>(kinds.size()) != cols) {
    throw DimensionMismatch("one policy kind per column required");
  }
  if (obs_rows != net.input_dim()) {
    throw DimensionMismatch("observations have " + std::to_string(obs_rows) +
                            " rows, network expects " +
                            std::to_string(net.input_dim()));
  }
  for (std::size_t l = 1; l < net.layers.size(); ++l) {
    const int prev_out = net.layers[l - 1].out_features();
    if (net.layers[l].in_features() != 2 * prev_out) {
      throw DimensionMismatch(
          "hidden layer " + std::to_string(l) +
          " must accept a (state, communication) pair of width " +
          std::to_string(2 * prev_out));
    }
  }
  if (group_size == 1) {
    for (const auto kind : kinds) {
      if (kind == PolicyKind::CommNet) {
        throw SingleAgentComm("a CommNet agent needs at least one peer");
      }
    }
  }
}

}  // namespace

Eigen::MatrixXd commnet_forward(const Network& net,
                                const Eigen::MatrixXd& observations,
                                std::span<const PolicyKind> kinds,
                                int group_size, JointTape* tape) {
  const Eigen::Index cols = observations.cols();
  check_joint_shapes(net, observations.rows(), cols, kinds, group_size);
  const Eigen::Index n_groups = cols / group_size;

  if (tape) {
    tape->inputs.clear();
    tape->preacts.clear();
    tape->kinds.assign(kinds.begin(), kinds.end());
    tape->group_size = group_size;
  }

  Eigen::MatrixXd h;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    Eigen::MatrixXd input;
    if (l == 0) {
      input = observations;
    } else {
      const Eigen::Index w = h.rows();
      input.setZero(2 * w, cols);
      input.topRows(w) = h;
      if (group_size > 1) {
        const double inv = 1.0 / static_cast<double>(group_size - 1);
        for (Eigen::Index g = 0; g < n_groups; ++g) {
          const Eigen::Index base = g * group_size;
          const Eigen::VectorXd sum =
              h.middleCols(base, group_size).rowwise().sum();
          for (Eigen::Index m = 0; m < group_size; ++m) {
            const Eigen::Index j = base + m;
            if (kinds[static_cast<std::size_t>(j)] == PolicyKind::CommNet) {
              input.col(j).tail(w) = (sum - h.col(j)) * inv;
            }
          }
        }
      }
    }
    Eigen::MatrixXd z = (layer.weights * input).colwise() + layer.bias;
    if (tape) {
      tape->inputs.push_back(std::move(input));
      tape->preacts.push_back(z);
    }
    h = apply_activation(layer.activation, z);
  }
  if (tape) tape->output = h;
  return h;
}

NetGrads commnet_backward(const Network& net, const JointTape& tape,
                          const Eigen::MatrixXd& output_grad) {
  const std::size_t n_layers = net.layers.size();
  if (tape.inputs.size() != n_layers || tape.preacts.size() != n_layers) {
    throw StaleTape("tape has " + std::to_string(tape.inputs.size()) +
                    " layers, network has " + std::to_string(n_layers));
  }
  const Eigen::Index cols = tape.output.cols();
  const int group_size = tape.group_size;
  if (group_size < 1 || cols % group_size != 0 ||
      static_cast<Eigen::Index>(tape.kinds.size()) != cols) {
    throw StaleTape("tape group structure is inconsistent");
  }
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& layer = net.layers[l];
    if (tape.inputs[l].rows() != layer.in_features() ||
        tape.preacts[l].rows() != layer.out_features() ||
        tape.inputs[l].cols() != cols || tape.preacts[l].cols() != cols) {
      throw StaleTape("tape layer " + std::to_string(l) +
                      " does not match the network");
    }
  }
  if (output_grad.rows() != tape.output.rows() ||
      output_grad.cols() != cols) {
    throw StaleTape("output gradient shape does not match the tape");
  }

  const Eigen::Index n_groups = cols / group_size;
  NetGrads grads = zero_grads(net);
  Eigen::MatrixXd dh = output_grad;
  for (int l = static_cast<int>(n_layers) - 1; l >= 0; --l) {
    const auto& layer = net.layers[static_cast<std::size_t>(l)];
    const Eigen::MatrixXd dz = activation_backward(
        layer.activation, tape.preacts[static_cast<std::size_t>(l)], dh);
    grads.weights[static_cast<std::size_t>(l)] =
        dz * tape.inputs[static_cast<std::size_t>(l)].transpose();
    grads.bias[static_cast<std::size_t>(l)] = dz.rowwise().sum();
    if (l == 0) break;

    const Eigen::MatrixXd du = layer.weights.transpose() * dz;
    const Eigen::Index w = du.rows() / 2;
    Eigen::MatrixXd dprev = du.topRows(w);
    if (group_size > 1) {
      // Each CommNet column's comm half flows back to the other group
      // members' hidden states with weight 1/(group_size-1). Dnn columns'
      // comm input is a constant zero, so their half is dropped.
      const double inv = 1.0 / static_cast<double>(group_size - 1);
      for (Eigen::Index g = 0; g < n_groups; ++g) {
        const Eigen::Index base = g * group_size;
        Eigen::VectorXd total = Eigen::VectorXd::Zero(w);
        for (Eigen::Index m = 0; m < group_size; ++m) {
          const Eigen::Index j = base + m;
          if (tape.kinds[static_cast<std::size_t>(j)] ==
              PolicyKind::CommNet) {
            total += du.col(j).tail(w);
          }
        }
        for (Eigen::Index m = 0; m < group_size; ++m) {
          const Eigen::Index j = base + m;
          if (tape.kinds[static_cast<std::size_t>(j)] ==
              PolicyKind::CommNet) {
            dprev.col(j) += (total - du.col(j).tail(w).eval()) * inv;
          } else {
            dprev.col(j) += total * inv;
          }
        }
      }
    }
    dh = std::move(dprev);
  }
  return grads;
}

int argmax_index(const Eigen::VectorXd& values) {
  if (values.size() == 0) {
    throw DimensionMismatch("argmax of an empty vector");
  }
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::vector<int> select_actions(const Eigen::MatrixXd& distributions,
                                double eps, Rng& rng) {
  const int n_actions = static_cast<int>(distributions.rows());
  if (n_actions == 0) {
    throw DimensionMismatch("action distribution has no rows");
  }
  std::vector<int> actions;
  actions.reserve(static_cast<std::size_t>(distributions.cols()));
  for (Eigen::Index j = 0; j < distributions.cols(); ++j) {
    if (rng.uniform() < eps) {
      actions.push_back(rng.uniform_int(n_actions));
    } else {
      actions.push_back(argmax_index(distributions.col(j)));
    }
  }
  return actions;
}

std::vector<int> sample_actions(const Eigen::MatrixXd& distributions,
                                double eps, Rng& rng) {
  const int n_actions = static_cast<int>(distributions.rows());
  if (n_actions == 0) {
    throw DimensionMismatch("action distribution has no rows");
  }
  std::vector<int> actions;
  actions.reserve(static_cast<std::size_t>(distributions.cols()));
  for (Eigen::Index j = 0; j < distributions.cols(); ++j) {
    if (rng.uniform() < eps) {
      actions.push_back(rng.uniform_int(n_actions));
      continue;
    }
    // inverse-CDF draw; the final index absorbs any rounding slack
    const double u = rng.uniform();
    double cumulative = 0.0;
    int picked = n_actions - 1;
    for (int a = 0; a < n_actions; ++a) {
      cumulative += distributions(a, j);
      if (u < cumulative) {
        picked = a;
        break;
      }
    }
    actions.push_back(picked);
  }
  return actions;
}

Network make_policy_network(int obs_dim, int hidden_width, int dense_layers,
                            int action_count, std::uint64_t seed) {
  if (dense_layers < 2) {
    throw ConfigError("policy network needs at least 2 dense layers");
  }
  std::vector<std::pair<int, int>> dims;
  std::vector<Activation> acts;
  dims.emplace_back(obs_dim, hidden_width);
  acts.push_back(Activation::Relu);
  for (int l = 0; l < dense_layers - 2; ++l) {
    dims.emplace_back(2 * hidden_width, hidden_width);
    acts.push_back(Activation::Relu);
  }
  dims.emplace_back(2 * hidden_width, action_count);
  acts.push_back(Activation::Softmax);
  return xavier_init(dims, acts, seed);
}

Network make_critic_network(int obs_dim, int hidden_width, int dense_layers,
                            int action_count, std::uint64_t seed) {
  if (dense_layers < 2) {
    throw ConfigError("critic network needs at least 2 dense layers");
  }
  std::vector<int> dims;
  dims.push_back(obs_dim);
  for (int l = 0; l < dense_layers - 1; ++l) dims.push_back(hidden_width);
  dims.push_back(action_count);
  return xavier_init(dims, seed, Activation::Linear);
}

}  // namespace uavcover
