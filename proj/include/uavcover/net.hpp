#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace uavcover {

enum class Activation : int { Linear = 0, Relu = 1, Softmax = 2 };

/// Affine layer y = act(W x + b). Weights are out x in.
struct DenseLayer {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
  Activation activation = Activation::Linear;

  int in_features() const { return static_cast<int>(weights.cols()); }
  int out_features() const { return static_cast<int>(weights.rows()); }
};

/// Ordered dense stack. Layers need not chain dims: the policy nets feed
/// each hidden layer a concatenated (state, communication) input twice as
/// wide as the previous output. Plain forward() requires chained dims.
struct Network {
  std::vector<DenseLayer> layers;

  int input_dim() const {
    return layers.empty() ? 0 : layers.front().in_features();
  }
  int output_dim() const {
    return layers.empty() ? 0 : layers.back().out_features();
  }
};

/// Cached per-layer inputs and pre-activations from one forward pass.
/// Columns are independent samples.
struct ForwardTape {
  std::vector<Eigen::MatrixXd> inputs;
  std::vector<Eigen::MatrixXd> preacts;
  Eigen::MatrixXd output;
};

/// Parameter gradients, same shapes as the network's layers.
struct NetGrads {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> bias;
};

NetGrads zero_grads(const Network& net);

Eigen::MatrixXd apply_activation(Activation act, const Eigen::MatrixXd& z);

/// dLoss/dPreactivation given dLoss/dOutput and the pre-activations.
Eigen::MatrixXd activation_backward(Activation act, const Eigen::MatrixXd& z,
                                    const Eigen::MatrixXd& dy);

/// Chained forward pass over column-sample batches. Throws
/// DimensionMismatch when the input or a layer boundary does not chain.
Eigen::MatrixXd forward(const Network& net, const Eigen::MatrixXd& input,
                        ForwardTape* tape = nullptr);
Eigen::VectorXd forward(const Network& net, const Eigen::VectorXd& input,
                        ForwardTape* tape = nullptr);

/// Reverse-mode gradients for a tape produced by forward() on this net.
/// `output_grad` is dLoss/dOutput, same shape as tape.output. Throws
/// StaleTape when the tape does not match the network.
NetGrads backward(const Network& net, const ForwardTape& tape,
                  const Eigen::MatrixXd& output_grad);

/// Xavier-uniform init, biases zero, deterministic per seed.
/// Chain form: dims = {in, h1, ..., out}; hidden layers ReLU, final layer
/// `final_act`.
Network xavier_init(std::span<const int> dims, std::uint64_t seed,
                    Activation final_act = Activation::Linear);
/// General form: explicit (in, out) per layer plus per-layer activations.
Network xavier_init(std::span<const std::pair<int, int>> layer_dims,
                    std::span<const Activation> activations,
                    std::uint64_t seed);

struct AdamState {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long long step_count = 0;
  std::vector<Eigen::MatrixXd> m_weights, v_weights;
  std::vector<Eigen::VectorXd> m_bias, v_bias;
};

AdamState make_adam(const Network& net, double learning_rate);

/// One Adam update with bias correction. Throws ShapeMismatch when grads
/// or moments do not mirror the parameters.
void adam_step(Network& net, const NetGrads& grads, AdamState& state);

double grad_global_norm(const NetGrads& grads);
void clip_global_norm(NetGrads& grads, double max_norm);

/// Exact per-forward-pass FLOPS: each layer 2*in*out + out + activation
/// (ReLU out, softmax 3*out, linear 0); each of the first `comm_layers`
/// hidden states additionally pays (num_agents-1)*width additions plus
/// width scalings for the communication mean.
std::uint64_t flops_count(const Network& net, int comm_layers,
                          int num_agents);

/// Versioned binary checkpoint: header {magic, version, per-layer dims and
/// activations}, then layer-ordered little-endian float64 weights (column
/// major) and biases. Round-trip is bit-exact.
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

inline constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace uavcover
