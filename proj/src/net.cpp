#include "uavcover/net.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "uavcover/errors.hpp"
#include "uavcover/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace uavcover {

namespace {

std::string shape_str(long rows, long cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd y(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const Eigen::ArrayXd shifted = z.col(j).array() - z.col(j).maxCoeff();
    const Eigen::ArrayXd e = shifted.exp();
    y.col(j) = e / e.sum();
  }
  return y;
}

}  // namespace

Eigen::MatrixXd activation_backward(Activation act, const Eigen::MatrixXd& z,
                                    const Eigen::MatrixXd& dy) {
  switch (act) {
    case Activation::Linear:
      return dy;
    case Activation::Relu:
      return (z.array() > 0.0).cast<double>() * dy.array();
    case Activation::Softmax: {
      // dz = y .* (dy - <y, dy>) per column.
      const Eigen::MatrixXd y = softmax_columns(z);
      Eigen::MatrixXd dz(z.rows(), z.cols());
      for (Eigen::Index j = 0; j < z.cols(); ++j) {
        const double dot = y.col(j).dot(dy.col(j));
        dz.col(j) = y.col(j).array() * (dy.col(j).array() - dot);
      }
      return dz;
    }
  }
  throw Error("Error", "unreachable activation");
}

NetGrads zero_grads(const Network& net) {
  NetGrads g;
  g.weights.reserve(net.layers.size());
  g.bias.reserve(net.layers.size());
  for (const auto& layer : net.layers) {
    g.weights.push_back(
        Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
    g.bias.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
  }
  return g;
}

Eigen::MatrixXd apply_activation(Activation act, const Eigen::MatrixXd& z) {
  switch (act) {
    case Activation::Linear:
      return z;
    case Activation::Relu:
      return z.cwiseMax(0.0);
    case Activation::Softmax:
      return softmax_columns(z);
  }
  throw Error("Error", "unreachable activation");
}

Eigen::MatrixXd forward(const Network& net, const Eigen::MatrixXd& input,
                        ForwardTape* tape) {
  if (net.layers.empty()) {
    throw DimensionMismatch("forward on an empty network");
  }
  if (input.rows() != net.input_dim()) {
    throw DimensionMismatch("input has " + std::to_string(input.rows()) +
                            " rows, network expects " +
                            std::to_string(net.input_dim()));
  }
  if (tape) {
    tape->inputs.clear();
    tape->preacts.clear();
  }
  Eigen::MatrixXd h = input;
  for (const auto& layer : net.layers) {
    if (h.rows() != layer.in_features()) {
      throw DimensionMismatch(
          "layer expects " + std::to_string(layer.in_features()) +
          " inputs, got " + std::to_string(h.rows()) +
          " (non-chained nets need the policy forward)");
    }
    Eigen::MatrixXd z = (layer.weights * h).colwise() + layer.bias;
    if (tape) {
      tape->inputs.push_back(std::move(h));
      tape->preacts.push_back(z);
    }
    h = apply_activation(layer.activation, z);
  }
  if (tape) tape->output = h;
  return h;
}

Eigen::VectorXd forward(const Network& net, const Eigen::VectorXd& input,
                        ForwardTape* tape) {
  return forward(net, Eigen::MatrixXd(input), tape).col(0);
}

NetGrads backward(const Network& net, const ForwardTape& tape,
                  const Eigen::MatrixXd& output_grad) {
  const std::size_t n_layers = net.layers.size();
  if (tape.inputs.size() != n_layers || tape.preacts.size() != n_layers) {
    throw StaleTape("tape has " + std::to_string(tape.inputs.size()) +
                    " layers, network has " + std::to_string(n_layers));
  }
  const Eigen::Index cols = tape.output.cols();
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
    throw StaleTape("output gradient is " +
                    shape_str(output_grad.rows(), output_grad.cols()) +
                    ", expected " +
                    shape_str(tape.output.rows(), tape.output.cols()));
  }

  NetGrads grads = zero_grads(net);
  Eigen::MatrixXd dh = output_grad;
  for (int l = static_cast<int>(n_layers) - 1; l >= 0; --l) {
    const auto& layer = net.layers[static_cast<std::size_t>(l)];
    const Eigen::MatrixXd dz = activation_backward(
        layer.activation, tape.preacts[static_cast<std::size_t>(l)], dh);
    grads.weights[static_cast<std::size_t>(l)] =
        dz * tape.inputs[static_cast<std::size_t>(l)].transpose();
    grads.bias[static_cast<std::size_t>(l)] = dz.rowwise().sum();
    if (l > 0) dh = layer.weights.transpose() * dz;
  }
  return grads;
}

namespace {

DenseLayer xavier_layer(int in, int out, Activation act, Rng& rng) {
  if (in <= 0 || out <= 0) {
    throw ConfigError("layer dims must be positive");
  }
  DenseLayer layer;
  layer.weights.resize(out, in);
  layer.bias = Eigen::VectorXd::Zero(out);
  layer.activation = act;
  const double bound = std::sqrt(6.0 / (in + out));
  double* data = layer.weights.data();
  for (Eigen::Index i = 0; i < layer.weights.size(); ++i) {
    data[i] = rng.uniform(-bound, bound);
  }
  return layer;
}

}  // namespace

Network xavier_init(std::span<const int> dims, std::uint64_t seed,
                    Activation final_act) {
  if (dims.size() < 2) {
    throw ConfigError("xavier_init needs at least input and output dims");
  }
  Rng rng(seed);
  Network net;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const bool last = (l + 2 == dims.size());
    net.layers.push_back(xavier_layer(dims[l], dims[l + 1],
                                      last ? final_act : Activation::Relu,
                                      rng));
  }
  return net;
}

Network xavier_init(std::span<const std::pair<int, int>> layer_dims,
                    std::span<const Activation> activations,
                    std::uint64_t seed) {
  if (layer_dims.empty() || layer_dims.size() != activations.size()) {
    throw ConfigError("layer dims and activations must align and be non-empty");
  }
  Rng rng(seed);
  Network net;
  for (std::size_t l = 0; l < layer_dims.size(); ++l) {
    net.layers.push_back(xavier_layer(layer_dims[l].first,
                                      layer_dims[l].second, activations[l],
                                      rng));
  }
  return net;
}

AdamState make_adam(const Network& net, double learning_rate) {
  AdamState state;
  state.learning_rate = learning_rate;
  for (const auto& layer : net.layers) {
    state.m_weights.push_back(
        Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
    state.v_weights.push_back(
        Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
    state.m_bias.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
    state.v_bias.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
  }
  return state;
}

void adam_step(Network& net, const NetGrads& grads, AdamState& state) {
  const std::size_t n = net.layers.size();
  if (grads.weights.size() != n || grads.bias.size() != n ||
      state.m_weights.size() != n || state.m_bias.size() != n) {
    throw ShapeMismatch("gradient or moment count does not match layers");
  }
  for (std::size_t l = 0; l < n; ++l) {
    const auto& w = net.layers[l].weights;
    if (grads.weights[l].rows() != w.rows() ||
        grads.weights[l].cols() != w.cols() ||
        grads.bias[l].size() != net.layers[l].bias.size()) {
      throw ShapeMismatch("gradient shape mismatch at layer " +
                          std::to_string(l));
    }
  }
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double corr1 = 1.0 - std::pow(state.beta1, t);
  const double corr2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t l = 0; l < n; ++l) {
    auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
      m = state.beta1 * m + (1.0 - state.beta1) * grad;
      v = (state.beta2 * v.array() +
           (1.0 - state.beta2) * grad.array().square())
              .matrix();
      param.array() -= state.learning_rate * (m.array() / corr1) /
                       ((v.array() / corr2).sqrt() + state.eps);
    };
    update(net.layers[l].weights, grads.weights[l], state.m_weights[l],
           state.v_weights[l]);
    update(net.layers[l].bias, grads.bias[l], state.m_bias[l],
           state.v_bias[l]);
  }
}

double grad_global_norm(const NetGrads& grads) {
  double sum = 0.0;
  for (const auto& w : grads.weights) sum += w.squaredNorm();
  for (const auto& b : grads.bias) sum += b.squaredNorm();
  return std::sqrt(sum);
}

void clip_global_norm(NetGrads& grads, double max_norm) {
  const double norm = grad_global_norm(grads);
  if (norm <= max_norm || norm == 0.0) return;
  const double scale = max_norm / norm;
  for (auto& w : grads.weights) w *= scale;
  for (auto& b : grads.bias) b *= scale;
}

std::uint64_t flops_count(const Network& net, int comm_layers,
                          int num_agents) {
  if (comm_layers < 0 ||
      comm_layers > static_cast<int>(net.layers.size()) - 1) {
    throw ConfigError("comm_layers must lie in [0, layers-1]");
  }
  if (num_agents < 1) {
    throw ConfigError("num_agents must be positive");
  }
  std::uint64_t total = 0;
  for (const auto& layer : net.layers) {
    const auto in = static_cast<std::uint64_t>(layer.in_features());
    const auto out = static_cast<std::uint64_t>(layer.out_features());
    total += 2 * in * out + out;
    switch (layer.activation) {
      case Activation::Linear:
        break;
      case Activation::Relu:
        total += out;
        break;
      case Activation::Softmax:
        total += 3 * out;
        break;
    }
  }
  // One communication mean per mixed hidden state: (M-1) vector additions
  // plus one scaling of the width-sized result.
  for (int l = 0; l < comm_layers; ++l) {
    const auto width = static_cast<std::uint64_t>(
        net.layers[static_cast<std::size_t>(l)].out_features());
    total += static_cast<std::uint64_t>(num_agents - 1) * width + width;
  }
  return total;
}

namespace {

constexpr char kMagic[4] = {'U', 'V', 'N', 'C'};

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::ifstream& in, const std::string& path) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw IoError("truncated checkpoint: " + path);
  return v;
}

}  // namespace

void save_network(const Network& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(kMagic, sizeof kMagic);
  write_u32(out, kCheckpointVersion);
  write_u32(out, static_cast<std::uint32_t>(net.layers.size()));
  for (const auto& layer : net.layers) {
    write_u32(out, static_cast<std::uint32_t>(layer.in_features()));
    write_u32(out, static_cast<std::uint32_t>(layer.out_features()));
    write_u32(out, static_cast<std::uint32_t>(layer.activation));
  }
  for (const auto& layer : net.layers) {
    out.write(reinterpret_cast<const char*>(layer.weights.data()),
              static_cast<std::streamsize>(sizeof(double) *
                                           static_cast<std::size_t>(
                                               layer.weights.size())));
    out.write(reinterpret_cast<const char*>(layer.bias.data()),
              static_cast<std::streamsize>(
                  sizeof(double) * static_cast<std::size_t>(layer.bias.size())));
  }
  if (!out) throw IoError("write failed: " + path);
}

Network load_network(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[4] = {};
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw IoError("not a network checkpoint: " + path);
  }
  const std::uint32_t version = read_u32(in, path);
  if (version != kCheckpointVersion) {
    throw IoError("unsupported checkpoint version " +
                  std::to_string(version) + ": " + path);
  }
  const std::uint32_t n_layers = read_u32(in, path);
  if (n_layers == 0 || n_layers > 1024) {
    throw IoError("implausible layer count in checkpoint: " + path);
  }
  struct Header {
    std::uint32_t in, out, act;
  };
  std::vector<Header> headers(n_layers);
  for (auto& h : headers) {
    h.in = read_u32(in, path);
    h.out = read_u32(in, path);
    h.act = read_u32(in, path);
    if (h.in == 0 || h.out == 0 || h.in > (1u << 20) || h.out > (1u << 20) ||
        h.act > 2) {
      throw IoError("implausible layer header in checkpoint: " + path);
    }
  }
  Network net;
  for (const auto& h : headers) {
    DenseLayer layer;
    layer.weights.resize(h.out, h.in);
    layer.bias.resize(h.out);
    layer.activation = static_cast<Activation>(h.act);
    in.read(reinterpret_cast<char*>(layer.weights.data()),
            static_cast<std::streamsize>(sizeof(double) *
                                         static_cast<std::size_t>(
                                             layer.weights.size())));
    in.read(reinterpret_cast<char*>(layer.bias.data()),
            static_cast<std::streamsize>(
                sizeof(double) * static_cast<std::size_t>(layer.bias.size())));
    if (!in) throw IoError("truncated checkpoint payload: " + path);
    net.layers.push_back(std::move(layer));
  }
  in.peek();
  if (!in.eof()) throw IoError("trailing bytes in checkpoint: " + path);
  return net;
}

}  // namespace uavcover
