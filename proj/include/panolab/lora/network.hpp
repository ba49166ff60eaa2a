#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "panolab/core/error.hpp"
#include "panolab/core/random.hpp"

namespace panolab::lora {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Activation { identity, relu, tanh };

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
  }
  return "identity";
}

inline Activation parse_activation(const std::string& name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw InvalidInput("unknown activation '" + name + "' (expected identity, relu or tanh)");
}

inline double activate(Activation a, double z) {
  switch (a) {
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::tanh: return std::tanh(z);
    case Activation::identity: break;
  }
  return z;
}

inline double activation_derivative(Activation a, double z) {
  switch (a) {
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::identity: break;
  }
  return 1.0;
}

/// f(x) = act(W x + b), W is out x in.
struct DenseLayer {
  MatrixXd weight;
  VectorXd bias;
  Activation activation = Activation::identity;

  Index in() const { return weight.cols(); }
  Index out() const { return weight.rows(); }
  Index parameter_count() const { return weight.size() + bias.size(); }
};

/// Feed-forward stack of dense layers. Parameters are flattened layer by
/// layer; within a layer the weight entries come first in row-major order,
/// then the bias.
class LinearNetwork {
 public:
  LinearNetwork() = default;

  explicit LinearNetwork(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw InvalidInput("network needs at least one layer");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const auto& layer = layers_[l];
      if (layer.bias.size() != layer.out()) throw InvalidInput("layer " + std::to_string(l) + ": bias size mismatch");
      if (l > 0 && layer.in() != layers_[l - 1].out()) {
        throw InvalidInput("layer " + std::to_string(l) + ": input width does not chain with the previous layer");
      }
      if (layer.in() == 0 || layer.out() == 0) throw InvalidInput("layer " + std::to_string(l) + ": empty dimension");
    }
    offsets_.push_back(0);
    for (const auto& layer : layers_) offsets_.push_back(offsets_.back() + layer.parameter_count());
  }

  /// Gaussian weights scaled by 1/sqrt(fan_in), small Gaussian biases.
  static LinearNetwork random(std::span<const int> dims, Activation activation, Rng& rng) {
    if (dims.size() < 2) throw InvalidInput("network dims need at least input and output width");
    std::vector<DenseLayer> layers;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      if (dims[l] <= 0 || dims[l + 1] <= 0) throw InvalidInput("network dims must be positive");
      DenseLayer layer;
      layer.weight = gaussian_matrix(dims[l + 1], dims[l], rng, 1.0 / std::sqrt(static_cast<double>(dims[l])));
      layer.bias = gaussian_vector(dims[l + 1], rng, 0.1);
      layer.activation = activation;
      layers.push_back(std::move(layer));
    }
    return LinearNetwork(std::move(layers));
  }

  std::size_t num_layers() const { return layers_.size(); }
  const DenseLayer& layer(std::size_t l) const { return layers_.at(l); }
  DenseLayer& layer(std::size_t l) { return layers_.at(l); }
  Index input_dim() const { return layers_.front().in(); }
  Index output_dim() const { return layers_.back().out(); }
  Index parameter_count() const { return offsets_.back(); }

  /// Index of the first weight entry of layer l in the flattened vector.
  Index weight_offset(std::size_t l) const { return offsets_.at(l); }
  Index bias_offset(std::size_t l) const { return offsets_.at(l) + layers_.at(l).weight.size(); }

  bool all_identity() const {
    return std::all_of(layers_.begin(), layers_.end(),
                       [](const DenseLayer& l) { return l.activation == Activation::identity; });
  }

  struct Trace {
    std::vector<VectorXd> inputs;          // h_l, input to layer l
    std::vector<VectorXd> preactivations;  // z_l = W_l h_l + b_l
    VectorXd output;
  };

  Trace trace(const VectorXd& x) const {
    check_input(x);
    Trace t;
    VectorXd h = x;
    for (const auto& layer : layers_) {
      t.inputs.push_back(h);
      VectorXd z = layer.weight * h + layer.bias;
      h = z.unaryExpr([&](double v) { return activate(layer.activation, v); });
      t.preactivations.push_back(std::move(z));
    }
    t.output = std::move(h);
    return t;
  }

  VectorXd forward(const VectorXd& x) const {
    check_input(x);
    VectorXd h = x;
    for (const auto& layer : layers_) {
      VectorXd z = layer.weight * h + layer.bias;
      h = z.unaryExpr([&](double v) { return activate(layer.activation, v); });
    }
    return h;
  }

  VectorXd parameters() const {
    VectorXd theta(parameter_count());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const auto& layer = layers_[l];
      Index k = weight_offset(l);
      for (Index i = 0; i < layer.out(); ++i)
        for (Index j = 0; j < layer.in(); ++j) theta(k++) = layer.weight(i, j);
      for (Index i = 0; i < layer.out(); ++i) theta(k++) = layer.bias(i);
    }
    return theta;
  }

  void set_parameters(const VectorXd& theta) {
    if (theta.size() != parameter_count()) throw InvalidInput("parameter vector has the wrong length");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      auto& layer = layers_[l];
      Index k = weight_offset(l);
      for (Index i = 0; i < layer.out(); ++i)
        for (Index j = 0; j < layer.in(); ++j) layer.weight(i, j) = theta(k++);
      for (Index i = 0; i < layer.out(); ++i) layer.bias(i) = theta(k++);
    }
  }

  /// Mutable reference to flattened parameter k.
  double& parameter(Index k) {
    const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), k);
    const std::size_t l = static_cast<std::size_t>(it - offsets_.begin()) - 1;
    auto& layer = layers_.at(l);
    const Index local = k - offsets_[l];
    if (local < layer.weight.size()) return layer.weight(local / layer.in(), local % layer.in());
    return layer.bias(local - layer.weight.size());
  }

 private:
  void check_input(const VectorXd& x) const {
    if (x.size() != input_dim()) throw InvalidInput("input has the wrong dimension");
  }

  std::vector<DenseLayer> layers_;
  std::vector<Index> offsets_;
};

enum class JacobianMethod { automatic, analytic, finite_difference };

struct JacobianResult {
  MatrixXd matrix;  // q x p, columns in flattened parameter order
  JacobianMethod method = JacobianMethod::analytic;
  bool kink_warning = false;  // a relu pre-activation sits within 1e-7 of 0
};

inline constexpr double kReluKinkThreshold = 1e-7;

inline bool relu_kink(const LinearNetwork& net, const VectorXd& x) {
  const auto t = net.trace(x);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    if (net.layer(l).activation != Activation::relu) continue;
    if ((t.preactivations[l].array().abs() < kReluKinkThreshold).any()) return true;
  }
  return false;
}

/// dF/dz_l at x: sensitivity of the output to the pre-activation of layer l.
inline MatrixXd output_sensitivity(const LinearNetwork& net, const VectorXd& x, std::size_t layer) {
  if (layer >= net.num_layers()) throw InvalidInput("layer index out of range");
  const auto t = net.trace(x);
  const std::size_t last = net.num_layers() - 1;
  MatrixXd m = t.preactivations[last]
                   .unaryExpr([&](double z) { return activation_derivative(net.layer(last).activation, z); })
                   .asDiagonal();
  for (std::size_t l = last; l > layer; --l) {
    const VectorXd d = t.preactivations[l - 1].unaryExpr(
        [&](double z) { return activation_derivative(net.layer(l - 1).activation, z); });
    m = (m * net.layer(l).weight) * d.asDiagonal();
  }
  return m;
}

/// Back-propagated Jacobian of the output with respect to every parameter.
inline MatrixXd analytic_jacobian(const LinearNetwork& net, const VectorXd& x) {
  const auto t = net.trace(x);
  const Index q = net.output_dim();
  MatrixXd jac(q, net.parameter_count());
  const std::size_t last = net.num_layers() - 1;
  MatrixXd m = t.preactivations[last]
                   .unaryExpr([&](double z) { return activation_derivative(net.layer(last).activation, z); })
                   .asDiagonal();
  for (std::size_t l = last + 1; l-- > 0;) {
    const auto& layer = net.layer(l);
    const VectorXd& h = t.inputs[l];
    Index k = net.weight_offset(l);
    for (Index i = 0; i < layer.out(); ++i)
      for (Index j = 0; j < layer.in(); ++j) jac.col(k++) = m.col(i) * h(j);
    jac.middleCols(net.bias_offset(l), layer.out()) = m;
    if (l > 0) {
      const VectorXd d = t.preactivations[l - 1].unaryExpr(
          [&](double z) { return activation_derivative(net.layer(l - 1).activation, z); });
      m = (m * layer.weight) * d.asDiagonal();
    }
  }
  return jac;
}

/// Central differences with step 1e-5 * max(1, |theta_k|) per coordinate.
inline MatrixXd finite_difference_jacobian(const LinearNetwork& net, const VectorXd& x) {
  LinearNetwork probe = net;
  MatrixXd jac(net.output_dim(), net.parameter_count());
  for (Index k = 0; k < net.parameter_count(); ++k) {
    double& p = probe.parameter(k);
    const double original = p;
    const double h = 1e-5 * std::max(1.0, std::abs(original));
    p = original + h;
    const VectorXd plus = probe.forward(x);
    p = original - h;
    const VectorXd minus = probe.forward(x);
    p = original;
    jac.col(k) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

/// Analytic for all-identity networks, central differences otherwise,
/// unless a method is forced.
inline JacobianResult network_jacobian(const LinearNetwork& net, const VectorXd& x,
                                       JacobianMethod method = JacobianMethod::automatic) {
  JacobianResult r;
  if (method == JacobianMethod::automatic) {
    method = net.all_identity() ? JacobianMethod::analytic : JacobianMethod::finite_difference;
  }
  r.method = method;
  r.kink_warning = relu_kink(net, x);
  r.matrix = method == JacobianMethod::analytic ? analytic_jacobian(net, x) : finite_difference_jacobian(net, x);
  return r;
}

/// Relative Frobenius distance ||a - b|| / ||a||.
inline double relative_frobenius_error(const MatrixXd& reference, const MatrixXd& other) {
  const double n = reference.norm();
  const double diff = (reference - other).norm();
  return n > 0.0 ? diff / n : diff;
}

}  // namespace panolab::lora
