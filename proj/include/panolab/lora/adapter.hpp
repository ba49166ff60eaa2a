#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "panolab/core/error.hpp"
#include "panolab/core/random.hpp"
#include "panolab/lora/network.hpp"

namespace panolab::lora {

/// Low-rank update of one layer's weight: dW = alpha * up * down.
struct LoraModule {
  std::size_t target_layer = 0;
  MatrixXd down;  // B, r x n_in
  MatrixXd up;    // A, n_out x r
  double alpha = 1.0;

  Index rank() const { return down.rows(); }

  void validate() const {
    if (down.rows() != up.cols()) throw InvalidInput("lora factors disagree on rank");
    if (!std::isfinite(alpha)) throw InvalidInput("lora scale must be finite");
  }

  MatrixXd delta_weight() const {
    validate();
    if (rank() == 0) return MatrixXd::Zero(up.rows(), down.cols());
    return alpha * up * down;
  }

  static LoraModule random(const LinearNetwork& net, std::size_t layer, Index r, Rng& rng, double alpha = 1.0) {
    if (layer >= net.num_layers()) throw InvalidInput("lora target layer out of range");
    const auto& l = net.layer(layer);
    return LoraModule{layer, gaussian_matrix(r, l.in(), rng), gaussian_matrix(l.out(), r, rng), alpha};
  }
};

/// base_output + alpha * A (B h).
inline VectorXd lora_forward(const VectorXd& h, const LoraModule& lora, const VectorXd& base_output) {
  lora.validate();
  if (lora.down.cols() != h.size()) throw InvalidInput("lora down projection does not match the input width");
  if (lora.up.rows() != base_output.size()) throw InvalidInput("lora up projection does not match the output width");
  if (lora.rank() == 0) return base_output;
  return base_output + lora.alpha * (lora.up * (lora.down * h));
}

/// Flattened parameter perturbation for a set of adapters on distinct layers.
inline VectorXd parameter_delta(const LinearNetwork& net, std::span<const LoraModule> loras) {
  VectorXd delta = VectorXd::Zero(net.parameter_count());
  std::vector<bool> used(net.num_layers(), false);
  for (const auto& lora : loras) {
    if (lora.target_layer >= net.num_layers()) throw InvalidInput("lora target layer out of range");
    if (used[lora.target_layer]) {
      throw InvalidInput("two adapters target layer " + std::to_string(lora.target_layer));
    }
    used[lora.target_layer] = true;
    const auto& layer = net.layer(lora.target_layer);
    if (lora.down.cols() != layer.in() || lora.up.rows() != layer.out()) {
      throw InvalidInput("adapter on layer " + std::to_string(lora.target_layer) + " has mismatched dimensions");
    }
    const MatrixXd dw = lora.delta_weight();
    Index k = net.weight_offset(lora.target_layer);
    for (Index i = 0; i < dw.rows(); ++i)
      for (Index j = 0; j < dw.cols(); ++j) delta(k++) = dw(i, j);
  }
  return delta;
}

/// J(theta) * dTheta at input x.
inline VectorXd first_order_delta(const LinearNetwork& net, std::span<const LoraModule> loras, const VectorXd& x,
                                  JacobianMethod method = JacobianMethod::automatic) {
  const VectorXd delta = parameter_delta(net, loras);
  if (loras.empty()) return VectorXd::Zero(net.output_dim());
  return network_jacobian(net, x, method).matrix * delta;
}

/// One first-order output change per input, as columns (q x m).
inline MatrixXd delta_output_matrix(const LinearNetwork& net, std::span<const LoraModule> loras,
                                    std::span<const VectorXd> inputs,
                                    JacobianMethod method = JacobianMethod::automatic) {
  if (inputs.empty()) throw InvalidInput("delta_output_matrix needs at least one input");
  const VectorXd delta = parameter_delta(net, loras);
  MatrixXd out = MatrixXd::Zero(net.output_dim(), static_cast<Index>(inputs.size()));
  if (loras.empty()) return out;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    out.col(static_cast<Index>(i)) = network_jacobian(net, inputs[i], method).matrix * delta;
  }
  return out;
}

/// Which layers receive adapters. Layers alternate between an attention-like
/// role (even index) and a plain linear role (odd index).
enum class Placement { attention_like_only, linear_only, full };

inline std::string to_string(Placement p) {
  switch (p) {
    case Placement::attention_like_only: return "attention_like_only";
    case Placement::linear_only: return "linear_only";
    case Placement::full: return "full";
  }
  return "full";
}

inline Placement parse_placement(const std::string& name) {
  if (name == "attention_like_only") return Placement::attention_like_only;
  if (name == "linear_only") return Placement::linear_only;
  if (name == "full") return Placement::full;
  throw InvalidInput("unknown placement '" + name + "' (expected attention_like_only, linear_only or full)");
}

inline std::vector<std::size_t> placement_layers(const LinearNetwork& net, Placement p) {
  std::vector<std::size_t> layers;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const bool attention_like = l % 2 == 0;
    if (p == Placement::full || (p == Placement::attention_like_only && attention_like) ||
        (p == Placement::linear_only && !attention_like)) {
      layers.push_back(l);
    }
  }
  if (layers.empty()) {
    throw InvalidInput("placement " + to_string(p) + " selects no layer of a " + std::to_string(net.num_layers()) +
                       "-layer network");
  }
  return layers;
}

/// Span oracle: stacks J * vec(A_i B_i) for `samples` random rank-r factor
/// pairs on each placement layer, all at the single input x.
inline MatrixXd sampled_delta_span(const LinearNetwork& net, Index r, std::span<const std::size_t> layers,
                                   const VectorXd& x, std::size_t samples, std::uint64_t seed) {
  const MatrixXd jac = network_jacobian(net, x).matrix;
  MatrixXd out(net.output_dim(), static_cast<Index>(samples));
  for (std::size_t s = 0; s < samples; ++s) {
    Rng rng(derive_seed(seed, {s}));
    std::vector<LoraModule> loras;
    for (auto l : layers) loras.push_back(LoraModule::random(net, l, r, rng));
    out.col(static_cast<Index>(s)) = jac * parameter_delta(net, loras);
  }
  return out;
}

}  // namespace panolab::lora
