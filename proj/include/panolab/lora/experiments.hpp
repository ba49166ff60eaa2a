#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "panolab/core/error.hpp"
#include "panolab/core/parallel.hpp"
#include "panolab/core/random.hpp"
#include "panolab/geometry/camera.hpp"
#include "panolab/geometry/sampling.hpp"
#include "panolab/geometry/warp.hpp"
#include "panolab/lora/adapter.hpp"
#include "panolab/lora/network.hpp"
#include "panolab/lora/rank.hpp"

namespace panolab::lora {

// ---------------------------------------------------------------------------
// Rank bound trials

struct RankTrialResult {
  std::uint64_t seed = 0;
  std::size_t network_depth = 0;
  std::size_t lora_rank = 0;
  std::size_t jacobian_rank = 0;
  std::size_t delta_rank = 0;
  std::size_t bound = 0;
  bool kink_warning = false;
  std::vector<double> delta_spectrum;

  bool satisfied() const { return delta_rank <= bound; }
  long margin() const { return static_cast<long>(bound) - static_cast<long>(delta_rank); }
};

/// Weight-parameter columns of J for the given layers.
inline MatrixXd restrict_to_weights(const LinearNetwork& net, const MatrixXd& jac, std::span<const std::size_t> layers) {
  Index cols = 0;
  for (auto l : layers) cols += net.layer(l).weight.size();
  MatrixXd out(jac.rows(), cols);
  Index k = 0;
  for (auto l : layers) {
    const Index n = net.layer(l).weight.size();
    out.middleCols(k, n) = jac.middleCols(net.weight_offset(l), n);
    k += n;
  }
  return out;
}

/// One draw of the bound rank(J_P dTheta) <= min(rank J_P, r), where J_P is
/// the Jacobian restricted to the adapted weights and dTheta = A B with
/// A: p_P x r and B: r x k stacks k parameter directions of rank r.
inline RankTrialResult run_rank_trial(const LinearNetwork& net, const VectorXd& x, std::span<const std::size_t> layers,
                                      std::size_t r, Rng& rng, double rel_tol = 1e-8,
                                      JacobianMethod method = JacobianMethod::analytic) {
  const JacobianResult jr = network_jacobian(net, x, method);
  const MatrixXd jp = restrict_to_weights(net, jr.matrix, layers);
  const auto ri = static_cast<Index>(r);
  const Index columns = std::max<Index>(ri + 4, 2 * ri);
  const MatrixXd a = gaussian_matrix(jp.cols(), ri, rng);
  const MatrixXd b = gaussian_matrix(ri, columns, rng);
  const MatrixXd delta = r == 0 ? MatrixXd::Zero(jp.rows(), columns) : MatrixXd((jp * a) * b);

  RankTrialResult t;
  t.network_depth = net.num_layers();
  t.lora_rank = r;
  t.kink_warning = jr.kink_warning;
  t.jacobian_rank = numerical_rank(jp, rel_tol).numerical_rank;
  const RankReport dr = numerical_rank(delta, rel_tol);
  t.delta_rank = dr.numerical_rank;
  t.delta_spectrum = dr.singular_values;
  t.bound = std::min(t.jacobian_rank, r);
  return t;
}

struct RankBoundConfig {
  std::vector<int> dims{64, 32};
  Activation activation = Activation::identity;
  std::vector<std::size_t> ranks{1, 2, 4, 8, 16};
  Placement placement = Placement::full;
  std::size_t trials = 100;  // per rank
  std::uint64_t seed = 0;
  double rel_tol = 1e-8;
  JacobianMethod jacobian = JacobianMethod::analytic;
};

struct RankBoundReport {
  std::vector<RankTrialResult> trials;  // rank-major, trial index ascending
  std::size_t violations = 0;
  std::vector<std::uint64_t> counterexample_seeds;
  long worst_margin = 0;
  std::size_t worst_trial = 0;
  RankReport aggregate;  // spectrum and rank of the tightest trial

  bool passed() const { return violations == 0; }
};

namespace detail {

inline RankBoundReport aggregate_trials(std::vector<RankTrialResult> trials, double rel_tol) {
  RankBoundReport rep;
  rep.trials = std::move(trials);
  rep.aggregate.rel_tolerance = rel_tol;
  if (rep.trials.empty()) return rep;
  rep.worst_margin = rep.trials.front().margin();
  for (std::size_t i = 0; i < rep.trials.size(); ++i) {
    const auto& t = rep.trials[i];
    if (!t.satisfied()) {
      ++rep.violations;
      rep.counterexample_seeds.push_back(t.seed);
    }
    if (t.margin() < rep.worst_margin) {
      rep.worst_margin = t.margin();
      rep.worst_trial = i;
    }
  }
  const auto& w = rep.trials[rep.worst_trial];
  rep.aggregate.singular_values = w.delta_spectrum;
  rep.aggregate.numerical_rank = w.delta_rank;
  rep.aggregate.bound = w.bound;
  rep.aggregate.satisfied = rep.violations == 0;
  return rep;
}

/// Gaussian input; for relu nets redrawn while a pre-activation sits on the kink.
inline VectorXd draw_input(const LinearNetwork& net, Rng& rng) {
  VectorXd x = gaussian_vector(net.input_dim(), rng);
  for (int attempt = 0; attempt < 16 && relu_kink(net, x); ++attempt) x = gaussian_vector(net.input_dim(), rng);
  return x;
}

}  // namespace detail

/// Random (net, x, adapter) draws for every requested rank.
inline RankBoundReport verify_rank_bound(const RankBoundConfig& cfg) {
  if (cfg.trials == 0) throw InvalidInput("trials must be at least 1");
  if (cfg.ranks.empty()) throw InvalidInput("rank list is empty");
  const std::size_t total = cfg.ranks.size() * cfg.trials;
  std::vector<RankTrialResult> results(total);
  {
    Rng probe(0);
    placement_layers(LinearNetwork::random(cfg.dims, cfg.activation, probe), cfg.placement);
  }
  parallel_for(total, [&](std::size_t i) {
    const std::size_t r = cfg.ranks[i / cfg.trials];
    const std::uint64_t seed = derive_seed(cfg.seed, {r, i % cfg.trials});
    Rng rng(seed);
    const LinearNetwork net = LinearNetwork::random(cfg.dims, cfg.activation, rng);
    const VectorXd x = detail::draw_input(net, rng);
    const auto layers = placement_layers(net, cfg.placement);
    results[i] = run_rank_trial(net, x, layers, r, rng, cfg.rel_tol, cfg.jacobian);
    results[i].seed = seed;
  });
  return detail::aggregate_trials(std::move(results), cfg.rel_tol);
}

/// Fixed network, random inputs and adapters.
inline RankBoundReport verify_rank_bound(const LinearNetwork& net, std::size_t r, std::size_t trials,
                                         double rel_tol = 1e-8, std::uint64_t seed = 0,
                                         Placement placement = Placement::full) {
  if (trials == 0) throw InvalidInput("trials must be at least 1");
  const auto layers = placement_layers(net, placement);
  std::vector<RankTrialResult> results(trials);
  parallel_for(trials, [&](std::size_t i) {
    const std::uint64_t s = derive_seed(seed, {r, i});
    Rng rng(s);
    const VectorXd x = detail::draw_input(net, rng);
    results[i] = run_rank_trial(net, x, layers, r, rng, rel_tol);
    results[i].seed = s;
  });
  return detail::aggregate_trials(std::move(results), rel_tol);
}

// ---------------------------------------------------------------------------
// Projection target family

/// Smooth single-channel texture that fades to zero (with zero slope) at the
/// pixel-footprint border, so warps of it have no coverage-edge jumps.
inline auto smooth_windowed_source(int size) {
  if (size < 4) throw InvalidInput("source size must be at least 4");
  return FunctionSource(size, size, 1, [size](double x, double y) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double n = size;
    const double wx = std::sin(std::numbers::pi * (x + 0.5) / n);
    const double wy = std::sin(std::numbers::pi * (y + 0.5) / n);
    const double u = x / n, v = y / n;
    const double tex = 0.5 + 0.25 * std::sin(two_pi * (3.1 * u + 1.7 * v) + 0.3) +
                       0.2 * std::cos(two_pi * (-1.3 * u + 2.7 * v) + 1.1) +
                       0.1 * std::sin(two_pi * 4.5 * u) * std::cos(two_pi * 3.8 * v);
    Sample s;
    s.channels = 1;
    s.value[0] = wx * wx * wy * wy * tex;
    return s;
  });
}

/// Default perturbation sizes for (fx, fy, cx, cy, skew, tx, ty, yaw_deg).
inline constexpr std::array<double, 8> kDefaultFamilySteps = {0.25, 0.25, 0.25, 0.25, 0.25, 0.005, 0.005, 0.25};

namespace detail {

template <typename S>
VectorXd flat_warp(const S& src, const Projection8DoF& p, const SceneModel& scene, int w, int h) {
  const auto res = warp_perspective_to_equirect<double>(src, p, scene, w, h);
  const auto& data = res.frame.image().data();
  return Eigen::Map<const VectorXd>(data.data(), static_cast<Index>(data.size()));
}

}  // namespace detail

/// Tangent directions of the 8-parameter projection family: column k is the
/// central difference of the flattened warp with respect to parameter k.
template <PerspectiveSource S>
MatrixXd projection_target_family(const Projection8DoF& base, const SceneModel& scene, const S& src, int out_width,
                                  int out_height, const std::array<double, 8>& steps = kDefaultFamilySteps) {
  MatrixXd family;
  const auto values = base.to_array();
  for (std::size_t k = 0; k < 8; ++k) {
    const std::string name = Projection8DoF::names[k];
    if (!(steps[k] > 0.0) || !std::isfinite(steps[k])) throw InvalidInput("step for " + name + " must be positive");
    auto plus = values, minus = values;
    plus[k] += steps[k];
    minus[k] -= steps[k];
    VectorXd fp, fm;
    try {
      fp = detail::flat_warp(src, Projection8DoF::from_array(plus), scene, out_width, out_height);
      fm = detail::flat_warp(src, Projection8DoF::from_array(minus), scene, out_width, out_height);
    } catch (const Error& e) {
      throw DomainError("warp is undefined when perturbing " + name + ": " + e.what());
    }
    if (family.size() == 0) family.resize(fp.size(), 8);
    family.col(static_cast<Index>(k)) = (fp - fm) / (2.0 * steps[k]);
  }
  return family;
}

/// Isometric copy of the columns of `family` in R^q: thin-QR coordinates
/// rotated by a seeded random orthogonal matrix. Inner products between
/// columns are preserved.
inline MatrixXd embed_targets(const MatrixXd& family, Index q, std::uint64_t seed) {
  const Index d = family.cols();
  if (q < d) throw InvalidInput("embedding dimension is smaller than the number of targets");
  if (d == 0) return MatrixXd(q, 0);
  if (family.rows() < d) throw InvalidInput("target family has fewer rows than columns");
  Eigen::HouseholderQR<MatrixXd> qr(family);
  const MatrixXd r = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  Rng rng(seed);
  Eigen::HouseholderQR<MatrixXd> rot(gaussian_matrix(q, q, rng));
  const MatrixXd orth = rot.householderQ() * MatrixXd::Identity(q, d);
  return orth * r;
}

// ---------------------------------------------------------------------------
// DoF coverage

struct CoverageOptions {
  std::size_t rank = 8;
  std::vector<std::size_t> layers;  // empty = every layer
  double alpha = 1.0;
  std::uint64_t seed = 0;
  double rel_tol = 1e-8;
};

struct CoverageReport {
  std::size_t target_dimension = 0;
  std::size_t lora_rank = 0;
  double fit_residual = 0.0;            // max relative residual over targets
  std::vector<double> residuals;        // per target
  std::vector<double> principal_angles; // d angles, ascending, padded with pi/2
  std::size_t reachable_dimension = 0;  // rank of the stacked output changes
  std::size_t jacobian_rank = 0;        // dimension of everything the layers can reach
  std::vector<double> reachable_spectrum;
  std::vector<std::size_t> layers;
};

namespace detail {

inline std::vector<std::size_t> resolve_layers(const LinearNetwork& net, const std::vector<std::size_t>& layers) {
  std::vector<std::size_t> out = layers;
  if (out.empty())
    for (std::size_t l = 0; l < net.num_layers(); ++l) out.push_back(l);
  for (auto l : out)
    if (l >= net.num_layers()) throw InvalidInput("coverage layer index out of range");
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) throw InvalidInput("coverage layers repeat");
  return out;
}

inline MatrixXd normalized_columns(const MatrixXd& m) {
  MatrixXd out = m;
  for (Index j = 0; j < out.cols(); ++j) {
    const double n = out.col(j).norm();
    if (n == 0.0) throw InvalidInput("target " + std::to_string(j) + " is the zero vector");
    out.col(j) /= n;
  }
  return out;
}

}  // namespace detail

/// Builds one adapter per layer whose combined rank-r update aims its output
/// changes at the targets. Output directions are ordered by how much target
/// energy they carry (best rank-k fit first), followed by the rest of the
/// reachable space, and dealt round-robin to the layers. The down factor
/// rows come from per-(layer, row) seeds, so the adapter at rank r is the
/// leading block of the adapter at any larger rank.
inline std::vector<LoraModule> build_covering_adapters(const MatrixXd& targets, const LinearNetwork& net,
                                                       const VectorXd& x, const CoverageOptions& opt) {
  const auto layers = detail::resolve_layers(net, opt.layers);
  const Index q = net.output_dim();
  const auto r = static_cast<Index>(opt.rank);

  std::vector<MatrixXd> sens;
  Index total = 0;
  for (auto l : layers) {
    sens.push_back(output_sensitivity(net, x, l));
    total += sens.back().cols();
  }
  MatrixXd joint(q, total);
  Index k = 0;
  for (const auto& m : sens) {
    joint.middleCols(k, m.cols()) = m;
    k += m.cols();
  }
  const MatrixXd reach = column_space_basis(joint, opt.rel_tol);

  MatrixXd ordered(q, 0);
  if (targets.cols() > 0) {
    const MatrixXd t = detail::normalized_columns(targets);
    ordered = column_space_basis(reach * (reach.transpose() * t), opt.rel_tol);
  }
  // Rest of the reachable space, orthogonal to the target-aligned directions.
  const MatrixXd rest = reach - ordered * (ordered.transpose() * reach);
  MatrixXd extra(q, 0);
  if (rest.cols() > 0) {
    Eigen::JacobiSVD<MatrixXd> svd(rest, Eigen::ComputeThinU);
    Index keep = 0;
    while (keep < svd.singularValues().size() && svd.singularValues()(keep) > 0.5) ++keep;
    extra = svd.matrixU().leftCols(keep);
  }
  MatrixXd directions(q, ordered.cols() + extra.cols());
  directions << ordered, extra;

  std::vector<LoraModule> adapters;
  const auto n_layers = static_cast<Index>(layers.size());
  for (Index li = 0; li < n_layers; ++li) {
    const auto l = layers[static_cast<std::size_t>(li)];
    const auto& layer = net.layer(l);
    const Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(sens[static_cast<std::size_t>(li)]);
    LoraModule m{l, MatrixXd(r, layer.in()), MatrixXd::Zero(layer.out(), r), opt.alpha};
    for (Index s = 0; s < r; ++s) {
      const Index j = li + s * n_layers;
      if (j < directions.cols()) m.up.col(s) = cod.solve(directions.col(j));
      Rng rng(derive_seed(opt.seed, {l, static_cast<std::uint64_t>(s)}));
      m.down.row(s) = gaussian_vector(layer.in(), rng).transpose();
    }
    adapters.push_back(std::move(m));
  }
  return adapters;
}

/// How well the first-order output changes of a rank-r adapter, stacked
/// over `inputs`, span the target directions.
inline CoverageReport dof_coverage_experiment(const MatrixXd& targets, const LinearNetwork& net,
                                              std::span<const VectorXd> inputs, const CoverageOptions& opt) {
  if (inputs.empty()) throw InvalidInput("coverage experiment needs at least one input");
  if (targets.rows() != net.output_dim()) throw InvalidInput("targets must live in the network output space");
  CoverageReport rep;
  rep.lora_rank = opt.rank;
  rep.target_dimension = static_cast<std::size_t>(targets.cols());
  rep.layers = detail::resolve_layers(net, opt.layers);
  if (!(opt.alpha > 0.0)) throw InvalidInput("adapter scale must be positive");

  const Index d = targets.cols();
  if (d > 0 && numerical_rank(targets, opt.rel_tol).numerical_rank != static_cast<std::size_t>(d)) {
    throw InvalidInput("target directions are not linearly independent");
  }

  const auto adapters = build_covering_adapters(targets, net, inputs.front(), opt);
  const MatrixXd y = delta_output_matrix(net, adapters, inputs, JacobianMethod::analytic);
  if (!y.allFinite()) throw NumericalError("output changes are not finite");

  {
    MatrixXd joint(net.output_dim(), 0);
    for (auto l : rep.layers) {
      MatrixXd m = output_sensitivity(net, inputs.front(), l);
      MatrixXd next(joint.rows(), joint.cols() + m.cols());
      next << joint, m;
      joint = std::move(next);
    }
    rep.jacobian_rank = numerical_rank(joint, opt.rel_tol).numerical_rank;
  }
  const RankReport yr = numerical_rank(y, opt.rel_tol);
  rep.reachable_dimension = yr.numerical_rank;
  rep.reachable_spectrum = yr.singular_values;
  if (d == 0) return rep;

  const MatrixXd s = column_space_basis(y, opt.rel_tol);
  const MatrixXd t = detail::normalized_columns(targets);
  for (Index j = 0; j < d; ++j) {
    const VectorXd resid = t.col(j) - s * (s.transpose() * t.col(j));
    rep.residuals.push_back(resid.norm());
  }
  rep.fit_residual = *std::max_element(rep.residuals.begin(), rep.residuals.end());

  rep.principal_angles = principal_angles(column_space_basis(targets, opt.rel_tol), s);
  while (rep.principal_angles.size() < static_cast<std::size_t>(d)) rep.principal_angles.push_back(std::numbers::pi / 2);
  return rep;
}

// ---------------------------------------------------------------------------
// Coverage sweep over ranks, with the target family built from a warp

struct CoverageConfig {
  std::vector<int> dims{64, 32};
  Activation activation = Activation::identity;
  std::vector<std::size_t> ranks{5, 8, 16};
  Placement placement = Placement::full;
  std::uint64_t seed = 0;
  double rel_tol = 1e-8;
  double family_rel_tol = 1e-6;
  std::size_t inputs = 32;
  double alpha = 1.0;
  double threshold = 1e-6;  // a rank covers the family when fit_residual is below this
  int warp_width = 128;
  int warp_height = 64;
  int source_size = 128;
  double fov_deg = 90.0;
};

struct CoverageSweep {
  RankReport family_rank;
  std::vector<CoverageReport> per_rank;
  std::vector<bool> covered;
};

/// Base projection used for the family: centered camera, square pixels.
inline Projection8DoF coverage_base_projection(const CoverageConfig& cfg) {
  const auto k = CameraIntrinsics::from_fov(cfg.fov_deg, cfg.source_size, cfg.source_size);
  const double c = (cfg.source_size - 1) / 2.0;
  return {k.fx, k.fy, c, c, 0.0, 0.0, 0.0, 0.0};
}

inline CoverageSweep run_coverage_sweep(const CoverageConfig& cfg) {
  if (cfg.inputs == 0) throw InvalidInput("inputs must be at least 1");
  CoverageSweep sweep;
  const auto src = smooth_windowed_source(cfg.source_size);
  const MatrixXd family =
      projection_target_family(coverage_base_projection(cfg), SceneModel{}, src, cfg.warp_width, cfg.warp_height);
  sweep.family_rank = check_rank_bound(family, 8, cfg.family_rel_tol);

  Rng rng(derive_seed(cfg.seed, {0}));
  const LinearNetwork net = LinearNetwork::random(cfg.dims, cfg.activation, rng);
  std::vector<VectorXd> inputs;
  for (std::size_t i = 0; i < cfg.inputs; ++i) inputs.push_back(detail::draw_input(net, rng));
  const MatrixXd targets = embed_targets(family, net.output_dim(), derive_seed(cfg.seed, {1}));

  CoverageOptions opt;
  opt.layers = placement_layers(net, cfg.placement);
  opt.alpha = cfg.alpha;
  opt.seed = derive_seed(cfg.seed, {2});
  opt.rel_tol = cfg.rel_tol;
  for (auto r : cfg.ranks) {
    opt.rank = r;
    sweep.per_rank.push_back(dof_coverage_experiment(targets, net, inputs, opt));
    sweep.covered.push_back(sweep.per_rank.back().fit_residual < cfg.threshold);
  }
  return sweep;
}

}  // namespace panolab::lora
