#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include <Eigen/Eigenvalues>

#include "netapprox/energy.hpp"
#include "netapprox/error.hpp"
#include "netapprox/geometry.hpp"
#include "netapprox/multigraph.hpp"

namespace netapprox {

/// Graph of the inclusions lying inside (-N, N)^3.
inline InclusionGraph box_graph(const SphereConfig& config, double delta) {
  const SphereConfig inside = restrict_box(config, config.box_half_width);
  return build_graph(components(inside), inside, delta);
}

/// (1/|Q_N|) min_u E(F_N, u, {xi . x_I}).
inline double h1_statistic(const InclusionGraph& g, const Vec3& xi, const SolverOptions& opts = {}) {
  if (!(xi.norm() > 0.0)) throw InvalidInput("h1_statistic: xi must be nonzero");
  return minimize_energy(g, affine_boundary_family(g, xi), opts).energy.total / g.box_volume();
}

inline double h1_statistic(const SphereConfig& config, double delta, const Vec3& xi, const SolverOptions& opts = {}) {
  return h1_statistic(box_graph(config, delta), xi, opts);
}

/// (1/|Q_N|) sum over undirected edges of mu_e^k.
inline double log_moment_statistic(const InclusionGraph& g, double k) {
  if (!(k >= 1.0)) throw InvalidInput("log_moment_statistic: k must be >= 1");
  double sum = 0.0;
  for (const auto& e : g.edges) sum += std::pow(e.mu, k);
  return sum / g.box_volume();
}

/// Total inclusion volume per unit box volume.
inline double density_estimate(const SphereConfig& config) {
  double vol = 0.0;
  for (const auto& c : components(config).components) vol += c.volume;
  return vol / config.box_volume();
}

// ---------------------------------------------------------------------------
// (H2)
// ---------------------------------------------------------------------------

/**
 * sum over ordered node pairs and edges of |b|^s, counted twice per
 * orientation so that it matches the double count of the gap energy.
 */
inline double family_power_sum(const BoundaryFamily& b, double s) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < b.size(); ++i)
    sum += std::pow(std::abs(b.forward[i]), s) + std::pow(std::abs(b.backward[i]), s);
  return 2.0 * sum;
}

inline double h2_denominator(const InclusionGraph& g, const BoundaryFamily& b, double s) {
  const double vol = g.box_volume();
  return vol * std::pow(family_power_sum(b, s) / vol, 2.0 / s);
}

/// [min_u E(b)] / (|Q_N| ((1/|Q_N|) sum |b|^s)^(2/s)); s == 2 gives a Rayleigh quotient.
inline double h2_ratio(const InclusionGraph& g, const BoundaryFamily& b, double s, const SolverOptions& opts = {}) {
  check_family(g, b);
  if (!(s >= 2.0)) throw InvalidInput("h2_ratio: s must be >= 2");
  if (b.is_zero()) throw InvalidInput("h2_ratio: zero family");
  return minimize_energy(g, b, opts).energy.total / h2_denominator(g, b, s);
}

struct H2Options {
  double s = 4.0;
  int n_starts = 16;
  int max_ascent_iters = 500;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  std::size_t exact_max_nodes = 20;  // s == 2 only
  SolverOptions solver;
};

struct H2Estimate {
  double value = 0.0;         // exact sup if computed, otherwise the ascent value
  double ascent_value = 0.0;  // best ratio reached by multi-start ascent (a lower bound)
  std::optional<double> exact;
  std::vector<double> per_start;
};

namespace detail {

/// Factorization of D + 2L reused across many right-hand sides.
class SpdFactor {
 public:
  SpdFactor(const Eigen::SparseMatrix<double>& K, std::size_t dense_threshold) {
    if (static_cast<std::size_t>(K.rows()) < dense_threshold) {
      dense_ = std::make_unique<Eigen::LLT<Eigen::MatrixXd>>(Eigen::MatrixXd(K));
      if (dense_->info() != Eigen::Success) throw SolverError("dense Cholesky failed", 0.0, 0);
    } else {
      sparse_ = std::make_unique<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>(K);
      if (sparse_->info() != Eigen::Success) throw SolverError("sparse Cholesky failed", 0.0, 0);
    }
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    return dense_ ? Eigen::VectorXd(dense_->solve(rhs)) : Eigen::VectorXd(sparse_->solve(rhs));
  }

 private:
  std::unique_ptr<Eigen::LLT<Eigen::MatrixXd>> dense_;
  std::unique_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> sparse_;
};

/*
 * Q(b) = min_u E(u, b) as a function of the stacked family
 * b = [forward; backward]. Q is a positive semidefinite quadratic form in
 * b; by the envelope theorem its gradient is +/- 4 mu_e r_e with r_e the
 * gap residual at the minimizer.
 */
class ReducedEnergy {
 public:
  ReducedEnergy(const InclusionGraph& g, const SolverOptions& opts)
      : g_(g), lap_(assemble(g, opts.mass)), factor_(lap_.system(), opts.dense_threshold) {}

  Eigen::Index edges() const noexcept { return static_cast<Eigen::Index>(g_.edges.size()); }

  double value(const Eigen::VectorXd& b, Eigen::VectorXd* grad) const {
    const Eigen::Index m = edges();
    const Eigen::VectorXd beta = b.head(m) - b.tail(m);
    const Eigen::VectorXd u = factor_.solve(lap_.rhs_from_antisymmetric(beta));
    double q = (lap_.mass.array() * u.array().square()).sum();
    if (grad) grad->resize(2 * m);
    for (Eigen::Index k = 0; k < m; ++k) {
      const Edge& e = g_.edges[static_cast<std::size_t>(k)];
      const double r = beta[k] + u[e.a] - u[e.b];
      q += 2.0 * e.mu * r * r;
      if (grad) {
        (*grad)[k] = 4.0 * e.mu * r;
        (*grad)[m + k] = -4.0 * e.mu * r;
      }
    }
    return q;
  }

  /// Dense matrix S with Q = beta^T S beta, beta the antisymmetric parts.
  Eigen::MatrixXd antisymmetric_form() const {
    const Eigen::Index m = edges();
    Eigen::MatrixXd S(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
      Eigen::VectorXd beta = Eigen::VectorXd::Zero(m);
      beta[k] = 1.0;
      const Eigen::VectorXd u = factor_.solve(lap_.rhs_from_antisymmetric(beta));
      // S e_k = 2 W (beta + B u)
      for (Eigen::Index j = 0; j < m; ++j) {
        const Edge& e = g_.edges[static_cast<std::size_t>(j)];
        S(j, k) = 2.0 * e.mu * (beta[j] + u[e.a] - u[e.b]);
      }
    }
    return 0.5 * (S + S.transpose());
  }

 private:
  const InclusionGraph& g_;
  LaplacianAssembly lap_;
  SpdFactor factor_;
};

inline double power_sum(const Eigen::VectorXd& b, double s) { return 2.0 * b.array().abs().pow(s).sum(); }

inline void normalize_ls(Eigen::VectorXd& b, double s) { b *= std::pow(1.0 / power_sum(b, s), 1.0 / s); }

/*
 * Ascent of Q on {b : 2 sum |b|^s = 1}. Each step moves to the maximizer
 * of the linearization <grad Q(b), .> on the constraint set, which cannot
 * decrease the convex Q; an extrapolated trial along the step is
 * accepted while it keeps improving Q.
 */
inline double ascend(const ReducedEnergy& q, Eigen::VectorXd b, double s, int max_iters, double tol) {
  const double dual = 1.0 / (s - 1.0);
  normalize_ls(b, s);
  Eigen::VectorXd grad;
  double val = q.value(b, &grad);
  for (int it = 0; it < max_iters; ++it) {
    if (grad.squaredNorm() == 0.0) break;
    Eigen::VectorXd step = grad.array().sign() * grad.array().abs().pow(dual);
    normalize_ls(step, s);
    Eigen::VectorXd next_grad;
    double next = q.value(step, &next_grad);
    if (!(next > val)) break;
    const Eigen::VectorXd dir = step - b;
    for (double t = 2.0; t <= 64.0; t *= 2.0) {
      Eigen::VectorXd trial = b + t * dir;
      normalize_ls(trial, s);
      Eigen::VectorXd trial_grad;
      const double tv = q.value(trial, &trial_grad);
      if (!(tv > next)) break;
      step = std::move(trial);
      next = tv;
      next_grad = std::move(trial_grad);
    }
    const double gain = next - val;
    b = std::move(step);
    grad = std::move(next_grad);
    val = next;
    if (gain <= tol * val) break;
  }
  return val;
}

}  // namespace detail

/**
 * Estimates sup_b h2_ratio(b) by multi-start ascent from Gaussian random
 * families plus the affine and midpoint families along the axes. The
 * ascent value is a lower bound on the sup; for s == 2 on small graphs the
 * sup is also computed exactly as the top generalized eigenvalue.
 */
inline H2Estimate h2_statistic(const InclusionGraph& g, const H2Options& opts = {}) {
  if (g.edges.empty()) throw InvalidInput("h2_statistic: graph has no edges");
  if (!(opts.s >= 2.0)) throw InvalidInput("h2_statistic: s must be >= 2");
  const double s = opts.s;
  const detail::ReducedEnergy q(g, opts.solver);
  const Eigen::Index m = q.edges();
  const double vol_factor = std::pow(g.box_volume(), 1.0 - 2.0 / s);

  std::vector<Eigen::VectorXd> starts;
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  for (int k = 0; k < opts.n_starts; ++k) {
    Eigen::VectorXd b(2 * m);
    for (Eigen::Index i = 0; i < 2 * m; ++i) b[i] = gauss(rng);
    starts.push_back(std::move(b));
  }
  const auto add_start = [&](const BoundaryFamily& f) {
    if (f.is_zero()) return;
    Eigen::VectorXd b(2 * m);
    b << f.forward, f.backward;
    starts.push_back(std::move(b));
  };
  for (int axis = 0; axis < 3; ++axis) {
    const Vec3 xi = Vec3::Unit(axis);
    add_start(affine_boundary_family(g, xi));
    // Graphs without contact geometry have no midpoint family.
    try {
      add_start(midpoint_boundary_family(g, xi));
    } catch (const InvalidInput&) {
    }
  }

  H2Estimate out;
  for (const auto& b0 : starts) {
    const double val = detail::ascend(q, b0, s, opts.max_ascent_iters, opts.tol) / vol_factor;
    out.per_start.push_back(val);
    out.ascent_value = std::max(out.ascent_value, val);
  }
  out.value = out.ascent_value;

  if (s == 2.0 && g.nodes.size() <= opts.exact_max_nodes) {
    // Q(b) = b^T C^T S C b with C = [I, -I]; the denominator is 2 |b|^2.
    const Eigen::MatrixXd S = q.antisymmetric_form();
    Eigen::MatrixXd C(m, 2 * m);
    C << Eigen::MatrixXd::Identity(m, m), -Eigen::MatrixXd::Identity(m, m);
    const Eigen::MatrixXd M = C.transpose() * S * C;
    const Eigen::MatrixXd B = 2.0 * Eigen::MatrixXd::Identity(2 * m, 2 * m);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(M, B, Eigen::EigenvaluesOnly);
    out.exact = es.eigenvalues().maxCoeff();
    out.value = *out.exact;
  }
  return out;
}

}  // namespace netapprox
