#pragma once

#include <cmath>
#include <numbers>

#include "netapprox/error.hpp"

namespace netapprox {

/**
 * Gap between the paraboloids z <= -a r^2 and z >= a r^2 + nu, cut at
 * radius d. The Keller profile w = (a r^2 + nu - z) / (2 a r^2 + nu)
 * interpolates linearly in z from 1 on the lower body to 0 on the upper.
 */
struct KellerParams {
  double a = 1.0;
  double nu = 1e-2;
  double d = 1.0;
  double gamma = 1.0;
};

struct QuadratureGrid {
  int radial = 256;
  int axial = 64;
};

struct KellerEnergies {
  double z_closed_form = 0.0;        // int |dw/dz|^2, exact
  double z_quadrature = 0.0;         // same, by quadrature
  double full_quadrature = 0.0;      // int |grad w|^2
  double weighted_quadrature = 0.0;  // int |grad w|^2 |x|^(2 gamma)
  double richardson_error = 0.0;     // |full(h) - full(h/2)| / 3
};

inline void validate(const KellerParams& p) {
  if (!(p.a > 0.0)) throw InvalidInput("keller: a must be > 0");
  if (!(p.nu > 0.0 && p.nu < 1.0)) throw InvalidInput("keller: nu must lie in (0, 1)");
  if (!(p.d > 0.0)) throw InvalidInput("keller: d must be > 0");
  if (!(p.gamma >= 0.0)) throw InvalidInput("keller: gamma must be >= 0");
}

/// (pi / 2a) ln(1 + 2 a d^2 / nu).
inline double keller_z_closed_form(const KellerParams& p) {
  return std::numbers::pi / (2.0 * p.a) * std::log1p(2.0 * p.a * p.d * p.d / p.nu);
}

namespace detail {

struct KellerSums {
  double z = 0.0, full = 0.0, weighted = 0.0;
};

/*
 * Midpoint rule in (s, t) in [0,1]^2 with
 *   r = r0 sinh(A s),  r0 = sqrt(nu / 2a),  A = asinh(d / r0),
 *   z = -a r^2 + t (2 a r^2 + nu),
 * which resolves the O(sqrt(nu)) boundary layer near the axis. The
 * angular integral contributes the factor 2 pi.
 */
inline KellerSums keller_midpoint(const KellerParams& p, int nr, int nz) {
  const double r0 = std::sqrt(p.nu / (2.0 * p.a));
  const double A = std::asinh(p.d / r0);
  const double hs = 1.0 / nr, ht = 1.0 / nz;
  KellerSums sum;
  for (int i = 0; i < nr; ++i) {
    const double s = (i + 0.5) * hs;
    const double r = r0 * std::sinh(A * s);
    const double dr_ds = r0 * A * std::cosh(A * s);
    const double width = 2.0 * p.a * r * r + p.nu;
    const double wz = -1.0 / width;
    for (int j = 0; j < nz; ++j) {
      const double t = (j + 0.5) * ht;
      const double z = -p.a * r * r + t * width;
      const double wr = 2.0 * p.a * r * (2.0 * z - p.nu) / (width * width);
      const double jac = 2.0 * std::numbers::pi * r * dr_ds * width * hs * ht;
      const double grad2 = wr * wr + wz * wz;
      sum.z += wz * wz * jac;
      sum.full += grad2 * jac;
      sum.weighted += grad2 * std::pow(r * r + z * z, p.gamma) * jac;
    }
  }
  return sum;
}

}  // namespace detail

/// Dirichlet energies of the Keller profile over the gap region.
inline KellerEnergies keller_energy(const KellerParams& p, const QuadratureGrid& grid = {}) {
  validate(p);
  if (grid.radial < 16 || grid.axial < 16) throw InvalidInput("keller: quadrature grid needs >= 16 points per axis");
  const auto coarse = detail::keller_midpoint(p, grid.radial, grid.axial);
  const auto fine = detail::keller_midpoint(p, 2 * grid.radial, 2 * grid.axial);
  KellerEnergies out;
  out.z_closed_form = keller_z_closed_form(p);
  out.z_quadrature = fine.z;
  out.full_quadrature = fine.full;
  out.weighted_quadrature = fine.weighted;
  out.richardson_error = std::abs(fine.full - coarse.full) / 3.0;
  return out;
}

}  // namespace netapprox
