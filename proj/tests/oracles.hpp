#ifndef TEMPLE_TESTS_ORACLES_HPP_
#define TEMPLE_TESTS_ORACLES_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "temple/model.hpp"

namespace temple::oracle {

/// Eigenvalues of the numerically differentiated flux Jacobian of
/// F(U) = v(U) U, U = (phi, y). Independent of eigen_speeds.
inline std::array<double, 2> fd_flux_eigenvalues(const ModelSpec& m, double phi, double y,
                                                 double step = 1e-6) {
  const auto flux = [&](double p, double q) -> std::array<double, 2> {
    const double v = velocity_from(m, p, q / p);
    return {v * p, v * q};
  };
  const auto fp = flux(phi + step, y);
  const auto fm = flux(phi - step, y);
  const auto gp = flux(phi, y + step);
  const auto gm = flux(phi, y - step);
  const double a11 = (fp[0] - fm[0]) / (2 * step);
  const double a12 = (gp[0] - gm[0]) / (2 * step);
  const double a21 = (fp[1] - fm[1]) / (2 * step);
  const double a22 = (gp[1] - gm[1]) / (2 * step);
  const double tr = a11 + a22;
  const double det = a11 * a22 - a12 * a21;
  const double disc = std::sqrt(std::max(tr * tr / 4 - det, 0.0));
  return {tr / 2 - disc, tr / 2 + disc};
}

/// Dense sampling min/max of the quadratic through three points, the oracle
/// for the closed-form stencil extrema.
inline std::pair<double, double> sampled_quad_minmax(double x0, double x1, double x2, double f0,
                                                     double f1, double f2, int samples = 10000) {
  const auto q = [&](double x) {
    const double l0 = (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2));
    const double l1 = (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2));
    const double l2 = (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1));
    return l0 * f0 + l1 * f1 + l2 * f2;
  };
  double lo = q(x0), hi = q(x0);
  for (int i = 1; i <= samples; ++i) {
    const double x = x0 + (x2 - x0) * i / samples;
    const double val = q(x);
    lo = std::min(lo, val);
    hi = std::max(hi, val);
  }
  return {lo, hi};
}

/// Random valid primitive for a model.
inline Primitive random_primitive(const ModelSpec& m, std::mt19937& rng) {
  std::uniform_real_distribution<double> uphi(0.02, 0.98);
  std::uniform_real_distribution<double> uv(0.0, 1.0);
  Primitive p;
  p.phi = uphi(rng);
  p.v = uv(rng);
  p.k = invariant_from(m, p.phi, p.v);
  return p;
}

}  // namespace temple::oracle

#endif  // TEMPLE_TESTS_ORACLES_HPP_
