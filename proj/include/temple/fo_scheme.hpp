#ifndef TEMPLE_FO_SCHEME_HPP_
#define TEMPLE_FO_SCHEME_HPP_

#include <span>
#include <vector>

#include "temple/bp_types.hpp"
#include "temple/mesh.hpp"

namespace temple {

/// First-order interface flux: the triple at interface i (between cells i-1
/// and i) is (0, 0, -v_i) with v taken from the cell to the right.
struct FirstOrderFlux {
  double v_right = 0.0;
  Flux3 triple() const { return Flux3{0.0, 0.0, -v_right}; }
};

/// Fluxes at interfaces 0..n; v_cells spans cells 0..n (entry n is the right
/// ghost velocity).
std::vector<FirstOrderFlux> first_order_fluxes(std::span<const double> v_cells);

/// One step of the first-order scheme: (J phi, J y) are carried over bitwise,
/// J_j += lambda (v_{j+1} - v_j), positions advance with c = v.
MovingState fo_step(const MovingState& state, const ModelSpec& model, double d_tau,
                    const BoundaryPolicy& policy);

/// Largest certified time step: min over cells of min(dtau*, dtau**) for the
/// given per-cell boxes; +infinity when no cell constrains.
double bp_max_dtau(const MovingState& state, const ModelSpec& model,
                   std::span<const InvariantBox> boxes, const BoundaryPolicy& policy);

/// Per-cell pieces, exposed for tests: dtau* covers J > eps_J and phi < 1,
/// dtau** covers the velocity box.
double dtau_star(double d_xi, double jac, double phi, double v_j, double v_jp1, double eps_J);
double dtau_star_star(const ModelSpec& model, double d_xi, double jac, double phi, double k,
                      double v_j, double v_jp1, const InvariantBox& box);

}  // namespace temple

#endif  // TEMPLE_FO_SCHEME_HPP_
