#include "temple/fo_scheme.hpp"

#include <cmath>
#include <limits>

#include "temple/errors.hpp"

namespace temple {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::vector<FirstOrderFlux> first_order_fluxes(std::span<const double> v_cells) {
  std::vector<FirstOrderFlux> out(v_cells.size());
  for (std::size_t i = 0; i < v_cells.size(); ++i) out[i].v_right = v_cells[i];
  return out;
}

double dtau_star(double d_xi, double jac, double phi, double v_j, double v_jp1, double eps_J) {
  if (!(v_j > v_jp1)) return kInf;
  return d_xi / (v_j - v_jp1) * std::min(jac - eps_J, jac * (1.0 - phi));
}

double dtau_star_star(const ModelSpec& model, double d_xi, double jac, double phi, double k,
                      double v_j, double v_jp1, const InvariantBox& box) {
  // Certification targets carry a small absolute band at the enforcement
  // tolerance: a state parked exactly on the box boundary (numerically
  // routine at fronts) would otherwise collapse the certified step to zero.
  constexpr double kBand = 1e-11;
  if (v_j < v_jp1) {
    const double v_hi = box.v_max + kBand;
    // For gamma > 0 and sedimentation the constraint only binds when k
    // exceeds v_max; for gamma = 0 it always binds.
    if (model.kind != ModelKind::ArzLog && !(k > v_hi)) return kInf;
    double phi_check;
    if (model.kind == ModelKind::Sedimentation) {
      if (!(k > 0.0)) return kInf;
      phi_check = 1.0 - std::sqrt(v_hi / k);
    } else {
      phi_check = bound_inverse_density(model, k, v_hi);
    }
    if (!(phi_check > 0.0)) return kInf;
    return d_xi * jac * (phi - phi_check) / (phi_check * (v_jp1 - v_j));
  }
  if (v_j > v_jp1) {
    const double v_lo = box.v_min - kBand;
    double phi_hat;
    if (model.kind == ModelKind::Sedimentation) {
      if (!(k > 0.0)) return kInf;  // k = 0 means v = 0 everywhere on the curve
      phi_hat = 1.0 - std::sqrt(std::max(v_lo, 0.0) / k);
    } else {
      phi_hat = bound_inverse_density(model, k, v_lo);
    }
    if (!(phi_hat > 0.0)) return 0.0;  // current state already at/below v_min
    return d_xi * jac * (phi_hat - phi) / (phi_hat * (v_j - v_jp1));
  }
  return kInf;
}

double bp_max_dtau(const MovingState& state, const ModelSpec& model,
                   std::span<const InvariantBox> boxes, const BoundaryPolicy& policy) {
  const int n = state.n();
  const double d_xi = state.grid.d_xi();
  const GhostPad pad = build_pad(state, model, policy);
  double bound = kInf;
  for (int j = 0; j < n; ++j) {
    const Primitive p = primitive_from_conserved(model, state.cells[j]);
    const double v_jp1 = pad.v[j + 1 + kHalo];
    const double ds = dtau_star(d_xi, state.cells[j].jac, p.phi, p.v, v_jp1, 1e-10);
    const double dss =
        dtau_star_star(model, d_xi, state.cells[j].jac, p.phi, p.k, p.v, v_jp1, boxes[j]);
    bound = std::min({bound, ds, dss});
  }
  return bound;
}

MovingState fo_step(const MovingState& state, const ModelSpec& model, double d_tau,
                    const BoundaryPolicy& policy) {
  if (!(d_tau > 0.0)) throw SolverError(state.step_index, "fo_step needs d_tau > 0");
  const int n = state.n();
  const double lambda = d_tau / state.grid.d_xi();
  const GhostPad pad = build_pad(state, model, policy);

  MovingState out = state;
  for (int j = 0; j < n; ++j) {
    const double v_j = pad.v[j + kHalo];
    const double v_jp1 = pad.v[j + 1 + kHalo];
    out.cells[j].jac = state.cells[j].jac + lambda * (v_jp1 - v_j);
    if (!(out.cells[j].jac > 0.0)) {
      throw SolverError(state.step_index, "fo_step: step too large, J <= 0 at cell " +
                                              std::to_string(j));
    }
    out.x_pos[j] = state.x_pos[j] + d_tau * v_j;
  }
  out.tau = state.tau + d_tau;
  out.step_index = state.step_index + 1;
  return out;
}

}  // namespace temple
