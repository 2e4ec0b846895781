#ifndef TEMPLE_BP_HPP_
#define TEMPLE_BP_HPP_

#include <span>
#include <utility>
#include <vector>

#include "temple/bp_types.hpp"
#include "temple/mesh.hpp"

namespace temple {

struct LimiterStats {
  long interfaces = 0;
  long theta_lt1 = 0;
  long step3_iterations = 0;
  long step3_fallbacks = 0;
};

/// Min/max of the quadratic through (x0,f0),(x1,f1),(x2,f2) over [x0, x2].
struct MinMax {
  double lo = 0.0;
  double hi = 0.0;
};
MinMax quad_minmax(double x0, double x1, double x2, double f0, double f1, double f2);

/// Per-cell boxes from quadratic interpolation of v and k over the moving
/// stencil {x_{j-1}, x_j, x_{j+1}}; boundary cells use periodic/coupled ghost
/// values when available and one-sided stencils otherwise. v_min is floored at
/// cfg.v_lower_clamp. When `cap` is given, boxes are intersected with it
/// (padded by cfg.cap_slack) and re-widened minimally to contain the cell's
/// own current values.
std::vector<InvariantBox> local_boxes(const MovingState& state, const ModelSpec& model,
                                      const BoundaryPolicy& policy, const BpConfig& cfg,
                                      const InvariantBox* cap = nullptr);

InvariantBox local_box_at(const MovingState& state, const ModelSpec& model,
                          const BoundaryPolicy& policy, const BpConfig& cfg, int j,
                          const InvariantBox* cap = nullptr);

/// Grow a global box by the two edge boxes (component-wise hull).
DomainMode global_box_update(DomainMode mode, const InvariantBox& edge_left,
                             const InvariantBox& edge_right);

/// Parametrized BP flux limiter (Steps 1-3). g_star holds the effective
/// high-order fluxes at interfaces 0..n; v_cells holds v of cells 0..n where
/// entry n is the right ghost. Returns theta per interface, in [0,1], such
/// that the limited update satisfies every cell's box plus J > eps_J and
/// phi in (0,1).
std::vector<double> select_theta(const MovingState& state_n, const ModelSpec& model,
                                 std::span<const InvariantBox> boxes,
                                 std::span<const Flux3> g_star, std::span<const double> v_cells,
                                 double lambda, bool periodic, const BpConfig& cfg,
                                 LimiterStats* stats = nullptr);

namespace bp_detail {

/// Step-1 decoupling of one linear constraint T = G - (thR*gp - thL*gm) >= 0
/// into per-side bounds; gm/gp are the lambda-scaled dagger fluxes.
std::pair<double, double> decouple_constraint(double G, double gm, double gp, double eps1);

/// The candidate update U(th) = u_fo - (thR*dr - thL*dl) evaluated through
/// the constraint function; NaN when the candidate leaves {J>0, 0<phi<1}.
double h_of_theta(const ModelSpec& model, const Flux3& u_fo, const Flux3& dl, const Flux3& dr,
                  double thL, double thR, double s);

/// Largest t in [0,1] with h(t*thL, t*thR; s) >= -tol (ge) or <= tol (!ge),
/// by 60 bisection rounds; this is the Step-2/Step-3 ray search.
double ray_feasible_scale(const ModelSpec& model, const Flux3& u_fo, const Flux3& dl,
                          const Flux3& dr, double thL, double thR, double s, bool ge,
                          double tol);

}  // namespace bp_detail

}  // namespace temple

#endif  // TEMPLE_BP_HPP_
