#ifndef TEMPLE_MESH_HPP_
#define TEMPLE_MESH_HPP_

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "temple/model.hpp"

namespace temple {

/// Fixed computational grid on [xi_left, xi_right]; node j sits at the cell
/// center xi_left + (j + 1/2) d_xi, j = 0..n_cells-1.
struct Grid1D {
  double xi_left = 0.0;
  double xi_right = 1.0;
  int n_cells = 0;

  double d_xi() const { return (xi_right - xi_left) / n_cells; }
  double xi(int j) const { return xi_left + (j + 0.5) * d_xi(); }
  double length() const { return xi_right - xi_left; }
};

/// Grid state plus the physical node positions of the moving mesh.
struct MovingState {
  Grid1D grid;
  std::vector<ConservedCell> cells;
  std::vector<double> x_pos;
  double tau = 0.0;
  long step_index = 0;

  int n() const { return grid.n_cells; }
};

enum class BoundaryKind { Periodic, Outflow, Coupled };

struct EdgeCondition {
  BoundaryKind kind = BoundaryKind::Outflow;
  ConservedCell ghost{};  // used when kind == Coupled
};

struct BoundaryPolicy {
  bool periodic = false;
  EdgeCondition left{};
  EdgeCondition right{};

  static BoundaryPolicy make_periodic() {
    BoundaryPolicy p;
    p.periodic = true;
    return p;
  }
  static BoundaryPolicy make_outflow() { return BoundaryPolicy{}; }
};

/// Halo width required by the WENO5 stencils.
inline constexpr int kHalo = 3;

/// Node data padded with kHalo ghosts per side; index i maps to cell i - kHalo.
/// v/k/speed come from a clamped evaluation so that intermediate RK stages
/// outside the invariant domain still produce finite fluxes.
struct GhostPad {
  std::vector<ConservedCell> cell;
  std::vector<double> v;
  std::vector<double> k;
  std::vector<double> speed;    // max(|lambda_1|, |lambda_2|, |v|), the LLF alpha
  std::vector<double> cfl_den;  // max(|lambda_1|, |lambda_2|) + |v|, the CFL denominator

  int n = 0;
  int size() const { return n + 2 * kHalo; }
};

GhostPad build_pad(const MovingState& state, const ModelSpec& model, const BoundaryPolicy& policy);

/// Clamped primitive evaluation used for stage fluxes only: phi is pinned to
/// [1e-14, 1-1e-14] and J floored before dividing.
Primitive eval_primitive_clamped(const ModelSpec& model, const ConservedCell& c);

MovingState init_state(const Grid1D& grid, const ModelSpec& model,
                       const std::function<double(double)>& phi0,
                       const std::function<double(double)>& v0);

/// One row per node, columns x, phi, v, k, J.
void write_csv(std::ostream& os, const MovingState& state, const ModelSpec& model);
void write_csv(const std::string& path, const MovingState& state, const ModelSpec& model);

}  // namespace temple

#endif  // TEMPLE_MESH_HPP_
