#include "temple/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "temple/errors.hpp"

namespace temple {

Primitive eval_primitive_clamped(const ModelSpec& model, const ConservedCell& c) {
  constexpr double kPhiFloor = 1e-14;
  constexpr double kJFloor = 1e-14;
  constexpr double kCap = 1e12;
  const double jac = std::max(c.jac, kJFloor);
  double phi = c.j_phi / jac;
  phi = std::clamp(phi, kPhiFloor, 1.0 - kPhiFloor);
  const double jphi = std::max(c.j_phi, kJFloor * kPhiFloor);
  double k = c.j_y / jphi;
  k = std::clamp(k, -kCap, kCap);
  Primitive p;
  p.phi = phi;
  p.k = k;
  p.v = std::clamp(velocity_from(model, phi, k), -kCap, kCap);
  return p;
}

GhostPad build_pad(const MovingState& state, const ModelSpec& model, const BoundaryPolicy& policy) {
  const int n = state.n();
  GhostPad pad;
  pad.n = n;
  const int sz = pad.size();
  pad.cell.resize(sz);
  pad.v.resize(sz);
  pad.k.resize(sz);
  pad.speed.resize(sz);
  pad.cfl_den.resize(sz);

  for (int j = 0; j < n; ++j) pad.cell[j + kHalo] = state.cells[j];

  for (int g = 0; g < kHalo; ++g) {
    if (policy.periodic) {
      pad.cell[kHalo - 1 - g] = state.cells[(n - 1 - g % n + n) % n];
      pad.cell[kHalo + n + g] = state.cells[g % n];
    } else {
      pad.cell[kHalo - 1 - g] =
          policy.left.kind == BoundaryKind::Coupled ? policy.left.ghost : state.cells[0];
      pad.cell[kHalo + n + g] =
          policy.right.kind == BoundaryKind::Coupled ? policy.right.ghost : state.cells[n - 1];
    }
  }

  for (int i = 0; i < sz; ++i) {
    const Primitive p = eval_primitive_clamped(model, pad.cell[i]);
    pad.v[i] = p.v;
    pad.k[i] = p.k;
    const auto [l1, l2] = eigen_speeds(model, p);
    const double lmax = std::max(std::abs(l1), std::abs(l2));
    pad.speed[i] = std::max(lmax, std::abs(p.v));
    pad.cfl_den[i] = lmax + std::abs(p.v);
  }
  return pad;
}

MovingState init_state(const Grid1D& grid, const ModelSpec& model,
                       const std::function<double(double)>& phi0,
                       const std::function<double(double)>& v0) {
  if (grid.n_cells < 1 || !(grid.d_xi() > 0.0)) throw ConfigError("grid needs n_cells >= 1 and d_xi > 0");
  MovingState s;
  s.grid = grid;
  s.cells.resize(grid.n_cells);
  s.x_pos.resize(grid.n_cells);
  for (int j = 0; j < grid.n_cells; ++j) {
    const double xi = grid.xi(j);
    const double phi = phi0(xi);
    const double v = v0(xi);
    if (!(phi > 0.0) || !(phi < 1.0)) {
      throw DomainError("phi", phi, "initial phi outside (0,1) at xi = " + std::to_string(xi));
    }
    Primitive p;
    p.phi = phi;
    p.v = v;
    p.k = invariant_from(model, phi, v);
    s.cells[j] = conserved_from_primitive(model, p, 1.0);  // J(xi, 0) = 1
    s.x_pos[j] = xi;
  }
  return s;
}

void write_csv(std::ostream& os, const MovingState& state, const ModelSpec& model) {
  os << "x,phi,v,k,J\n";
  os << std::setprecision(17);
  for (int j = 0; j < state.n(); ++j) {
    const Primitive p = primitive_from_conserved(model, state.cells[j]);
    os << state.x_pos[j] << ',' << p.phi << ',' << p.v << ',' << p.k << ',' << state.cells[j].jac
       << '\n';
  }
}

void write_csv(const std::string& path, const MovingState& state, const ModelSpec& model) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  write_csv(os, state, model);
}

}  // namespace temple
