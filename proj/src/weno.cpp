#include "temple/weno.hpp"

#include <algorithm>
#include <cmath>

namespace temple {

Flux3 pointwise_flux(const ModelSpec& model, const ConservedCell& cell, double c) {
  const Primitive p = primitive_from_conserved(model, cell);
  const double rel = p.v - c;
  const double phi = cell.j_phi / cell.jac;
  const double y = cell.j_y / cell.jac;
  return Flux3{rel * phi, rel * y, -c};
}

double weno5_edge(double fm2, double fm1, double f0, double fp1, double fp2, double eps_w) {
  const double da = fm1 - fm2;
  const double db = f0 - fm1;
  const double dc = fp1 - f0;
  const double dd = fp2 - fp1;

  const auto sq = [](double x) { return x * x; };
  const double b0 = (13.0 / 12.0) * sq(db - da) + 0.25 * sq(3.0 * db - da);
  const double b1 = (13.0 / 12.0) * sq(dc - db) + 0.25 * sq(db + dc);
  const double b2 = (13.0 / 12.0) * sq(dd - dc) + 0.25 * sq(3.0 * dc - dd);

  double a0 = 0.1 / sq(eps_w + b0);
  double a1 = 0.6 / sq(eps_w + b1);
  double a2 = 0.3 / sq(eps_w + b2);
  const double asum = a0 + a1 + a2;
  a0 /= asum;
  a1 /= asum;
  a2 /= asum;

  // Candidate edge values minus the anchor f0; exactly zero on constant data.
  const double r0 = (5.0 * db - 2.0 * da) * (1.0 / 6.0);
  const double r1 = (db + 2.0 * dc) * (1.0 / 6.0);
  const double r2 = (4.0 * dc - dd) * (1.0 / 6.0);

  return f0 + (a0 * r0 + a1 * r1 + a2 * r2);
}

namespace {

// Correction part only (reconstructed edge value minus the anchor f0).
inline double weno5_correction(double fm2, double fm1, double f0, double fp1, double fp2,
                               double eps_w) {
  return weno5_edge(fm2, fm1, f0, fp1, fp2, eps_w) - f0;
}

}  // namespace

std::vector<Flux3> weno5_interface_fluxes(const GhostPad& pad, double eps_w) {
  const int n = pad.n;
  const int sz = pad.size();

  // Node fluxes with c_j = v_j: G_j = (0, 0, -v_j) exactly.
  std::vector<Flux3> g(sz);
  std::vector<Flux3> u(sz);
  for (int i = 0; i < sz; ++i) {
    g[i] = Flux3{0.0, 0.0, -pad.v[i]};
    u[i] = Flux3{pad.cell[i].j_phi, pad.cell[i].j_y, pad.cell[i].jac};
  }

  std::vector<Flux3> out(n + 1);
  for (int i = 0; i <= n; ++i) {
    const int c = i + kHalo;  // padded index of the cell right of interface i
    double alpha = 0.0;
    for (int s = c - 3; s <= c + 2; ++s) alpha = std::max(alpha, pad.speed[s]);

    for (int m = 0; m < 3; ++m) {
      const auto fp = [&](int idx) { return 0.5 * (g[idx][m] + alpha * u[idx][m]); };
      const auto fm = [&](int idx) { return 0.5 * (g[idx][m] - alpha * u[idx][m]); };
      // Anchor terms in difference form keep constant data bitwise exact.
      const double anchor =
          g[c - 1][m] + 0.5 * ((g[c][m] - g[c - 1][m]) - alpha * (u[c][m] - u[c - 1][m]));
      const double corr_p =
          weno5_correction(fp(c - 3), fp(c - 2), fp(c - 1), fp(c), fp(c + 1), eps_w);
      const double corr_m = weno5_correction(fm(c + 2), fm(c + 1), fm(c), fm(c - 1), fm(c - 2), eps_w);
      out[i][m] = anchor + (corr_p + corr_m);
    }
  }
  return out;
}

}  // namespace temple
