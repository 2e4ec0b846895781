#ifndef TEMPLE_WENO_HPP_
#define TEMPLE_WENO_HPP_

#include <span>
#include <vector>

#include "temple/mesh.hpp"

namespace temple {

/// Curvilinear flux G(U, c) = ((v - c) phi, (v - c) y, -c).
Flux3 pointwise_flux(const ModelSpec& model, const ConservedCell& cell, double c);

/// Upwind-biased fifth-order edge reconstruction at the right edge of the
/// center node, written in difference form so that constant data is
/// reproduced bitwise. Jiang-Shu weights, linear weights (1/10, 6/10, 3/10).
double weno5_edge(double fm2, double fm1, double f0, double fp1, double fp2, double eps_w);

/// Component-wise WENO5 interface fluxes of G with local Lax-Friedrichs
/// splitting; stage mesh speed c_j = v_j of the padded data. Returns fluxes at
/// interfaces 0..n (interface i sits between cells i-1 and i).
std::vector<Flux3> weno5_interface_fluxes(const GhostPad& pad, double eps_w = 1e-6);

}  // namespace temple

#endif  // TEMPLE_WENO_HPP_
