#ifndef TEMPLE_MODEL_HPP_
#define TEMPLE_MODEL_HPP_

#include <array>
#include <utility>

#include "temple/errors.hpp"

namespace temple {

// Model family for the 2x2 system U_t + (vU)_x = 0, U = (phi, y).
//   ArzGamma:      v = k - p(phi), p = (v_ref/gamma) phi^gamma, gamma > 0
//   ArzLog:        v = k - p(phi), p = v_ref log(phi)
//   Sedimentation: v = k * p(phi), p = (1 - phi)^2
// with k = y/phi in all cases.
enum class ModelKind { ArzGamma, ArzLog, Sedimentation };

struct ModelSpec {
  ModelKind kind = ModelKind::ArzGamma;
  double gamma = 1.0;
  double v_ref = 1.0;

  static ModelSpec arz(double gamma, double v_ref);
  static ModelSpec arz_log(double v_ref);
  static ModelSpec sedimentation();

  bool is_arz() const { return kind != ModelKind::Sedimentation; }
};

/// Curvilinear conserved triple (J*phi, J*y, J) at one grid node.
struct ConservedCell {
  double j_phi = 0.0;
  double j_y = 0.0;
  double jac = 1.0;
};

struct Primitive {
  double phi = 0.0;
  double v = 0.0;
  double k = 0.0;
};

using Flux3 = std::array<double, 3>;

double pressure(const ModelSpec& m, double phi);
double pressure_deriv(const ModelSpec& m, double phi);

/// k consistent with (phi, v): ARZ k = v + p(phi), sedimentation k = v / p(phi).
double invariant_from(const ModelSpec& m, double phi, double v);
/// v consistent with (phi, k): ARZ v = k - p(phi), sedimentation v = k * p(phi).
double velocity_from(const ModelSpec& m, double phi, double k);

Primitive primitive_from_conserved(const ModelSpec& m, const ConservedCell& c);
ConservedCell conserved_from_primitive(const ModelSpec& m, const Primitive& p, double jac);

/// y-value on the iso-velocity curve v = s, as a function of phi.
double eta(const ModelSpec& m, double phi, double s);

/// Constraint function with sign convention h >= 0 <=> v >= s. The argument may
/// violate box bounds but must have jac > 0 and j_phi > 0.
double h_constraint(const ModelSpec& m, const ConservedCell& c, double s);

/// Gradient of h_constraint with respect to (J*phi, J*y, J).
Flux3 h_gradient(const ModelSpec& m, const ConservedCell& c, double s);

/// Characteristic speeds (lambda_1, lambda_2 = v) of U_t + (vU)_x = 0.
std::pair<double, double> eigen_speeds(const ModelSpec& m, const Primitive& p);

/// Density on the curve v = s at invariant k (the phi-check / phi-hat of the
/// time-step bounds). ARZ gamma>0: ((gamma/v_ref)(k-s))^(1/gamma);
/// ARZ gamma=0: exp((k-s)/v_ref); sedimentation: 1 - sqrt(s/k).
double bound_inverse_density(const ModelSpec& m, double k, double s);

}  // namespace temple

#endif  // TEMPLE_MODEL_HPP_
