#include "temple/model.hpp"

#include <cmath>
#include <string>

namespace temple {

namespace {

void check_phi(double phi) {
  // The open interval (0,1) is the state invariant; evaluation at phi == 1
  // itself is well defined for every variant and is permitted.
  if (!(phi > 0.0) || !(phi <= 1.0)) {
    throw DomainError("phi", phi, "phi = " + std::to_string(phi) + " outside (0, 1]");
  }
}

}  // namespace

ModelSpec ModelSpec::arz(double gamma, double v_ref) {
  if (!(gamma > 0.0)) throw ConfigError("ARZ gamma must be positive");
  if (!(v_ref > 0.0)) throw ConfigError("ARZ v_ref must be positive");
  return ModelSpec{ModelKind::ArzGamma, gamma, v_ref};
}

ModelSpec ModelSpec::arz_log(double v_ref) {
  if (!(v_ref > 0.0)) throw ConfigError("ARZ v_ref must be positive");
  return ModelSpec{ModelKind::ArzLog, 0.0, v_ref};
}

ModelSpec ModelSpec::sedimentation() { return ModelSpec{ModelKind::Sedimentation, 0.0, 0.0}; }

double pressure(const ModelSpec& m, double phi) {
  check_phi(phi);
  switch (m.kind) {
    case ModelKind::ArzGamma:
      return m.v_ref / m.gamma * std::pow(phi, m.gamma);
    case ModelKind::ArzLog:
      return m.v_ref * std::log(phi);
    case ModelKind::Sedimentation:
      return (1.0 - phi) * (1.0 - phi);
  }
  return 0.0;
}

double pressure_deriv(const ModelSpec& m, double phi) {
  check_phi(phi);
  switch (m.kind) {
    case ModelKind::ArzGamma:
      return m.v_ref * std::pow(phi, m.gamma - 1.0);
    case ModelKind::ArzLog:
      return m.v_ref / phi;
    case ModelKind::Sedimentation:
      return -2.0 * (1.0 - phi);
  }
  return 0.0;
}

double invariant_from(const ModelSpec& m, double phi, double v) {
  const double p = pressure(m, phi);
  if (m.is_arz()) return v + p;
  if (!(p > 0.0)) throw DomainError("phi", phi, "sedimentation p(phi) degenerate at phi = 1");
  return v / p;
}

double velocity_from(const ModelSpec& m, double phi, double k) {
  const double p = pressure(m, phi);
  return m.is_arz() ? k - p : k * p;
}

Primitive primitive_from_conserved(const ModelSpec& m, const ConservedCell& c) {
  if (!(c.jac > 0.0)) throw DomainError("J", c.jac, "J must be positive");
  if (!(c.j_phi > 0.0)) throw DomainError("j_phi", c.j_phi, "J*phi must be positive");
  Primitive out;
  out.phi = c.j_phi / c.jac;
  out.k = c.j_y / c.j_phi;
  out.v = velocity_from(m, out.phi, out.k);
  return out;
}

ConservedCell conserved_from_primitive(const ModelSpec& m, const Primitive& p, double jac) {
  const double k = invariant_from(m, p.phi, p.v);
  return ConservedCell{jac * p.phi, jac * p.phi * k, jac};
}

double eta(const ModelSpec& m, double phi, double s) {
  if (m.is_arz()) return phi * (s + pressure(m, phi));
  const double p = pressure(m, phi);
  if (!(p > 0.0)) throw DomainError("phi", phi, "sedimentation p(phi) degenerate at phi = 1");
  return phi * s / p;
}

double h_constraint(const ModelSpec& m, const ConservedCell& c, double s) {
  if (!(c.jac > 0.0)) throw DomainError("J", c.jac, "h requires J > 0");
  if (!(c.j_phi > 0.0)) throw DomainError("j_phi", c.j_phi, "h requires J*phi > 0");
  const double phi = c.j_phi / c.jac;
  const double p = pressure(m, phi);
  if (m.is_arz()) return c.j_y - c.j_phi * (s + p);
  return c.j_y * p - c.j_phi * s;
}

Flux3 h_gradient(const ModelSpec& m, const ConservedCell& c, double s) {
  const double phi = c.j_phi / c.jac;
  const double p = pressure(m, phi);
  const double dp = pressure_deriv(m, phi);
  if (m.is_arz()) {
    // h = Jy - Jphi*(s + p(Jphi/J))
    return Flux3{-s - p - phi * dp, 1.0, phi * phi * dp};
  }
  // h = Jy * p(Jphi/J) - Jphi * s
  const double y = c.j_y / c.jac;
  return Flux3{y * dp - s, p, -y * phi * dp};
}

std::pair<double, double> eigen_speeds(const ModelSpec& m, const Primitive& p) {
  const double dp = pressure_deriv(m, p.phi);
  if (m.is_arz()) return {p.v - p.phi * dp, p.v};
  return {p.v + p.phi * p.k * dp, p.v};
}

double bound_inverse_density(const ModelSpec& m, double k, double s) {
  switch (m.kind) {
    case ModelKind::ArzGamma: {
      const double arg = m.gamma / m.v_ref * (k - s);
      if (!(arg >= 0.0)) throw DomainError("k", k, "bound_inverse_density: k < s for ARZ gamma > 0");
      return std::pow(arg, 1.0 / m.gamma);
    }
    case ModelKind::ArzLog:
      return std::exp((k - s) / m.v_ref);
    case ModelKind::Sedimentation: {
      if (!(k > 0.0)) throw DomainError("k", k, "bound_inverse_density: sedimentation needs k > 0");
      const double arg = s / k;
      if (!(arg >= 0.0)) throw DomainError("s", s, "bound_inverse_density: negative s/k");
      return 1.0 - std::sqrt(arg);
    }
  }
  return 0.0;
}

}  // namespace temple
