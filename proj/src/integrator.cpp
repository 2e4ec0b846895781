#include "temple/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "temple/errors.hpp"

namespace temple {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double cfl_bound(const GhostPad& pad, double d_xi, double cfl) {
  double den = 0.0;
  for (int j = 0; j < pad.n; ++j) den = std::max(den, pad.cfl_den[j + kHalo]);
  return cfl * d_xi / std::max(den, 1e-14);
}

std::vector<double> stage_velocities(const GhostPad& pad) {
  // v of cells 0..n; entry n is the right ghost.
  std::vector<double> v(pad.n + 1);
  for (int i = 0; i <= pad.n; ++i) v[i] = pad.v[i + kHalo];
  return v;
}

}  // namespace

StepPlan plan_step(const MovingState& state, const ModelSpec& model,
                   std::span<const InvariantBox> boxes, const BoundaryPolicy& policy,
                   const SolverOptions& options, double remaining) {
  if (state.n() < 1) throw ConfigError("plan_step: empty grid");
  if (!(remaining > 0.0)) throw SolverError(state.step_index, "plan_step: no time remaining");
  const GhostPad pad = build_pad(state, model, policy);
  double bound =
      cfl_bound(pad, std::pow(state.grid.d_xi(), options.dtau_power), options.cfl);
  if (options.limiter) {
    bound = std::min(bound, bp_max_dtau(state, model, boxes, policy));
  }
  if (!(bound > 0.0)) {
    throw SolverError(state.step_index, "plan_step: nonpositive time-step bound");
  }
  StepPlan plan;
  plan.cfl = options.cfl;
  plan.d_tau = std::min(0.99 * bound, remaining);
  plan.lambda = plan.d_tau / state.grid.d_xi();
  return plan;
}

void apply_limited_update(MovingState& state, std::span<const Flux3> g_star,
                          std::span<const double> theta, std::span<const double> v_cells,
                          double lambda) {
  const int n = state.n();
  for (int j = 0; j < n; ++j) {
    Flux3 gl, gr;
    for (int m = 0; m < 3; ++m) {
      const double ghat_l = m == 2 ? -v_cells[j] : 0.0;
      const double ghat_r = m == 2 ? -v_cells[j + 1] : 0.0;
      gl[m] = theta[j] * (g_star[j][m] - ghat_l) + ghat_l;
      gr[m] = theta[j + 1] * (g_star[j + 1][m] - ghat_r) + ghat_r;
    }
    state.cells[j].j_phi -= lambda * (gr[0] - gl[0]);
    state.cells[j].j_y -= lambda * (gr[1] - gl[1]);
    state.cells[j].jac -= lambda * (gr[2] - gl[2]);
  }
}

StepReport rk3_step(MovingState& state, const ModelSpec& model, const StepPlan& plan,
                    std::span<const InvariantBox> boxes, const BoundaryPolicy& policy,
                    const SolverOptions& options) {
  const int n = state.n();
  const double d_tau = plan.d_tau;
  const double lambda = plan.lambda;

  const GhostPad pad0 = build_pad(state, model, policy);
  const std::vector<Flux3> g0 = weno5_interface_fluxes(pad0, options.eps_w);
  const std::vector<double> v0 = stage_velocities(pad0);

  MovingState stage1 = state;
  for (int j = 0; j < n; ++j) {
    stage1.cells[j].j_phi -= lambda * (g0[j + 1][0] - g0[j][0]);
    stage1.cells[j].j_y -= lambda * (g0[j + 1][1] - g0[j][1]);
    stage1.cells[j].jac -= lambda * (g0[j + 1][2] - g0[j][2]);
  }
  const GhostPad pad1 = build_pad(stage1, model, policy);
  const std::vector<Flux3> g1 = weno5_interface_fluxes(pad1, options.eps_w);

  MovingState stage2 = state;
  for (int j = 0; j < n; ++j) {
    stage2.cells[j].j_phi -= 0.25 * lambda * (g0[j + 1][0] - g0[j][0] + g1[j + 1][0] - g1[j][0]);
    stage2.cells[j].j_y -= 0.25 * lambda * (g0[j + 1][1] - g0[j][1] + g1[j + 1][1] - g1[j][1]);
    stage2.cells[j].jac -= 0.25 * lambda * (g0[j + 1][2] - g0[j][2] + g1[j + 1][2] - g1[j][2]);
  }
  const GhostPad pad2 = build_pad(stage2, model, policy);
  const std::vector<Flux3> g2 = weno5_interface_fluxes(pad2, options.eps_w);

  std::vector<Flux3> g_star(n + 1);
  for (int i = 0; i <= n; ++i) {
    for (int m = 0; m < 3; ++m) {
      g_star[i][m] = (g0[i][m] + g1[i][m] + 4.0 * g2[i][m]) / 6.0;
    }
  }

  StepReport report;
  report.d_tau = d_tau;
  std::vector<double> theta(n + 1, 1.0);
  if (options.limiter) {
    theta = select_theta(state, model, boxes, g_star, v0, lambda, policy.periodic, options.bp,
                         &report.limiter);
  } else {
    report.limiter.interfaces = n + 1;
  }

  apply_limited_update(state, g_star, theta, v0, lambda);

  // Positions: same RK3 stage combination applied to c = v of each stage (or
  // the literal forward-Euler formula behind the compatibility switch). Mesh
  // speeds are clamped into the step's invariant box: intermediate stages may
  // leave Omega near discontinuities and must not drive node crossings.
  const auto mesh_speed = [&](const GhostPad& pad, int j) {
    const double v = pad.v[j + kHalo];
    return options.limiter ? std::clamp(v, boxes[j].v_min, boxes[j].v_max) : v;
  };
  if (options.position_update == PositionUpdate::Rk3) {
    for (int j = 0; j < n; ++j) {
      state.x_pos[j] +=
          d_tau / 6.0 * (mesh_speed(pad0, j) + mesh_speed(pad1, j) + 4.0 * mesh_speed(pad2, j));
    }
  } else {
    for (int j = 0; j < n; ++j) state.x_pos[j] += d_tau * mesh_speed(pad0, j);
  }
  state.tau += d_tau;
  state.step_index += 1;

  // Monitor (and, with the limiter off, domain validation) of the accepted state.
  report.min_phi = kInf;
  report.max_phi = -kInf;
  report.min_jac = kInf;
  for (int j = 0; j < n; ++j) {
    const ConservedCell& c = state.cells[j];
    if (options.validate_domain) {
      if (!(c.jac > 0.0)) {
        throw DomainError("J", c.jac, "step " + std::to_string(state.step_index) +
                                          ": nonpositive J at cell " + std::to_string(j));
      }
      const double phi = c.j_phi / c.jac;
      if (!(phi > 0.0)) {
        throw DomainError("phi", phi, "step " + std::to_string(state.step_index) +
                                          ": negative phi at cell " + std::to_string(j));
      }
      if (!(phi < 1.0)) {
        throw DomainError("phi", phi, "step " + std::to_string(state.step_index) +
                                          ": phi >= 1 at cell " + std::to_string(j));
      }
    }
    const Primitive p = primitive_from_conserved(model, c);
    report.min_phi = std::min(report.min_phi, p.phi);
    report.max_phi = std::max(report.max_phi, p.phi);
    report.min_jac = std::min(report.min_jac, c.jac);
    report.max_v_violation = std::max({report.max_v_violation, boxes[j].v_min - p.v,
                                       p.v - boxes[j].v_max});
    report.max_k_violation = std::max({report.max_k_violation, boxes[j].k_min - p.k,
                                       p.k - boxes[j].k_max});
  }
  return report;
}

Simulation::Simulation(ModelSpec model, MovingState state, BoundaryPolicy policy,
                       SolverOptions options)
    : model_(model), state_(std::move(state)), policy_(std::move(policy)), options_(options) {
  mode_.kind = options.mode;
  // Hull of all cells' local boxes at tau = 0.
  const std::vector<InvariantBox> init = local_boxes(state_, model_, policy_, options_.bp);
  InvariantBox hull = init[0];
  for (const InvariantBox& b : init) hull = box_hull(hull, b);
  mode_.global_box = hull;
  initial_box_ = hull;
}

const std::vector<InvariantBox>& Simulation::prepare_boxes() {
  // The grown hull (Eq.-(764)-style update from the edge boxes) is the box in
  // Global mode and caps the per-cell boxes in Local mode.
  if (state_.step_index > 0) {
    const InvariantBox left = local_box_at(state_, model_, policy_, options_.bp, 0);
    const InvariantBox right = local_box_at(state_, model_, policy_, options_.bp, state_.n() - 1);
    mode_ = global_box_update(mode_, left, right);
  }
  if (mode_.kind == DomainModeKind::Local) {
    const InvariantBox* cap = options_.bp.hull_cap ? &mode_.global_box : nullptr;
    boxes_ = local_boxes(state_, model_, policy_, options_.bp, cap);
  } else {
    boxes_.assign(state_.n(), mode_.global_box);
  }
  return boxes_;
}

StepReport Simulation::advance(double t_target) {
  prepare_boxes();
  const StepPlan plan =
      plan_step(state_, model_, boxes_, policy_, options_, t_target - state_.tau);
  return rk3_step(state_, model_, plan, boxes_, policy_, options_);
}

Simulation::RunStats Simulation::run_to(double t_final) {
  RunStats stats;
  const double eps = 1e-12 * std::max(1.0, std::abs(t_final));
  while (state_.tau < t_final - eps) {
    const StepReport r = advance(t_final);
    ++stats.steps;
    stats.limiter.interfaces += r.limiter.interfaces;
    stats.limiter.theta_lt1 += r.limiter.theta_lt1;
    stats.limiter.step3_iterations += r.limiter.step3_iterations;
    stats.limiter.step3_fallbacks += r.limiter.step3_fallbacks;
    stats.max_v_violation = std::max(stats.max_v_violation, r.max_v_violation);
    stats.max_k_violation = std::max(stats.max_k_violation, r.max_k_violation);
    stats.min_phi = std::min(stats.min_phi, r.min_phi);
    stats.max_phi = std::max(stats.max_phi, r.max_phi);
    stats.min_jac = std::min(stats.min_jac, r.min_jac);
    if (stats.first_v_exceed_time < 0.0) {
      double vmax = -kInf;
      for (int j = 0; j < state_.n(); ++j) {
        vmax = std::max(vmax, primitive_from_conserved(model_, state_.cells[j]).v);
      }
      if (vmax > initial_box_.v_max) stats.first_v_exceed_time = state_.tau;
    }
  }
  return stats;
}

}  // namespace temple
