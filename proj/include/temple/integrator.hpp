#ifndef TEMPLE_INTEGRATOR_HPP_
#define TEMPLE_INTEGRATOR_HPP_

#include <span>
#include <vector>

#include "temple/bp.hpp"
#include "temple/fo_scheme.hpp"
#include "temple/mesh.hpp"
#include "temple/weno.hpp"

namespace temple {

enum class PositionUpdate { Rk3, Euler };

struct SolverOptions {
  double cfl = 0.6;
  bool limiter = true;
  DomainModeKind mode = DomainModeKind::Local;
  PositionUpdate position_update = PositionUpdate::Rk3;
  BpConfig bp{};
  double eps_w = 1e-6;
  /// CFL time step uses cfl * d_xi^dtau_power; accuracy studies set 5/3 so the
  /// third-order time error scales like the fifth-order spatial error.
  double dtau_power = 1.0;
  /// With the limiter off, accepted states are still validated for domain
  /// sanity (phi in (0,1), J > 0) so breakdowns surface as DomainError.
  bool validate_domain = true;
};

struct StepPlan {
  double d_tau = 0.0;
  double lambda = 0.0;
  double cfl = 0.6;
};

struct StepReport {
  double d_tau = 0.0;
  LimiterStats limiter{};
  double min_phi = 0.0;
  double max_phi = 0.0;
  double min_jac = 0.0;
  double max_v_violation = 0.0;  // against the boxes used this step
  double max_k_violation = 0.0;
};

/// Time step 0.99 * min(CFL bound, dtau*, dtau**) truncated to `remaining`;
/// the BP bounds are skipped when options.limiter is false.
StepPlan plan_step(const MovingState& state, const ModelSpec& model,
                   std::span<const InvariantBox> boxes, const BoundaryPolicy& policy,
                   const SolverOptions& options, double remaining);

/// The conservative update U^{n+1} = U^n - lambda (Gt_{j+1/2} - Gt_{j-1/2})
/// with Gt = theta (G* - g*) + g*. v_cells spans cells 0..n (entry n is the
/// right ghost velocity). Positions and tau are not touched.
void apply_limited_update(MovingState& state, std::span<const Flux3> g_star,
                          std::span<const double> theta, std::span<const double> v_cells,
                          double lambda);

/// One TVD-RK3 step with the effective-flux limiter. Boxes must be the ones
/// the plan was made with.
StepReport rk3_step(MovingState& state, const ModelSpec& model, const StepPlan& plan,
                    std::span<const InvariantBox> boxes, const BoundaryPolicy& policy,
                    const SolverOptions& options);

/// Orchestrates boxes -> plan -> rk3 per step and owns the domain mode.
class Simulation {
 public:
  Simulation(ModelSpec model, MovingState state, BoundaryPolicy policy, SolverOptions options);

  const MovingState& state() const { return state_; }
  MovingState& state() { return state_; }
  const ModelSpec& model() const { return model_; }
  const SolverOptions& options() const { return options_; }
  const DomainMode& domain_mode() const { return mode_; }
  BoundaryPolicy& policy() { return policy_; }
  const std::vector<InvariantBox>& last_boxes() const { return boxes_; }

  /// Boxes for the upcoming step (also grows the global box in Global mode).
  const std::vector<InvariantBox>& prepare_boxes();

  /// One step toward t_target (truncated); returns the per-step report.
  StepReport advance(double t_target);

  /// Steps until t_final; aggregates limiter statistics and box violations.
  struct RunStats {
    long steps = 0;
    LimiterStats limiter{};
    double max_v_violation = 0.0;
    double max_k_violation = 0.0;
    double min_phi = 1.0;
    double max_phi = 0.0;
    double min_jac = 1.0;
    double first_v_exceed_time = -1.0;  // vs the initial global box (monitor)
  };
  RunStats run_to(double t_final);

  InvariantBox initial_global_box() const { return initial_box_; }

 private:
  ModelSpec model_;
  MovingState state_;
  BoundaryPolicy policy_;
  SolverOptions options_;
  DomainMode mode_;
  InvariantBox initial_box_{};
  std::vector<InvariantBox> boxes_;
};

}  // namespace temple

#endif  // TEMPLE_INTEGRATOR_HPP_
