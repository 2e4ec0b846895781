#ifndef TEMPLE_NETWORK_HPP_
#define TEMPLE_NETWORK_HPP_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "temple/integrator.hpp"

namespace temple {

/// Interpolated boundary values of one road end (phi, v, J are interpolated
/// separately and floored; k is derived from the floored pair).
struct BoundaryTrace {
  double phi = 0.0;
  double v = 0.0;
  double k = 0.0;
  double jac = 1.0;
};

enum class RoadEnd { Entry, Exit };

struct Road {
  int id = 0;
  double x_entry = 0.0;
  double x_exit = 1.0;
  MovingState state;
  BoundaryPolicy policy;    // coupled ghosts are refreshed every step
  DomainMode mode;          // per-road domain mode
  InvariantBox initial_box{};
  int entry_junction = -1;  // junction feeding this road (road is outgoing there)
  int exit_junction = -1;   // junction this road feeds (road is incoming there)
};

struct Junction {
  int id = 0;
  std::vector<int> incoming;  // road ids
  std::vector<int> outgoing;
  /// distribution[j][i]: fraction of incoming road i's demand sent to
  /// outgoing road j; every column sums to 1.
  std::vector<std::vector<double>> distribution;
};

/// Degree-4 interpolation of phi, v, J at the road endpoint from the five
/// physically closest interior nodes, floored at eps_b.
BoundaryTrace boundary_trace(const Road& road, const ModelSpec& model, RoadEnd end,
                             double eps_b = 1e-10);

/// Junction coupling: traces in, ghost states per connected road end out.
class CouplingRule {
 public:
  virtual ~CouplingRule() = default;
  virtual void apply(const Junction& junction, const ModelSpec& model,
                     std::span<const BoundaryTrace> incoming_exit_traces,
                     std::span<const BoundaryTrace> outgoing_entry_traces,
                     std::span<ConservedCell> incoming_exit_ghosts,
                     std::span<ConservedCell> outgoing_entry_ghosts) const = 0;
};

/// Default rule: demand of incoming road i is d_i = phi_i v_i at its exit
/// trace; pairwise fluxes q_ji = alpha_ji d_i; an outgoing road receives the
/// total flux q_j at the flux-weighted invariant k on the free-flow branch
/// (capacity-capped at the critical density). Incoming exits extrapolate
/// their own trace.
class DemandProportionalCoupling : public CouplingRule {
 public:
  void apply(const Junction& junction, const ModelSpec& model,
             std::span<const BoundaryTrace> incoming_exit_traces,
             std::span<const BoundaryTrace> outgoing_entry_traces,
             std::span<ConservedCell> incoming_exit_ghosts,
             std::span<ConservedCell> outgoing_entry_ghosts) const override;
};

/// Free-flow state (phi, v) with phi*v = q at invariant k; q above the
/// critical-flux capacity returns the max-flow state. ARZ models only.
Primitive free_flow_state(const ModelSpec& model, double k, double q);

struct RoadNetwork {
  ModelSpec model;
  std::vector<Road> roads;
  std::vector<Junction> junctions;
  SolverOptions options;
  std::shared_ptr<const CouplingRule> coupling = std::make_shared<DemandProportionalCoupling>();

  Road& road_by_id(int id);
  const Road& road_by_id(int id) const;

  /// Validates junction tables, marks coupled road ends, seeds ghosts and
  /// per-road boxes. Must be called once before stepping.
  void wire();
};

struct NetworkStepReport {
  double d_tau = 0.0;
  LimiterStats limiter{};
  double min_phi = 1.0;
  double max_phi = 0.0;
  double max_v_violation = 0.0;
  double max_k_violation = 0.0;
};

/// Traces -> coupling -> ghost refresh -> shared-plan rk3 on every road.
NetworkStepReport network_step(RoadNetwork& net, double t_target);

struct NetworkRunConfig {
  RoadNetwork net;
  double t_final = 0.5;
  std::string name = "network";
};

/// JSON description (model, run parameters, roads, junctions).
NetworkRunConfig load_network_config(const std::string& json_text);

}  // namespace temple

#endif  // TEMPLE_NETWORK_HPP_
