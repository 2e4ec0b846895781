#ifndef TEMPLE_HARNESS_HPP_
#define TEMPLE_HARNESS_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "temple/integrator.hpp"
#include "temple/network.hpp"

namespace temple {

/// A catalog initial-value problem: model, domain, boundary handling, data.
struct CatalogEntry {
  ModelSpec model;
  double xi_left = 0.0;
  double xi_right = 1.0;
  bool periodic = false;
  double t_final = 1.0;
  std::function<double(double)> phi0;
  std::function<double(double)> v0;
};

/// Known ids: 5.1, 5.2, 5.3, T1..T5, 3state.
CatalogEntry catalog_entry(const std::string& id);
std::vector<std::string> catalog_ids();

struct ExperimentSpec {
  std::string name = "T1";  // catalog id
  int n_cells = 500;
  double cfl = 0.6;
  double t_final = -1.0;  // negative: catalog default
  DomainModeKind mode = DomainModeKind::Local;
  bool limiter = true;
  bool moving_mesh = true;   // false: fixed-mesh first-order LLF baseline
  bool first_order = false;  // moving-mesh first-order scheme instead of RK3-WENO
  double dtau_power = 1.0;   // d_tau ~ d_xi^power (accuracy studies use 5/3)
  bool log_limiter = false;  // per-step diagnostic line (theta<1 count, step-3 work)
  std::string out_dir;       // empty: no artifacts written
};

struct RunSummary {
  std::string name;
  bool completed = false;
  std::string abort_error;
  std::string abort_field;
  long steps = 0;
  double wall_seconds = 0.0;
  double t_reached = 0.0;
  double min_phi = 1.0;
  double max_phi = 0.0;
  double min_jac = 1.0;
  double max_v_violation = 0.0;
  double max_k_violation = 0.0;
  double err_jphi = 0.0;
  double err_jy = 0.0;
  double theta_lt1_fraction = 0.0;
  long step3_fallbacks = 0;
  double first_v_exceed_time = -1.0;

  bool monitors_ok(double tol = 1e-10) const {
    return completed && max_v_violation <= tol && max_k_violation <= tol && min_phi > 0.0 &&
           max_phi < 1.0;
  }
  std::string to_json() const;
};

/// Runs one experiment; writes <name>_final.csv and <name>_summary.json when
/// out_dir is set. A DomainError abort is reported in the summary, not thrown.
RunSummary run_experiment(const ExperimentSpec& spec);

/// Runs the experiment and hands back the final state (for studies).
struct RunOutput {
  RunSummary summary;
  MovingState state;
};
RunOutput run_for_state(const ExperimentSpec& spec);

/// Degree-(points-1) Lagrange interpolation through the given nodes.
double lagrange_interpolate(std::span<const double> xs, std::span<const double> fs, double xq);

struct ErrorReport {
  std::vector<int> n_values;
  std::vector<double> l1, l2, linf;       // paper convention (unweighted sums)
  std::vector<double> l1_weighted;        // dx-weighted variant, recorded alongside
  std::vector<double> order_l1, order_l2, order_linf;
  std::string to_string() const;
};

/// Moving-mesh errors of k against a self-generated reference run: for each
/// node, a degree-5 Lagrange polynomial through the six nearest reference
/// points evaluated at the node position.
ErrorReport convergence_study(const ExperimentSpec& base, const std::vector<int>& n_list,
                              int n_ref);

/// |sum (J phi)^end - sum (J phi)^0| and the same for (J y).
struct ConservationReport {
  double err_jphi = 0.0;
  double err_jy = 0.0;
};
ConservationReport conservation_report(const ExperimentSpec& spec);

struct ImpossibilityReport {
  double fixed_overshoot = 0.0;       // max_j v_j - v_dagger on the fixed mesh
  double moving_overshoot = 0.0;      // same for the moving-mesh first-order scheme
  double single_cell_overshoot = 0.0; // degenerate one-cell case
  std::string to_string() const;
};

/// Fixed-mesh first-order LLF vs the moving-mesh first-order scheme on
/// Riemann data with v_L = v_R.
ImpossibilityReport impossibility_demo(const ModelSpec& model, double phi_l, double phi_r,
                                       double v_common, int n_cells = 200, int steps = 10);

/// Built-in network presets 5.6 (diverging), 5.7 (merging), 5.8 (30 roads,
/// 24 junctions); returns the JSON config text.
std::string network_preset(const std::string& id, int n_per_road = -1);

struct NetworkRoadExtrema {
  int road_id = 0;
  double min_phi = 1.0, max_phi = 0.0;
  double min_v = 0.0, max_v = 0.0;
  double min_k = 0.0, max_k = 0.0;
  double jphi_initial = 0.0;  // sum of (J phi) d_xi at t = 0 and t = end
  double jphi_final = 0.0;
};

struct NetworkRunResult {
  bool completed = false;
  std::string abort_error;
  long steps = 0;
  double wall_seconds = 0.0;
  LimiterStats limiter{};
  double min_phi = 1.0;
  double max_v_violation = 0.0;
  double max_k_violation = 0.0;
  std::vector<NetworkRoadExtrema> roads;
  /// max over steps/nodes in [window_lo, window_hi] of v - (local box v_max),
  /// where the boxes are recomputed locally on the run's own states.
  double window_excess_over_local = 0.0;
  /// Final-state window quantities: the realized max v and the would-be
  /// local-box ceiling, for comparing a global-mode run against a local one.
  double window_max_v = 0.0;
  double window_max_local_box = 0.0;
  double grown_global_v_max = 0.0;  // max over roads of the global box v_max
  std::string to_json() const;
};

NetworkRunResult run_network(NetworkRunConfig cfg, const std::string& out_dir = "",
                             double window_lo = 0.0, double window_hi = 0.0);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace temple

#endif  // TEMPLE_HARNESS_HPP_
