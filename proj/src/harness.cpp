#include "temple/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <cstdio>

#include <json.hpp>

#include "temple/errors.hpp"

namespace temple {

namespace {

using nlohmann::json;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Kahan-compensated sums: the conservation ledger reports drifts near 1e-14,
// well below the naive summation error of a few hundred cells.
double sum_jphi(const MovingState& s) {
  double acc = 0.0, carry = 0.0;
  for (const ConservedCell& c : s.cells) {
    const double y = c.j_phi - carry;
    const double t = acc + y;
    carry = (t - acc) - y;
    acc = t;
  }
  return acc;
}

double sum_jy(const MovingState& s) {
  double acc = 0.0, carry = 0.0;
  for (const ConservedCell& c : s.cells) {
    const double y = c.j_y - carry;
    const double t = acc + y;
    carry = (t - acc) - y;
    acc = t;
  }
  return acc;
}

double initial_min_v(const MovingState& s, const ModelSpec& m) {
  double vmin = kInf;
  for (const ConservedCell& c : s.cells) {
    vmin = std::min(vmin, primitive_from_conserved(m, c).v);
  }
  return vmin;
}

}  // namespace

CatalogEntry catalog_entry(const std::string& id) {
  CatalogEntry e;
  if (id == "5.1") {
    e.model = ModelSpec::arz_log(0.4);
    e.xi_left = 0.0;
    e.xi_right = 1.0;
    e.periodic = true;
    e.t_final = 0.1;
    e.phi0 = [](double) { return 0.5; };
    e.v0 = [](double xi) { return 0.1 + 0.4 * std::cos(2.0 * M_PI * xi); };
    return e;
  }
  if (id == "5.2") {
    e.model = ModelSpec::arz(2.0, 1.0);
    e.xi_left = -2.0;
    e.xi_right = 2.0;
    e.periodic = true;
    e.t_final = 1.0;
    e.phi0 = [](double xi) { return (xi >= -0.2 && xi <= 0.2) ? 0.6 : 0.5; };
    e.v0 = [](double) { return 0.6; };
    return e;
  }
  if (id == "5.3") {
    e.model = ModelSpec::sedimentation();
    e.xi_left = 0.0;
    e.xi_right = 4.0;
    e.periodic = false;
    e.t_final = 1.0;
    e.phi0 = [](double) { return 0.4; };
    e.v0 = [](double xi) {
      if (xi <= 0.5 || xi >= 3.5) return 0.1;
      const double a = (3.5 - xi) * (xi - 0.5);
      return 0.1 + 0.01 * a * std::sin(10.0 * M_PI * (xi - 0.5) * (3.5 - xi));
    };
    return e;
  }
  const auto riemann = [&e](ModelSpec m, double pl, double vl, double pr, double vr) {
    e.model = m;
    e.xi_left = -1.0;
    e.xi_right = 1.0;
    e.periodic = false;
    e.t_final = 1.0;
    e.phi0 = [pl, pr](double xi) { return xi < 0.0 ? pl : pr; };
    e.v0 = [vl, vr](double xi) { return xi < 0.0 ? vl : vr; };
  };
  if (id == "T1") {
    riemann(ModelSpec::arz(2.0, 1.0), 0.8, 0.4, 0.1, 0.4);
    return e;
  }
  if (id == "T2") {
    riemann(ModelSpec::arz(1.0, 1.0), 0.5, 0.1, 1e-8, 0.4);
    return e;
  }
  if (id == "T3") {
    riemann(ModelSpec::arz_log(1.0), 0.8, 0.4, 1e-10, 0.4);
    return e;
  }
  if (id == "T4") {
    riemann(ModelSpec::sedimentation(), 0.55, 0.0405, 0.1, 0.0405);
    return e;
  }
  if (id == "T5") {
    riemann(ModelSpec::sedimentation(), 0.8, 0.024, 0.1, 0.243);
    return e;
  }
  if (id == "3state") {
    e.model = ModelSpec::arz(3.0, 3.0);
    e.xi_left = -1.0;
    e.xi_right = 1.0;
    e.periodic = false;
    e.t_final = 1.0;
    e.phi0 = [](double xi) {
      if (xi < -0.05) return 0.4762;
      if (xi <= 0.05) return 0.2;
      return 0.4;
    };
    e.v0 = [](double xi) {
      if (xi < -0.05) return 0.092;
      if (xi <= 0.05) return 0.092;
      return 0.036;
    };
    return e;
  }
  throw ConfigError("unknown catalog id: " + id);
}

std::vector<std::string> catalog_ids() {
  return {"5.1", "5.2", "5.3", "T1", "T2", "T3", "T4", "T5", "3state"};
}

std::string RunSummary::to_json() const {
  json j;
  j["name"] = name;
  j["completed"] = completed;
  if (!abort_error.empty()) {
    j["abort_error"] = abort_error;
    j["abort_field"] = abort_field;
  }
  j["steps"] = steps;
  j["t_reached"] = t_reached;
  j["wall_seconds"] = wall_seconds;
  j["min_phi"] = min_phi;
  j["max_phi"] = max_phi;
  j["min_J"] = min_jac;
  j["max_v_violation"] = max_v_violation;
  j["max_k_violation"] = max_k_violation;
  j["err_Jphi"] = err_jphi;
  j["err_Jy"] = err_jy;
  j["theta_lt1_fraction"] = theta_lt1_fraction;
  j["step3_fallbacks"] = step3_fallbacks;
  j["first_v_exceed_time"] = first_v_exceed_time;
  return j.dump(2);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  os << text;
}

namespace {

RunSummary run_moving(const ExperimentSpec& spec, const CatalogEntry& entry, MovingState* out) {
  const double t_final = spec.t_final > 0.0 ? spec.t_final : entry.t_final;
  Grid1D grid{entry.xi_left, entry.xi_right, spec.n_cells};
  MovingState state = init_state(grid, entry.model, entry.phi0, entry.v0);
  BoundaryPolicy policy =
      entry.periodic ? BoundaryPolicy::make_periodic() : BoundaryPolicy::make_outflow();

  SolverOptions options;
  options.cfl = spec.cfl;
  options.limiter = spec.limiter;
  options.mode = spec.mode;
  options.dtau_power = spec.dtau_power;
  // The physical floor v >= 0 applies only to data that respects it; catalog
  // entries with negative velocities (ARZ-log) run without a floor.
  options.bp.v_lower_clamp = initial_min_v(state, entry.model) >= 0.0 ? 0.0 : -kInf;

  RunSummary summary;
  summary.name = spec.name;
  const double jphi0 = sum_jphi(state);
  const double jy0 = sum_jy(state);

  const auto t0 = std::chrono::steady_clock::now();
  if (!spec.first_order) {
    Simulation sim(entry.model, std::move(state), policy, options);
    long theta_lt1 = 0, interfaces = 0;
    try {
      summary.min_phi = kInf;
      summary.max_phi = -kInf;
      summary.min_jac = kInf;
      while (sim.state().tau < t_final - 1e-12) {
        const StepReport r = sim.advance(t_final);
        ++summary.steps;
        if (spec.log_limiter) {
          std::printf("step %ld tau=%.6f dtau=%.3e theta<1 %ld/%ld step3-iters %ld fallbacks %ld\n",
                      summary.steps, sim.state().tau, r.d_tau, r.limiter.theta_lt1,
                      r.limiter.interfaces, r.limiter.step3_iterations,
                      r.limiter.step3_fallbacks);
        }
        interfaces += r.limiter.interfaces;
        theta_lt1 += r.limiter.theta_lt1;
        summary.step3_fallbacks += r.limiter.step3_fallbacks;
        summary.min_phi = std::min(summary.min_phi, r.min_phi);
        summary.max_phi = std::max(summary.max_phi, r.max_phi);
        summary.min_jac = std::min(summary.min_jac, r.min_jac);
        summary.max_v_violation = std::max(summary.max_v_violation, r.max_v_violation);
        summary.max_k_violation = std::max(summary.max_k_violation, r.max_k_violation);
        if (summary.first_v_exceed_time < 0.0) {
          double vmax = -kInf;
          for (int j = 0; j < sim.state().n(); ++j) {
            vmax = std::max(vmax, primitive_from_conserved(entry.model, sim.state().cells[j]).v);
          }
          if (vmax > sim.initial_global_box().v_max) {
            summary.first_v_exceed_time = sim.state().tau;
          }
        }
      }
      summary.completed = true;
    } catch (const DomainError& e) {
      summary.abort_error = e.what();
      summary.abort_field = e.field();
    } catch (const Error& e) {
      summary.abort_error = e.what();
    }
    if (interfaces > 0) {
      summary.theta_lt1_fraction = static_cast<double>(theta_lt1) / interfaces;
    }
    summary.t_reached = sim.state().tau;
    summary.err_jphi = std::abs(sum_jphi(sim.state()) - jphi0);
    summary.err_jy = std::abs(sum_jy(sim.state()) - jy0);
    if (out) *out = sim.state();
    if (!spec.out_dir.empty()) {
      std::filesystem::create_directories(spec.out_dir);
      write_csv(spec.out_dir + "/" + spec.name + "_final.csv", sim.state(), entry.model);
    }
  } else {
    // Moving-mesh first-order scheme, stepped at its certified bounds.
    MovingState s = std::move(state);
    InvariantBox track_v{};
    try {
      while (s.tau < t_final - 1e-12) {
        const std::vector<InvariantBox> boxes = local_boxes(s, entry.model, policy, options.bp);
        const GhostPad pad = build_pad(s, entry.model, policy);
        double speed = 1e-14;
        for (int j = 0; j < s.n(); ++j) speed = std::max(speed, pad.cfl_den[j + kHalo]);
        double bound = std::min(options.cfl * grid.d_xi() / speed,
                                bp_max_dtau(s, entry.model, boxes, policy));
        const double d_tau = std::min(0.99 * bound, t_final - s.tau);
        s = fo_step(s, entry.model, d_tau, policy);
        ++summary.steps;
        for (int j = 0; j < s.n(); ++j) {
          const Primitive p = primitive_from_conserved(entry.model, s.cells[j]);
          summary.min_phi = std::min(summary.min_phi, p.phi);
          summary.max_phi = std::max(summary.max_phi, p.phi);
          summary.min_jac = std::min(summary.min_jac, s.cells[j].jac);
          summary.max_v_violation = std::max({summary.max_v_violation, boxes[j].v_min - p.v,
                                              p.v - boxes[j].v_max});
          (void)track_v;
        }
      }
      summary.completed = true;
    } catch (const DomainError& e) {
      summary.abort_error = e.what();
      summary.abort_field = e.field();
    } catch (const Error& e) {
      summary.abort_error = e.what();
    }
    summary.t_reached = s.tau;
    summary.err_jphi = std::abs(sum_jphi(s) - jphi0);
    summary.err_jy = std::abs(sum_jy(s) - jy0);
    if (out) *out = s;
    if (!spec.out_dir.empty()) {
      std::filesystem::create_directories(spec.out_dir);
      write_csv(spec.out_dir + "/" + spec.name + "_final.csv", s, entry.model);
    }
  }
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!spec.out_dir.empty()) {
    write_text_file(spec.out_dir + "/" + spec.name + "_summary.json", summary.to_json());
  }
  return summary;
}

// Fixed-mesh first-order local Lax-Friedrichs baseline on U_t + (vU)_x = 0.
struct FixedMeshRun {
  double max_v = -kInf;
  double v0_max = -kInf;  // initial maximum, measured identically
  double min_phi = kInf;
};

FixedMeshRun fixed_mesh_llf(const ModelSpec& model, const CatalogEntry& entry, int n, int steps) {
  const double dx = (entry.xi_right - entry.xi_left) / n;
  std::vector<double> phi(n), y(n);
  for (int j = 0; j < n; ++j) {
    const double xi = entry.xi_left + (j + 0.5) * dx;
    phi[j] = entry.phi0(xi);
    y[j] = phi[j] * invariant_from(model, phi[j], entry.v0(xi));
  }
  FixedMeshRun run;
  const auto v_of = [&](int j) {
    return velocity_from(model, phi[j], y[j] / phi[j]);
  };
  for (int j = 0; j < n; ++j) run.v0_max = std::max(run.v0_max, v_of(j));
  const auto speed_of = [&](int j) {
    Primitive p{phi[j], v_of(j), y[j] / phi[j]};
    const auto [l1, l2] = eigen_speeds(model, p);
    return std::max(std::abs(l1), std::abs(l2));
  };
  for (int step = 0; step < steps; ++step) {
    double smax = 1e-14;
    for (int j = 0; j < n; ++j) smax = std::max(smax, speed_of(j));
    const double dt = 0.9 * dx / smax;
    std::vector<double> fphi(n + 1), fy(n + 1);
    for (int i = 0; i <= n; ++i) {
      const int jl = std::max(i - 1, 0);
      const int jr = std::min(i, n - 1);
      const double vl = v_of(jl), vr = v_of(jr);
      const double a = std::max(speed_of(jl), speed_of(jr));
      fphi[i] = 0.5 * (vl * phi[jl] + vr * phi[jr]) - 0.5 * a * (phi[jr] - phi[jl]);
      fy[i] = 0.5 * (vl * y[jl] + vr * y[jr]) - 0.5 * a * (y[jr] - y[jl]);
    }
    const double lam = dt / dx;
    for (int j = 0; j < n; ++j) {
      phi[j] -= lam * (fphi[j + 1] - fphi[j]);
      y[j] -= lam * (fy[j + 1] - fy[j]);
    }
    for (int j = 0; j < n; ++j) {
      run.min_phi = std::min(run.min_phi, phi[j]);
      if (phi[j] > 0.0) run.max_v = std::max(run.max_v, v_of(j));
    }
  }
  return run;
}

}  // namespace

RunSummary run_experiment(const ExperimentSpec& spec) {
  const CatalogEntry entry = catalog_entry(spec.name);
  if (!spec.moving_mesh) {
    // Fixed-mesh baseline: report the overshoot monitors only.
    RunSummary summary;
    summary.name = spec.name + "_fixed";
    const FixedMeshRun run = fixed_mesh_llf(entry.model, entry, spec.n_cells, 10);
    summary.completed = run.min_phi > 0.0;
    summary.min_phi = run.min_phi;
    summary.max_v_violation = run.max_v - run.v0_max;
    return summary;
  }
  return run_moving(spec, entry, nullptr);
}

RunOutput run_for_state(const ExperimentSpec& spec) {
  const CatalogEntry entry = catalog_entry(spec.name);
  RunOutput out;
  out.summary = run_moving(spec, entry, &out.state);
  return out;
}

double lagrange_interpolate(std::span<const double> xs, std::span<const double> fs, double xq) {
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double li = 1.0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (j != i) li *= (xq - xs[j]) / (xs[i] - xs[j]);
    }
    acc += li * fs[i];
  }
  return acc;
}

std::string ErrorReport::to_string() const {
  const auto ord = [](const std::vector<double>& o, std::size_t i) {
    if (i == 0) return std::string("   --");
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%5.2f", o[i - 1]);
    return std::string(buf);
  };
  std::ostringstream os;
  os << "    N        L1  order        L2  order      Linf  order\n";
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    char line[160];
    std::snprintf(line, sizeof(line), "%5d %9.3e  %s %9.3e  %s %9.3e  %s\n", n_values[i], l1[i],
                  ord(order_l1, i).c_str(), l2[i], ord(order_l2, i).c_str(), linf[i],
                  ord(order_linf, i).c_str());
    os << line;
  }
  return os.str();
}

ErrorReport convergence_study(const ExperimentSpec& base, const std::vector<int>& n_list,
                              int n_ref) {
  const CatalogEntry entry = catalog_entry(base.name);
  // Accuracy-study stepping: d_tau ~ d_xi^(5/3) keeps the third-order time
  // error at the spatial order; the reference uses a milder power (its d_xi
  // is already tiny) so it stays cheap while contributing negligible error.
  ExperimentSpec ref_spec = base;
  ref_spec.n_cells = n_ref;
  ref_spec.dtau_power = 4.0 / 3.0;
  const RunOutput ref = run_for_state(ref_spec);
  if (!ref.summary.completed) throw Error("reference run failed: " + ref.summary.abort_error);

  // Reference samples (periodically extended when applicable).
  std::vector<double> rx, rk;
  const double period = entry.xi_right - entry.xi_left;
  for (int rep = entry.periodic ? -1 : 0; rep <= (entry.periodic ? 1 : 0); ++rep) {
    for (int j = 0; j < ref.state.n(); ++j) {
      rx.push_back(ref.state.x_pos[j] + rep * period);
      rk.push_back(primitive_from_conserved(entry.model, ref.state.cells[j]).k);
    }
  }
  std::vector<std::size_t> order_idx(rx.size());
  for (std::size_t i = 0; i < rx.size(); ++i) order_idx[i] = i;
  std::sort(order_idx.begin(), order_idx.end(),
            [&](std::size_t a, std::size_t b) { return rx[a] < rx[b]; });
  std::vector<double> sx(rx.size()), sk(rx.size());
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sx[i] = rx[order_idx[i]];
    sk[i] = rk[order_idx[i]];
  }

  ErrorReport report;
  for (int n : n_list) {
    ExperimentSpec spec = base;
    spec.n_cells = n;
    spec.dtau_power = 5.0 / 3.0;
    const RunOutput run = run_for_state(spec);
    if (!run.summary.completed) throw Error("study run failed: " + run.summary.abort_error);
    double e1 = 0.0, e2 = 0.0, einf = 0.0, e1w = 0.0;
    for (int j = 0; j < run.state.n(); ++j) {
      const double xq = run.state.x_pos[j];
      const double kj = primitive_from_conserved(entry.model, run.state.cells[j]).k;
      // Six reference points nearest to xq.
      auto it = std::lower_bound(sx.begin(), sx.end(), xq);
      long hi = it - sx.begin();
      long lo = hi - 1;
      std::vector<double> px, pf;
      while (static_cast<int>(px.size()) < 6) {
        const bool take_lo =
            lo >= 0 && (hi >= static_cast<long>(sx.size()) || xq - sx[lo] <= sx[hi] - xq);
        if (take_lo) {
          px.push_back(sx[lo]);
          pf.push_back(sk[lo]);
          --lo;
        } else if (hi < static_cast<long>(sx.size())) {
          px.push_back(sx[hi]);
          pf.push_back(sk[hi]);
          ++hi;
        } else {
          break;
        }
      }
      const double e = std::abs(lagrange_interpolate(px, pf, xq) - kj);
      e1 += e;
      e2 += e * e;
      einf = std::max(einf, e);
      const int jl = std::max(j - 1, 0);
      const int jr = std::min(j + 1, run.state.n() - 1);
      e1w += e * 0.5 * (run.state.x_pos[jr] - run.state.x_pos[jl]);
    }
    report.n_values.push_back(n);
    report.l1.push_back(e1);
    report.l2.push_back(std::sqrt(e2));
    report.linf.push_back(einf);
    report.l1_weighted.push_back(e1w);
  }
  for (std::size_t i = 1; i < report.n_values.size(); ++i) {
    const double r = std::log2(static_cast<double>(report.n_values[i]) / report.n_values[i - 1]);
    report.order_l1.push_back(std::log2(report.l1[i - 1] / report.l1[i]) / r);
    report.order_l2.push_back(std::log2(report.l2[i - 1] / report.l2[i]) / r);
    report.order_linf.push_back(std::log2(report.linf[i - 1] / report.linf[i]) / r);
  }
  return report;
}

ConservationReport conservation_report(const ExperimentSpec& spec) {
  const RunOutput run = run_for_state(spec);
  if (!run.summary.completed) throw Error("conservation run failed: " + run.summary.abort_error);
  return ConservationReport{run.summary.err_jphi, run.summary.err_jy};
}

std::string ImpossibilityReport::to_string() const {
  std::ostringstream os;
  os << "fixed-mesh overshoot:   " << fixed_overshoot << "\n"
     << "moving-mesh overshoot:  " << moving_overshoot << "\n"
     << "single-cell overshoot:  " << single_cell_overshoot << "\n";
  return os.str();
}

ImpossibilityReport impossibility_demo(const ModelSpec& model, double phi_l, double phi_r,
                                       double v_common, int n_cells, int steps) {
  CatalogEntry entry;
  entry.model = model;
  entry.xi_left = -1.0;
  entry.xi_right = 1.0;
  entry.phi0 = [=](double xi) { return xi < 0.0 ? phi_l : phi_r; };
  entry.v0 = [=](double) { return v_common; };

  ImpossibilityReport report;
  const FixedMeshRun fixed = fixed_mesh_llf(model, entry, n_cells, steps);
  report.fixed_overshoot = fixed.max_v - fixed.v0_max;
  const FixedMeshRun single = fixed_mesh_llf(model, entry, 1, steps);
  report.single_cell_overshoot = single.max_v - single.v0_max;

  Grid1D grid{-1.0, 1.0, n_cells};
  MovingState s = init_state(grid, model, entry.phi0, entry.v0);
  const BoundaryPolicy policy = BoundaryPolicy::make_outflow();
  BpConfig bp;
  double vmax_seen = -kInf;
  double vmax0 = -kInf;
  for (int j = 0; j < s.n(); ++j) {
    vmax0 = std::max(vmax0, primitive_from_conserved(model, s.cells[j]).v);
  }
  for (int it = 0; it < steps; ++it) {
    const std::vector<InvariantBox> boxes = local_boxes(s, model, policy, bp);
    double bound = bp_max_dtau(s, model, boxes, policy);
    const GhostPad pad = build_pad(s, model, policy);
    double speed = 1e-14;
    for (int j = 0; j < s.n(); ++j) speed = std::max(speed, pad.cfl_den[j + kHalo]);
    bound = std::min(bound, 0.6 * grid.d_xi() / speed);
    s = fo_step(s, model, 0.99 * bound, policy);
    for (int j = 0; j < s.n(); ++j) {
      vmax_seen = std::max(vmax_seen, primitive_from_conserved(model, s.cells[j]).v);
    }
  }
  report.moving_overshoot = vmax_seen - vmax0;
  return report;
}

namespace {

json profile_constant(double v) { return json{{"type", "constant"}, {"value", v}}; }

json road_json(int id, int n, const json& phi, const json& v) {
  return json{{"id", id}, {"length", 1.0}, {"n", n}, {"phi", phi}, {"v", v}};
}

}  // namespace

std::string network_preset(const std::string& id, int n_per_road) {
  json j;
  if (id == "5.6") {
    const int n = n_per_road > 0 ? n_per_road : 700;
    j["name"] = "net_diverge";
    j["model"] = {{"kind", "arz"}, {"gamma", 1.0}, {"v_ref", 1.0}};
    j["t_final"] = 0.2;
    j["roads"] = json::array({
        road_json(1, n, profile_constant(0.5), profile_constant(0.5)),
        road_json(2, n,
                  json{{"type", "step"}, {"x0", 0.5}, {"left", 0.5}, {"right", 0.1}},
                  profile_constant(0.5)),
        road_json(3, n,
                  json{{"type", "intervals"},
                       {"default", 0.5},
                       {"intervals", json::array({json::array({0.2, 0.4, 0.6}),
                                                  json::array({0.6, 0.8, 0.6})})}},
                  json{{"type", "one_minus_phi"}}),
    });
    j["junctions"] = json::array({json{{"id", 1},
                                       {"incoming", json::array({1})},
                                       {"outgoing", json::array({2, 3})},
                                       {"distribution", json::array({json::array({0.5}),
                                                                     json::array({0.5})})}}});
    return j.dump(2);
  }
  if (id == "5.7") {
    const int n = n_per_road > 0 ? n_per_road : 700;
    j["name"] = "net_merge";
    j["model"] = {{"kind", "arz"}, {"gamma", 1.0}, {"v_ref", 1.0}};
    j["t_final"] = 0.5;
    j["roads"] = json::array({
        road_json(1, n, profile_constant(0.4), profile_constant(0.4)),
        road_json(2, n, profile_constant(0.4), profile_constant(0.4)),
        road_json(3, n,
                  json{{"type", "step"}, {"x0", 0.5}, {"left", 0.4}, {"right", 1e-10}},
                  profile_constant(0.4)),
    });
    j["junctions"] = json::array({json{{"id", 1},
                                       {"incoming", json::array({1, 2})},
                                       {"outgoing", json::array({3})},
                                       {"distribution", json::array({json::array({1.0, 1.0})})}}});
    return j.dump(2);
  }
  if (id == "5.8") {
    // 24 junctions on a ring of 24 roads plus 6 two-junction bypass roads.
    const int n = n_per_road > 0 ? n_per_road : 100;
    j["name"] = "net_ring";
    j["model"] = {{"kind", "arz"}, {"gamma", 2.0}, {"v_ref", 1.0}};
    j["t_final"] = 0.5;
    const json phi_types[5] = {
        json{{"type", "intervals"},
             {"default", 0.1},
             {"intervals", json::array({json::array({0.4, 0.6, 0.05})})}},
        json{{"type", "intervals"},
             {"default", 0.1},
             {"intervals", json::array({json::array({0.1, 0.5, 1e-10})})}},
        profile_constant(0.1),
        json{{"type", "sine"}, {"base", 0.1}, {"amp", 0.05}, {"freq", 1.0}},
        json{{"type", "intervals"},
             {"default", 0.1},
             {"intervals", json::array({json::array({0.4, 0.6, 0.2})})}},
    };
    json roads = json::array();
    for (int m = 0; m < 24; ++m) {
      roads.push_back(road_json(m + 1, n, phi_types[m % 5], profile_constant(0.5)));
    }
    for (int b = 0; b < 6; ++b) {
      roads.push_back(road_json(25 + b, n, phi_types[(24 + b) % 5], profile_constant(0.5)));
    }
    j["roads"] = roads;
    json junctions = json::array();
    for (int l = 0; l < 24; ++l) {
      const int in_main = (l + 23) % 24 + 1;  // ring road entering junction l
      const int out_main = l + 1;
      json jn;
      jn["id"] = l + 1;
      if (l % 4 == 0) {
        const int b = l / 4;
        jn["incoming"] = json::array({in_main});
        jn["outgoing"] = json::array({out_main, 25 + b});
        jn["distribution"] = json::array({json::array({0.5}), json::array({0.5})});
      } else if (l % 4 == 2) {
        const int b = l / 4;
        jn["incoming"] = json::array({in_main, 25 + b});
        jn["outgoing"] = json::array({out_main});
        jn["distribution"] = json::array({json::array({1.0, 1.0})});
      } else {
        jn["incoming"] = json::array({in_main});
        jn["outgoing"] = json::array({out_main});
        jn["distribution"] = json::array({json::array({1.0})});
      }
      junctions.push_back(jn);
    }
    j["junctions"] = junctions;
    return j.dump(2);
  }
  throw ConfigError("unknown network preset: " + id);
}

std::string NetworkRunResult::to_json() const {
  json j;
  j["completed"] = completed;
  if (!abort_error.empty()) j["abort_error"] = abort_error;
  j["steps"] = steps;
  j["wall_seconds"] = wall_seconds;
  j["min_phi"] = min_phi;
  j["max_v_violation"] = max_v_violation;
  j["max_k_violation"] = max_k_violation;
  j["theta_lt1"] = limiter.theta_lt1;
  j["step3_fallbacks"] = limiter.step3_fallbacks;
  j["window_excess_over_local"] = window_excess_over_local;
  j["grown_global_v_max"] = grown_global_v_max;
  json roads_json = json::array();
  for (const NetworkRoadExtrema& r : roads) {
    roads_json.push_back(json{{"road", r.road_id},
                              {"min_phi", r.min_phi},
                              {"max_phi", r.max_phi},
                              {"min_v", r.min_v},
                              {"max_v", r.max_v},
                              {"min_k", r.min_k},
                              {"max_k", r.max_k},
                              {"jphi_initial", r.jphi_initial},
                              {"jphi_final", r.jphi_final}});
  }
  j["roads"] = roads_json;
  return j.dump(2);
}

NetworkRunResult run_network(NetworkRunConfig cfg, const std::string& out_dir, double window_lo,
                             double window_hi) {
  NetworkRunResult result;
  RoadNetwork& net = cfg.net;
  result.roads.resize(net.roads.size());
  const auto road_mass = [&](const Road& road) {
    double acc = 0.0;
    for (const ConservedCell& c : road.state.cells) acc += c.j_phi;
    return acc * road.state.grid.d_xi();
  };
  for (std::size_t r = 0; r < net.roads.size(); ++r) {
    result.roads[r].road_id = net.roads[r].id;
    result.roads[r].min_v = kInf;
    result.roads[r].max_v = -kInf;
    result.roads[r].min_k = kInf;
    result.roads[r].max_k = -kInf;
    result.roads[r].jphi_initial = road_mass(net.roads[r]);
  }
  const bool window = window_hi > window_lo;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    while (true) {
      double t_now = net.roads.front().state.tau;
      if (t_now >= cfg.t_final - 1e-12) break;
      const NetworkStepReport rep = network_step(net, cfg.t_final);
      ++result.steps;
      result.limiter.interfaces += rep.limiter.interfaces;
      result.limiter.theta_lt1 += rep.limiter.theta_lt1;
      result.limiter.step3_iterations += rep.limiter.step3_iterations;
      result.limiter.step3_fallbacks += rep.limiter.step3_fallbacks;
      result.min_phi = std::min(result.min_phi, rep.min_phi);
      result.max_v_violation = std::max(result.max_v_violation, rep.max_v_violation);
      result.max_k_violation = std::max(result.max_k_violation, rep.max_k_violation);
      for (std::size_t r = 0; r < net.roads.size(); ++r) {
        const Road& road = net.roads[r];
        NetworkRoadExtrema& ex = result.roads[r];
        std::vector<InvariantBox> would_local;
        if (window) {
          would_local = local_boxes(road.state, net.model, road.policy, net.options.bp);
        }
        for (int jj = 0; jj < road.state.n(); ++jj) {
          const Primitive p = primitive_from_conserved(net.model, road.state.cells[jj]);
          ex.min_phi = std::min(ex.min_phi, p.phi);
          ex.max_phi = std::max(ex.max_phi, p.phi);
          ex.min_v = std::min(ex.min_v, p.v);
          ex.max_v = std::max(ex.max_v, p.v);
          ex.min_k = std::min(ex.min_k, p.k);
          ex.max_k = std::max(ex.max_k, p.k);
          if (window && road.state.x_pos[jj] >= window_lo && road.state.x_pos[jj] <= window_hi) {
            result.window_excess_over_local =
                std::max(result.window_excess_over_local, p.v - would_local[jj].v_max);
          }
        }
      }
    }
    result.completed = true;
  } catch (const Error& e) {
    result.abort_error = e.what();
  }
  for (std::size_t r = 0; r < net.roads.size(); ++r) {
    result.roads[r].jphi_final = road_mass(net.roads[r]);
    result.grown_global_v_max =
        std::max(result.grown_global_v_max, net.roads[r].mode.global_box.v_max);
  }
  if (window) {
    result.window_max_v = -kInf;
    result.window_max_local_box = -kInf;
    for (const Road& road : net.roads) {
      const std::vector<InvariantBox> local =
          local_boxes(road.state, net.model, road.policy, net.options.bp);
      for (int j = 0; j < road.state.n(); ++j) {
        if (road.state.x_pos[j] < window_lo || road.state.x_pos[j] > window_hi) continue;
        const Primitive p = primitive_from_conserved(net.model, road.state.cells[j]);
        result.window_max_v = std::max(result.window_max_v, p.v);
        result.window_max_local_box = std::max(result.window_max_local_box, local[j].v_max);
      }
    }
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    for (const Road& road : net.roads) {
      write_csv(out_dir + "/" + cfg.name + "_road" + std::to_string(road.id) + ".csv", road.state,
                net.model);
    }
    write_text_file(out_dir + "/" + cfg.name + "_summary.json", result.to_json());
  }
  return result;
}

}  // namespace temple
