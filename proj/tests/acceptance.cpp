// Acceptance suite: one pass/fail line per criterion, exit code 0 only if
// every criterion holds. Criteria run at their stated tolerances; nothing is
// recalibrated at run time.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "temple/bp.hpp"
#include "temple/fo_scheme.hpp"
#include "temple/harness.hpp"
#include "temple/integrator.hpp"

using namespace temple;

namespace {

int g_failures = 0;

void record(int criterion, const std::string& name, bool ok, const std::string& detail,
            double seconds) {
  std::printf("%-4s criterion %d: %-34s %s  [%.1fs]\n", ok ? "PASS" : "FAIL", criterion,
              name.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// --- criterion 1: convergence orders of k on the smooth ARZ-log example ----

void criterion1() {
  Timer timer;
  ExperimentSpec spec;
  spec.name = "5.1";
  ErrorReport report;
  bool ok = false;
  std::string detail;
  try {
    report = convergence_study(spec, {20, 40, 80, 160}, 2560);
    const double o_20_40 = report.order_l1[0];
    const double o_80_160 = report.order_l1[2];
    ok = o_20_40 >= 3.0 && o_80_160 >= 4.0;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "L1 orders 20->40: %.2f (>=3.0), 80->160: %.2f (>=4.0)",
                  o_20_40, o_80_160);
    detail = buf;
  } catch (const Error& e) {
    detail = std::string("aborted: ") + e.what();
  }
  record(1, "convergence (smooth ARZ-log)", ok, detail, timer.seconds());
  if (!report.n_values.empty()) std::printf("%s", report.to_string().c_str());
}

// --- criterion 2: conservation errors ---------------------------------------

void criterion2() {
  Timer timer;
  bool ok = false;
  std::string detail;
  try {
    ExperimentSpec smooth;
    smooth.name = "5.1";
    smooth.n_cells = 320;
    const ConservationReport a = conservation_report(smooth);
    ExperimentSpec riemann;
    riemann.name = "5.2";
    riemann.n_cells = 500;
    const ConservationReport b = conservation_report(riemann);
    ok = a.err_jphi <= 1e-13 && b.err_jphi <= 1e-13;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "err_Jphi smooth N=320: %.2e, Riemann N=500: %.2e (<=1e-13)",
                  a.err_jphi, b.err_jphi);
    detail = buf;
  } catch (const Error& e) {
    detail = std::string("aborted: ") + e.what();
  }
  record(2, "conservation", ok, detail, timer.seconds());
}

// --- criterion 3: bound preservation on the Riemann suite -------------------

void criterion3() {
  Timer timer;
  bool ok = true;
  std::string detail;
  long fallbacks = 0;
  double worst = 0.0;
  for (const char* id : {"T1", "T2", "T3", "T4", "T5"}) {
    ExperimentSpec spec;
    spec.name = id;
    spec.n_cells = 500;
    const RunSummary s = run_experiment(spec);
    fallbacks += s.step3_fallbacks;
    worst = std::max({worst, s.max_v_violation, s.max_k_violation});
    const bool run_ok = s.completed && s.min_phi > 0.0 && s.max_phi < 1.0 &&
                        s.max_v_violation <= 1e-10 && s.max_k_violation <= 1e-10;
    if (!run_ok) {
      ok = false;
      detail += std::string(id) + (s.completed ? ": bounds violated; " : ": aborted; ");
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "worst box violation %.2e (<=1e-10), step-3 fallbacks %ld",
                worst, fallbacks);
  record(3, "bound preservation T1-T5", ok, detail + buf, timer.seconds());
}

// --- criterion 4: limiter-off failure reproduction --------------------------

void criterion4() {
  Timer timer;
  // T2 with the limiter off must abort with a negative-phi domain error.
  ExperimentSpec t2;
  t2.name = "T2";
  t2.n_cells = 500;
  t2.limiter = false;
  const RunSummary s2 = run_experiment(t2);
  const bool abort_ok = !s2.completed && s2.abort_field == "phi";

  // The smooth example with the limiter off: first time max v exceeds the
  // initial global v_max (+ the box padding).
  ExperimentSpec smooth;
  smooth.name = "5.1";
  smooth.n_cells = 320;
  smooth.limiter = false;
  const RunSummary s1 = run_experiment(smooth);
  const double t_exceed = s1.first_v_exceed_time;
  const bool time_ok = t_exceed >= 0.0 && std::abs(t_exceed - 0.0509) <= 0.005;

  char buf[160];
  const std::string t_text = t_exceed < 0 ? "never" : std::to_string(t_exceed);
  std::snprintf(buf, sizeof(buf), "T2-off abort(phi): %s; first v-exceed t = %s (want 0.0509 +/- 0.005)",
                abort_ok ? "yes" : "NO", t_text.c_str());
  record(4, "limiter-off failures", abort_ok && time_ok, buf, timer.seconds());
  if (!time_ok) {
    std::printf(
        "     note: the overshoot instant is a fingerprint of the reference NonBP\n"
        "     discretization; this implementation's unlimited run leaves the global\n"
        "     box on the v_min side near t=0.089 and breaks down near t=0.20 instead\n"
        "     (see the decisions ledger).\n");
  }
}

// --- criterion 5: first-order exactness and certificates --------------------

void criterion5() {
  Timer timer;
  bool ok = true;
  std::string detail;

  // (a) 1000 steps leave (J phi, J y) bitwise unchanged.
  {
    const CatalogEntry e = catalog_entry("T1");
    MovingState s = init_state(Grid1D{-1.0, 1.0, 64}, e.model, e.phi0, e.v0);
    const std::vector<ConservedCell> orig = s.cells;
    const BoundaryPolicy pol = BoundaryPolicy::make_outflow();
    BpConfig bp;
    for (int it = 0; it < 1000; ++it) {
      const auto boxes = local_boxes(s, e.model, pol, bp);
      const double bound = std::min(bp_max_dtau(s, e.model, boxes, pol), 1e-3);
      s = fo_step(s, e.model, 0.99 * bound, pol);
    }
    for (int j = 0; j < s.n(); ++j) {
      if (std::memcmp(&s.cells[j].j_phi, &orig[j].j_phi, sizeof(double)) != 0 ||
          std::memcmp(&s.cells[j].j_y, &orig[j].j_y, sizeof(double)) != 0) {
        ok = false;
        detail += "bitwise invariance broken; ";
        break;
      }
    }
  }

  // (b) 1e4 randomized configurations per variant stay inside the box at
  // 0.99 of the certified bound.
  long violations = 0;
  {
    std::mt19937 rng(2026);
    std::uniform_real_distribution<double> uphi(0.05, 0.95);
    std::uniform_real_distribution<double> uv(0.01, 0.9);
    std::uniform_real_distribution<double> uj(0.3, 2.0);
    std::uniform_real_distribution<double> upad(0.0, 0.2);
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (const ModelSpec& m :
         {ModelSpec::arz(2.0, 1.0), ModelSpec::arz_log(0.5), ModelSpec::sedimentation()}) {
      for (int it = 0; it < 10000; ++it) {
        const double phi = uphi(rng), v_j = uv(rng), v_jp1 = uv(rng), jac = uj(rng);
        const double k = invariant_from(m, phi, v_j);
        InvariantBox box{std::max(0.0, v_j - upad(rng)), v_j + upad(rng), k - upad(rng),
                         k + upad(rng)};
        const double d_xi = 0.01;
        const double bound = std::min(dtau_star(d_xi, jac, phi, v_j, v_jp1, 1e-10),
                                      dtau_star_star(m, d_xi, jac, phi, k, v_j, v_jp1, box));
        const double d_tau = 0.99 * (bound == inf ? 1e6 * d_xi : bound);
        const double jac_new = jac + d_tau / d_xi * (v_jp1 - v_j);
        if (!(jac_new > 1e-10)) {
          ++violations;
          continue;
        }
        const double phi_new = phi * jac / jac_new;
        if (!(phi_new > 0.0) || !(phi_new < 1.0)) {
          ++violations;
          continue;
        }
        const double v_new = velocity_from(m, phi_new, k);
        if (v_new < box.v_min - 1e-10 || v_new > box.v_max + 1e-10) ++violations;
      }
    }
    if (violations != 0) {
      ok = false;
      detail += "certificate violations: " + std::to_string(violations) + "; ";
    }
  }

  // (c) impossibility demonstration.
  const ImpossibilityReport imp = impossibility_demo(ModelSpec::arz(2.0, 1.0), 0.8, 0.1, 0.4, 200);
  if (!(imp.fixed_overshoot > 1e-6) || imp.moving_overshoot != 0.0) {
    ok = false;
    detail += "impossibility demo failed; ";
  }

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "bitwise ok, 3x10^4 certificates (0 violations), fixed-mesh overshoot %.3f, "
                "moving 0",
                imp.fixed_overshoot);
  record(5, "first-order exactness", ok, detail.empty() ? buf : detail, timer.seconds());
}

// --- criterion 6: limiter oracle equivalence --------------------------------

void criterion6() {
  Timer timer;
  bool ok = true;
  std::string detail;

  // (a) Step-2 ray search vs a 1e6-point line scan on 100 instances.
  {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> uphi(0.1, 0.9);
    std::uniform_real_distribution<double> uv(0.05, 0.8);
    std::uniform_real_distribution<double> ud(-0.3, 0.3);
    std::uniform_real_distribution<double> uth(0.2, 1.0);
    int checked = 0;
    double worst = 0.0;
    while (checked < 100) {
      const ModelSpec m = (checked % 3 == 0)   ? ModelSpec::sedimentation()
                          : (checked % 3 == 1) ? ModelSpec::arz(2.0, 1.0)
                                               : ModelSpec::arz_log(0.5);
      const double phi = uphi(rng), v = uv(rng);
      const ConservedCell u =
          conserved_from_primitive(m, Primitive{phi, v, invariant_from(m, phi, v)}, 1.0);
      const Flux3 u_fo{u.j_phi, u.j_y, u.jac};
      const Flux3 dl{0.5 * ud(rng), 0.5 * ud(rng), 0.5 * ud(rng)};
      const Flux3 dr{0.5 * ud(rng), 0.5 * ud(rng), 0.5 * ud(rng)};
      const double s = v - 0.02;
      const double aL = uth(rng), aR = uth(rng);
      const double h_corner = bp_detail::h_of_theta(m, u_fo, dl, dr, aL, aR, s);
      if (std::isnan(h_corner) || h_corner >= 0.0) continue;
      ++checked;
      const double r = bp_detail::ray_feasible_scale(m, u_fo, dl, dr, aL, aR, s, true, 0.0);
      // Full 1e6-point line scan for the largest feasible scale.
      long r_scan = 0;
      for (long i = 1000000; i >= 0; --i) {
        const double t = static_cast<double>(i) / 1000000.0;
        const double h = bp_detail::h_of_theta(m, u_fo, dl, dr, t * aL, t * aR, s);
        if (!std::isnan(h) && h >= 0.0) {
          r_scan = i;
          break;
        }
      }
      worst = std::max(worst, std::abs(r - static_cast<double>(r_scan) / 1000000.0));
    }
    if (worst > 1e-6) {
      ok = false;
      detail += "ray-vs-scan mismatch " + std::to_string(worst) + "; ";
    } else {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "scan match %.1e (<=1e-6); ", worst);
      detail += buf;
    }
  }

  // (b) Step-3 output vs the exhaustive {0, 0.05, ..., 1}^2 grid oracle on
  // 100 randomized instances.
  {
    std::mt19937 rng(78);
    std::uniform_real_distribution<double> uphi(0.15, 0.85);
    std::uniform_real_distribution<double> uv(0.05, 0.7);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    std::uniform_real_distribution<double> upad(0.005, 0.15);
    std::uniform_real_distribution<double> uscale(0.0, 0.06);
    int instances = 0, certified = 0, infeasible_returned = 0, ones_missed = 0;
    while (instances < 100) {
      const ModelSpec m = (instances % 3 == 0)   ? ModelSpec::sedimentation()
                          : (instances % 3 == 1) ? ModelSpec::arz(2.0, 1.0)
                                                 : ModelSpec::arz_log(0.5);
      const double phi = uphi(rng), v = uv(rng);
      const double k = invariant_from(m, phi, v);
      MovingState s;
      s.grid = Grid1D{0.0, 0.03, 3};
      const ConservedCell cell = conserved_from_primitive(m, Primitive{phi, v, k}, 1.0);
      s.cells = {cell, cell, cell};
      s.x_pos = {s.grid.xi(0), s.grid.xi(1), s.grid.xi(2)};
      std::vector<InvariantBox> boxes(3, InvariantBox{-100.0, 100.0, -100.0, 100.0});
      boxes[1] = InvariantBox{std::max(v - upad(rng), 0.0), v + upad(rng), k - upad(rng),
                              k + upad(rng)};
      const std::vector<double> v_cells(4, v);
      const double scale = uscale(rng);
      std::vector<Flux3> g_star(4, Flux3{0.0, 0.0, -v});
      for (int i = 1; i <= 2; ++i) {
        g_star[i] = Flux3{scale * ud(rng), scale * ud(rng), -v + scale * ud(rng)};
      }
      const double lambda = 0.5;
      BpConfig cfg;
      std::vector<double> theta;
      try {
        theta = select_theta(s, m, boxes, g_star, v_cells, lambda, false, cfg, nullptr);
      } catch (const Error&) {
        continue;
      }
      ++instances;
      const Flux3 u_fo{cell.j_phi, cell.j_y, cell.jac};
      const Flux3 dl{lambda * g_star[1][0], lambda * g_star[1][1], lambda * (g_star[1][2] + v)};
      const Flux3 dr{lambda * g_star[2][0], lambda * g_star[2][1], lambda * (g_star[2][2] + v)};
      const auto feasible = [&](double tl, double tr, double tol) {
        const ConservedCell u{u_fo[0] - (tr * dr[0] - tl * dl[0]),
                              u_fo[1] - (tr * dr[1] - tl * dl[1]),
                              u_fo[2] - (tr * dr[2] - tl * dl[2])};
        if (!(u.jac >= 1e-10 - tol) || !(u.j_phi > 0.0)) return false;
        const double p = u.j_phi / u.jac;
        if (!(p > 0.0) || !(p < 1.0)) return false;
        const double kk = u.j_y / u.j_phi;
        const double vv = velocity_from(m, p, kk);
        return kk >= boxes[1].k_min - tol && kk <= boxes[1].k_max + tol &&
               vv >= boxes[1].v_min - tol && vv <= boxes[1].v_max + tol;
      };
      if (!feasible(theta[1], theta[2], 1e-9)) ++infeasible_returned;
      bool all_ok = true;
      for (int a = 0; a <= 20 && all_ok; ++a) {
        for (int b = 0; b <= 20 && all_ok; ++b) all_ok = feasible(a / 20.0, b / 20.0, -1e-9);
      }
      if (all_ok) {
        ++certified;
        if (theta[1] != 1.0 || theta[2] != 1.0) ++ones_missed;
      }
    }
    if (infeasible_returned > 0 || ones_missed > 0) {
      ok = false;
      detail += "grid oracle: " + std::to_string(infeasible_returned) + " infeasible, " +
                std::to_string(ones_missed) + " missed (1,1); ";
    } else {
      detail += "grid oracle clean (" + std::to_string(certified) + "/100 certified (1,1))";
    }
  }

  record(6, "limiter oracle equivalence", ok, detail, timer.seconds());
}

// --- criterion 7: local vs global domains on the diverging network ---------

void criterion7() {
  Timer timer;
  bool ok = false;
  std::string detail;
  try {
    NetworkRunConfig local_cfg = load_network_config(network_preset("5.6", 700));
    const NetworkRunResult local = run_network(local_cfg, "", 0.05, 0.15);

    NetworkRunConfig global_cfg = load_network_config(network_preset("5.6", 700));
    global_cfg.net.options.mode = DomainModeKind::Global;
    for (Road& r : global_cfg.net.roads) r.mode.kind = DomainModeKind::Global;
    const NetworkRunResult global = run_network(global_cfg, "", 0.05, 0.15);

    const bool local_green = local.completed && local.max_v_violation <= 1e-10 &&
                             local.max_k_violation <= 1e-10 && local.min_phi > 0.0;
    const bool overshoot = global.completed && global.window_max_v > local.window_max_v + 1e-3;
    ok = local_green && overshoot;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "window max v: global %.4f > local %.4f; grown global v_max %.4f (~0.85); "
                  "local run violations %.1e",
                  global.window_max_v, local.window_max_v, global.grown_global_v_max,
                  local.max_v_violation);
    detail = buf;
  } catch (const Error& e) {
    detail = std::string("aborted: ") + e.what();
  }
  record(7, "local vs global domains (net)", ok, detail, timer.seconds());
}

// --- criterion 8: merging-network robustness --------------------------------

void criterion8() {
  Timer timer;
  bool ok = false;
  std::string detail;
  try {
    NetworkRunConfig cfg = load_network_config(network_preset("5.7", 700));
    const NetworkRunResult bp = run_network(cfg);
    const bool bp_ok = bp.completed && bp.min_phi > 0.0 && bp.max_v_violation <= 1e-10;

    NetworkRunConfig off_cfg = load_network_config(network_preset("5.7", 700));
    off_cfg.net.options.limiter = false;
    const NetworkRunResult off = run_network(off_cfg);
    const bool off_fails = !off.completed;

    ok = bp_ok && off_fails;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "BP run to t=0.5: min phi %.2e > 0; limiter-off %s", bp.min_phi,
                  off_fails ? "fails as expected" : "UNEXPECTEDLY COMPLETED");
    detail = buf;
  } catch (const Error& e) {
    detail = std::string("aborted: ") + e.what();
  }
  record(8, "merging-network robustness", ok, detail, timer.seconds());
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);
  const Timer total;
  if (!only || only == 1) criterion1();
  if (!only || only == 2) criterion2();
  if (!only || only == 3) criterion3();
  if (!only || only == 4) criterion4();
  if (!only || only == 5) criterion5();
  if (!only || only == 6) criterion6();
  if (!only || only == 7) criterion7();
  if (!only || only == 8) criterion8();
  std::printf("%s (%d failing) in %.1fs\n", g_failures == 0 ? "ALL CRITERIA PASS" : "FAILURES",
              g_failures, total.seconds());
  return g_failures == 0 ? 0 : 1;
}
