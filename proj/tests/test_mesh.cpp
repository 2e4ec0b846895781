#include <doctest.h>

#include <cmath>
#include <sstream>

#include "temple/harness.hpp"
#include "temple/integrator.hpp"
#include "temple/mesh.hpp"

using namespace temple;

TEST_CASE("init_state catalog data") {
  // Example with phi == 0.5 everywhere: J phi must be exactly 0.5.
  const CatalogEntry e = catalog_entry("5.1");
  Grid1D grid{0.0, 1.0, 64};
  MovingState s = init_state(grid, e.model, e.phi0, e.v0);
  for (int j = 0; j < s.n(); ++j) {
    CHECK(s.cells[j].j_phi == 0.5);
    CHECK(s.cells[j].jac == 1.0);
    CHECK(s.x_pos[j] == grid.xi(j));
  }

  // Near-vacuum Riemann data initializes without positivity trouble.
  const CatalogEntry t2 = catalog_entry("T2");
  MovingState s2 = init_state(Grid1D{-1.0, 1.0, 100}, t2.model, t2.phi0, t2.v0);
  for (int j = 0; j < s2.n(); ++j) CHECK(s2.cells[j].j_phi > 0.0);

  // Constant data: all cells identical.
  const ModelSpec m = ModelSpec::arz(2.0, 1.0);
  MovingState s3 = init_state(Grid1D{0.0, 1.0, 16}, m, [](double) { return 0.3; },
                              [](double) { return 0.2; });
  for (int j = 1; j < s3.n(); ++j) {
    CHECK(s3.cells[j].j_phi == s3.cells[0].j_phi);
    CHECK(s3.cells[j].j_y == s3.cells[0].j_y);
  }

  CHECK_THROWS_AS(init_state(Grid1D{0.0, 1.0, 8}, m, [](double) { return 1.2; },
                             [](double) { return 0.1; }),
                  DomainError);
}

TEST_CASE("ghost pads follow the boundary policy") {
  const ModelSpec m = ModelSpec::arz(2.0, 1.0);
  MovingState s = init_state(Grid1D{0.0, 1.0, 8}, m, [](double xi) { return 0.3 + 0.1 * xi; },
                             [](double) { return 0.2; });
  const GhostPad per = build_pad(s, m, BoundaryPolicy::make_periodic());
  CHECK(per.cell[kHalo - 1].j_phi == s.cells[7].j_phi);
  CHECK(per.cell[kHalo - 3].j_phi == s.cells[5].j_phi);
  CHECK(per.cell[kHalo + 8].j_phi == s.cells[0].j_phi);

  const GhostPad out = build_pad(s, m, BoundaryPolicy::make_outflow());
  CHECK(out.cell[kHalo - 1].j_phi == s.cells[0].j_phi);
  CHECK(out.cell[kHalo + 8 + 2].j_phi == s.cells[7].j_phi);

  BoundaryPolicy coupled;
  coupled.left.kind = BoundaryKind::Coupled;
  coupled.left.ghost = ConservedCell{0.11, 0.07, 0.9};
  const GhostPad cp = build_pad(s, m, coupled);
  CHECK(cp.cell[kHalo - 2].j_phi == 0.11);
}

TEST_CASE("positions advance with the stage combination") {
  const ModelSpec m = ModelSpec::arz(2.0, 1.0);
  SolverOptions opt;
  const BoundaryPolicy pol = BoundaryPolicy::make_periodic();

  // Constant v: every node shifts by exactly v * d_tau (all stages equal).
  {
    MovingState s = init_state(Grid1D{0.0, 1.0, 16}, m, [](double) { return 0.5; },
                               [](double) { return 0.5; });
    const std::vector<double> x0 = s.x_pos;
    StepPlan plan{0.1, 0.1 / s.grid.d_xi(), 0.6};
    const std::vector<InvariantBox> boxes = local_boxes(s, m, pol, opt.bp);
    rk3_step(s, m, plan, boxes, pol, opt);
    for (int j = 0; j < s.n(); ++j) {
      CHECK(s.x_pos[j] == doctest::Approx(x0[j] + 0.05).epsilon(1e-15));
      CHECK(s.cells[j].jac == 1.0);
    }
  }

  // v == 0 (sedimentation with k = 0 flow): positions unchanged.
  {
    const ModelSpec sed = ModelSpec::sedimentation();
    MovingState s = init_state(Grid1D{0.0, 1.0, 16}, sed, [](double) { return 0.4; },
                               [](double) { return 0.0; });
    const std::vector<double> x0 = s.x_pos;
    StepPlan plan{0.1, 0.1 / s.grid.d_xi(), 0.6};
    const std::vector<InvariantBox> boxes = local_boxes(s, sed, pol, opt.bp);
    rk3_step(s, sed, plan, boxes, pol, opt);
    for (int j = 0; j < s.n(); ++j) CHECK(s.x_pos[j] == x0[j]);
  }
}

TEST_CASE("one-step gap between RK3 and Euler positions scales like d_tau^2") {
  const CatalogEntry e = catalog_entry("5.1");
  const BoundaryPolicy pol = BoundaryPolicy::make_periodic();
  const auto node5_x = [&](PositionUpdate pu, double d_tau) {
    SolverOptions opt;
    opt.position_update = pu;
    opt.bp.v_lower_clamp = -1e30;
    MovingState s = init_state(Grid1D{0.0, 1.0, 20}, e.model, e.phi0, e.v0);
    StepPlan plan{d_tau, d_tau / s.grid.d_xi(), 0.6};
    const std::vector<InvariantBox> boxes = local_boxes(s, e.model, pol, opt.bp);
    rk3_step(s, e.model, plan, boxes, pol, opt);
    return s.x_pos[5];
  };
  const double d1 =
      std::abs(node5_x(PositionUpdate::Rk3, 0.01) - node5_x(PositionUpdate::Euler, 0.01));
  const double d2 =
      std::abs(node5_x(PositionUpdate::Rk3, 0.005) - node5_x(PositionUpdate::Euler, 0.005));
  CHECK(d1 > 0.0);
  CHECK(d1 / d2 > 2.5);
  CHECK(d1 / d2 < 6.0);
}

TEST_CASE("periodic total length is conserved") {
  const CatalogEntry e = catalog_entry("5.1");
  SolverOptions opt;
  opt.bp.v_lower_clamp = -1e30;
  Simulation sim(e.model, init_state(Grid1D{0.0, 1.0, 40}, e.model, e.phi0, e.v0),
                 BoundaryPolicy::make_periodic(), opt);
  const auto total = [&]() {
    double acc = 0.0;
    for (const ConservedCell& c : sim.state().cells) acc += c.jac;
    return acc * sim.state().grid.d_xi();
  };
  const double l0 = total();
  sim.run_to(0.05);
  CHECK(total() == doctest::Approx(l0).epsilon(1e-12));
}

TEST_CASE("csv writer format") {
  const ModelSpec m = ModelSpec::arz(2.0, 1.0);
  MovingState s = init_state(Grid1D{0.0, 1.0, 3}, m, [](double) { return 0.8; },
                             [](double) { return 0.4; });
  std::ostringstream os;
  write_csv(os, s, m);
  const std::string text = os.str();
  CHECK(text.rfind("x,phi,v,k,J\n", 0) == 0);
  int lines = 0;
  for (char c : text) lines += c == '\n';
  CHECK(lines == 4);
}
