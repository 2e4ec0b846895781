#include "temple/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <json.hpp>

#include "temple/errors.hpp"

namespace temple {

namespace {

double lagrange4(const double* x, const double* f, double xq) {
  double acc = 0.0;
  for (int i = 0; i < 5; ++i) {
    double li = 1.0;
    for (int j = 0; j < 5; ++j) {
      if (j != i) li *= (xq - x[j]) / (x[i] - x[j]);
    }
    acc += li * f[i];
  }
  return acc;
}

}  // namespace

BoundaryTrace boundary_trace(const Road& road, const ModelSpec& model, RoadEnd end,
                             double eps_b) {
  const MovingState& s = road.state;
  const double xq = end == RoadEnd::Entry ? road.x_entry : road.x_exit;
  std::vector<int> interior;
  interior.reserve(s.n());
  for (int j = 0; j < s.n(); ++j) {
    if (s.x_pos[j] >= road.x_entry && s.x_pos[j] <= road.x_exit) interior.push_back(j);
  }
  if (static_cast<int>(interior.size()) < 5) {
    throw Error("boundary_trace: fewer than 5 interior nodes on road " + std::to_string(road.id));
  }
  std::partial_sort(interior.begin(), interior.begin() + 5, interior.end(),
                    [&](int a, int b) { return std::abs(s.x_pos[a] - xq) < std::abs(s.x_pos[b] - xq); });
  int idx[5];
  for (int i = 0; i < 5; ++i) idx[i] = interior[i];
  std::sort(idx, idx + 5);

  double x[5], phi[5], v[5], jac[5];
  for (int i = 0; i < 5; ++i) {
    const int j = idx[i];
    const Primitive p = primitive_from_conserved(model, s.cells[j]);
    x[i] = s.x_pos[j];
    phi[i] = p.phi;
    v[i] = p.v;
    jac[i] = s.cells[j].jac;
  }
  BoundaryTrace t;
  const double spacing = (x[4] - x[0]) / 4.0;
  const double gap = std::max({0.0, x[0] - xq, xq - x[4]});
  if (gap <= 2.0 * spacing) {
    // Interpolation, or the mild half-cell extrapolation of a freshly moved
    // mesh: the quartic is exact on degree <= 4 data.
    t.phi = lagrange4(x, phi, xq);
    t.v = lagrange4(x, v, xq);
    t.jac = lagrange4(x, jac, xq);
  } else {
    // The mesh has drifted far off this endpoint; a quartic through the
    // clustered nearest nodes amplifies edge noise catastrophically when
    // extrapolated across the gap, so fall back to the nearest node.
    const int nearest = xq < x[0] ? 0 : 4;
    t.phi = phi[nearest];
    t.v = v[nearest];
    t.jac = jac[nearest];
  }
  t.phi = std::max(t.phi, eps_b);
  t.v = std::max(t.v, eps_b);
  t.jac = std::max(t.jac, eps_b);
  t.phi = std::min(t.phi, 1.0 - 1e-12);
  t.k = invariant_from(model, t.phi, t.v);
  return t;
}

Primitive free_flow_state(const ModelSpec& model, double k, double q) {
  if (!model.is_arz()) throw ConfigError("free_flow_state: ARZ models only");
  const auto flux = [&](double phi) { return phi * velocity_from(model, phi, k); };
  double phi_c;
  if (model.kind == ModelKind::ArzGamma) {
    if (!(k > 0.0)) phi_c = 1e-12;
    else phi_c = std::pow(k * model.gamma / (model.v_ref * (1.0 + model.gamma)), 1.0 / model.gamma);
  } else {
    phi_c = std::exp(k / model.v_ref - 1.0);
  }
  phi_c = std::clamp(phi_c, 1e-12, 1.0 - 1e-9);
  const double q_max = flux(phi_c);
  Primitive out;
  if (!(q_max > 0.0) || q >= q_max) {
    out.phi = phi_c;
    out.v = velocity_from(model, phi_c, k);
    out.k = k;
    return out;
  }
  double lo = 1e-14, hi = phi_c;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (flux(mid) < q ? lo : hi) = mid;
  }
  out.phi = hi;
  out.v = velocity_from(model, hi, k);
  out.k = k;
  return out;
}

void DemandProportionalCoupling::apply(const Junction& junction, const ModelSpec& model,
                                       std::span<const BoundaryTrace> incoming_exit_traces,
                                       std::span<const BoundaryTrace> outgoing_entry_traces,
                                       std::span<ConservedCell> incoming_exit_ghosts,
                                       std::span<ConservedCell> outgoing_entry_ghosts) const {
  const std::size_t ni = junction.incoming.size();
  const std::size_t no = junction.outgoing.size();

  for (std::size_t i = 0; i < ni; ++i) {
    // Free outflow into the junction: extrapolate the road's own trace.
    const BoundaryTrace& t = incoming_exit_traces[i];
    Primitive p{std::min(t.phi, 1.0 - 1e-12), t.v, 0.0};
    p.k = invariant_from(model, p.phi, p.v);
    incoming_exit_ghosts[i] = conserved_from_primitive(model, p, t.jac);
  }

  std::vector<double> demand(ni);
  for (std::size_t i = 0; i < ni; ++i) {
    demand[i] = incoming_exit_traces[i].phi * incoming_exit_traces[i].v;
  }
  for (std::size_t j = 0; j < no; ++j) {
    double q = 0.0, qk = 0.0;
    for (std::size_t i = 0; i < ni; ++i) {
      const double qji = junction.distribution[j][i] * demand[i];
      q += qji;
      qk += qji * incoming_exit_traces[i].k;
    }
    const BoundaryTrace& t = outgoing_entry_traces[j];
    if (!(q > 1e-14)) {
      Primitive p{std::min(t.phi, 1.0 - 1e-12), t.v, 0.0};
      p.k = invariant_from(model, p.phi, p.v);
      outgoing_entry_ghosts[j] = conserved_from_primitive(model, p, t.jac);
      continue;
    }
    const Primitive ghost = free_flow_state(model, qk / q, q);
    outgoing_entry_ghosts[j] = conserved_from_primitive(model, ghost, t.jac);
  }
}

Road& RoadNetwork::road_by_id(int id) {
  for (Road& r : roads) {
    if (r.id == id) return r;
  }
  throw ConfigError("unknown road id " + std::to_string(id));
}

const Road& RoadNetwork::road_by_id(int id) const {
  for (const Road& r : roads) {
    if (r.id == id) return r;
  }
  throw ConfigError("unknown road id " + std::to_string(id));
}

void RoadNetwork::wire() {
  std::map<int, int> seen;
  for (const Road& r : roads) {
    if (++seen[r.id] > 1) throw ConfigError("duplicate road id " + std::to_string(r.id));
  }
  for (const Junction& jn : junctions) {
    if (jn.incoming.empty() || jn.outgoing.empty()) {
      throw ConfigError("junction " + std::to_string(jn.id) + " needs incoming and outgoing roads");
    }
    if (jn.distribution.size() != jn.outgoing.size()) {
      throw ConfigError("junction " + std::to_string(jn.id) + ": distribution rows != outgoing");
    }
    for (const auto& row : jn.distribution) {
      if (row.size() != jn.incoming.size()) {
        throw ConfigError("junction " + std::to_string(jn.id) + ": distribution cols != incoming");
      }
      for (double a : row) {
        if (!(a >= 0.0) || !(a <= 1.0)) {
          throw ConfigError("junction " + std::to_string(jn.id) + ": fraction outside [0,1]");
        }
      }
    }
    for (std::size_t i = 0; i < jn.incoming.size(); ++i) {
      double col = 0.0;
      for (std::size_t j = 0; j < jn.outgoing.size(); ++j) col += jn.distribution[j][i];
      if (std::abs(col - 1.0) > 1e-12) {
        throw ConfigError("junction " + std::to_string(jn.id) + ": column sum != 1");
      }
    }
    for (int id : jn.incoming) {
      Road& r = road_by_id(id);
      if (r.exit_junction >= 0) throw ConfigError("road exit doubly coupled: " + std::to_string(id));
      r.exit_junction = jn.id;
      r.policy.right.kind = BoundaryKind::Coupled;
      r.policy.right.ghost = r.state.cells[r.state.n() - 1];
    }
    for (int id : jn.outgoing) {
      Road& r = road_by_id(id);
      if (r.entry_junction >= 0) throw ConfigError("road entry doubly coupled: " + std::to_string(id));
      r.entry_junction = jn.id;
      r.policy.left.kind = BoundaryKind::Coupled;
      r.policy.left.ghost = r.state.cells[0];
    }
  }
  // The physical floor v >= 0 only applies when every road's data respects it.
  double min_v = std::numeric_limits<double>::infinity();
  for (const Road& r : roads) {
    for (const ConservedCell& c : r.state.cells) {
      min_v = std::min(min_v, primitive_from_conserved(model, c).v);
    }
  }
  options.bp.v_lower_clamp = min_v >= 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  for (Road& r : roads) {
    r.mode.kind = options.mode;
    const std::vector<InvariantBox> init = local_boxes(r.state, model, r.policy, options.bp);
    InvariantBox hull = init[0];
    for (const InvariantBox& b : init) hull = box_hull(hull, b);
    r.mode.global_box = hull;
    r.initial_box = hull;
  }
}

NetworkStepReport network_step(RoadNetwork& net, double t_target) {
  // Coupling phase: traces at junction-adjacent ends, then ghost refresh.
  for (const Junction& jn : net.junctions) {
    std::vector<BoundaryTrace> in_traces, out_traces;
    for (int id : jn.incoming) {
      in_traces.push_back(boundary_trace(net.road_by_id(id), net.model, RoadEnd::Exit));
    }
    for (int id : jn.outgoing) {
      out_traces.push_back(boundary_trace(net.road_by_id(id), net.model, RoadEnd::Entry));
    }
    std::vector<ConservedCell> in_ghosts(jn.incoming.size());
    std::vector<ConservedCell> out_ghosts(jn.outgoing.size());
    net.coupling->apply(jn, net.model, in_traces, out_traces, in_ghosts, out_ghosts);
    for (std::size_t i = 0; i < jn.incoming.size(); ++i) {
      net.road_by_id(jn.incoming[i]).policy.right.ghost = in_ghosts[i];
    }
    for (std::size_t j = 0; j < jn.outgoing.size(); ++j) {
      net.road_by_id(jn.outgoing[j]).policy.left.ghost = out_ghosts[j];
    }
  }

  // Boxes per road; the grown hull tracks boundary inflow (Eq.-(764)-style)
  // and serves as the Global-mode box or the Local-mode cap.
  std::vector<std::vector<InvariantBox>> boxes(net.roads.size());
  for (std::size_t r = 0; r < net.roads.size(); ++r) {
    Road& road = net.roads[r];
    const InvariantBox left = local_box_at(road.state, net.model, road.policy, net.options.bp, 0);
    const InvariantBox right =
        local_box_at(road.state, net.model, road.policy, net.options.bp, road.state.n() - 1);
    road.mode = global_box_update(road.mode, left, right);
    if (road.mode.kind == DomainModeKind::Local) {
      const InvariantBox* cap = net.options.bp.hull_cap ? &road.mode.global_box : nullptr;
      boxes[r] = local_boxes(road.state, net.model, road.policy, net.options.bp, cap);
    } else {
      boxes[r].assign(road.state.n(), road.mode.global_box);
    }
  }

  // Shared plan: the smallest admissible step over all roads.
  double d_tau = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < net.roads.size(); ++r) {
    Road& road = net.roads[r];
    const StepPlan p = plan_step(road.state, net.model, boxes[r], road.policy, net.options,
                                 t_target - road.state.tau);
    d_tau = std::min(d_tau, p.d_tau);
  }

  NetworkStepReport report;
  report.d_tau = d_tau;
  for (std::size_t r = 0; r < net.roads.size(); ++r) {
    Road& road = net.roads[r];
    StepPlan plan;
    plan.cfl = net.options.cfl;
    plan.d_tau = d_tau;
    plan.lambda = d_tau / road.state.grid.d_xi();
    StepReport sr;
    try {
      sr = rk3_step(road.state, net.model, plan, boxes[r], road.policy, net.options);
    } catch (const Error& e) {
      throw SolverError(road.state.step_index,
                        "road " + std::to_string(road.id) + ": " + e.what());
    }
    report.limiter.interfaces += sr.limiter.interfaces;
    report.limiter.theta_lt1 += sr.limiter.theta_lt1;
    report.limiter.step3_iterations += sr.limiter.step3_iterations;
    report.limiter.step3_fallbacks += sr.limiter.step3_fallbacks;
    report.min_phi = std::min(report.min_phi, sr.min_phi);
    report.max_phi = std::max(report.max_phi, sr.max_phi);
    report.max_v_violation = std::max(report.max_v_violation, sr.max_v_violation);
    report.max_k_violation = std::max(report.max_k_violation, sr.max_k_violation);
  }
  return report;
}

namespace {

using nlohmann::json;

std::function<double(double)> parse_profile(const json& spec, double road_length) {
  const std::string type = spec.at("type").get<std::string>();
  if (type == "constant") {
    const double value = spec.at("value").get<double>();
    return [value](double) { return value; };
  }
  if (type == "step") {
    const double x0 = spec.at("x0").get<double>();
    const double left = spec.at("left").get<double>();
    const double right = spec.at("right").get<double>();
    return [=](double x) { return x < x0 ? left : right; };
  }
  if (type == "intervals") {
    const double dflt = spec.at("default").get<double>();
    std::vector<std::array<double, 3>> iv;
    for (const auto& e : spec.at("intervals")) {
      iv.push_back({e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<double>()});
    }
    return [=](double x) {
      for (const auto& seg : iv) {
        if (x >= seg[0] && x <= seg[1]) return seg[2];
      }
      return dflt;
    };
  }
  if (type == "sine") {
    const double base = spec.at("base").get<double>();
    const double amp = spec.at("amp").get<double>();
    const double freq = spec.value("freq", 1.0);
    return [=](double x) { return base + amp * std::sin(2.0 * M_PI * freq * x / road_length); };
  }
  throw ConfigError("unknown profile type: " + type);
}

ModelSpec parse_model(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "arz") return ModelSpec::arz(j.at("gamma").get<double>(), j.at("v_ref").get<double>());
  if (kind == "arz_log") return ModelSpec::arz_log(j.at("v_ref").get<double>());
  if (kind == "sedimentation") return ModelSpec::sedimentation();
  throw ConfigError("unknown model kind: " + kind);
}

}  // namespace

NetworkRunConfig load_network_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("network config parse error: ") + e.what());
  }
  NetworkRunConfig cfg;
  cfg.net.model = parse_model(j.at("model"));
  cfg.t_final = j.at("t_final").get<double>();
  cfg.name = j.value("name", std::string("network"));
  cfg.net.options.cfl = j.value("cfl", 0.6);
  cfg.net.options.limiter = j.value("limiter", true);
  cfg.net.options.mode =
      j.value("mode", std::string("local")) == "global" ? DomainModeKind::Global
                                                        : DomainModeKind::Local;
  for (const auto& jr : j.at("roads")) {
    Road r;
    r.id = jr.at("id").get<int>();
    const double length = jr.value("length", 1.0);
    r.x_entry = 0.0;
    r.x_exit = length;
    Grid1D grid{0.0, length, jr.at("n").get<int>()};
    const auto phi0 = parse_profile(jr.at("phi"), length);
    std::function<double(double)> v0;
    if (jr.at("v").is_object() && jr.at("v").value("type", "") == "one_minus_phi") {
      v0 = [phi0](double x) { return 1.0 - phi0(x); };
    } else {
      v0 = parse_profile(jr.at("v"), length);
    }
    r.state = init_state(grid, cfg.net.model, phi0, v0);
    if (jr.value("periodic", false)) r.policy = BoundaryPolicy::make_periodic();
    cfg.net.roads.push_back(std::move(r));
  }
  if (j.contains("junctions")) {
    for (const auto& jj : j.at("junctions")) {
      Junction jn;
      jn.id = jj.at("id").get<int>();
      jn.incoming = jj.at("incoming").get<std::vector<int>>();
      jn.outgoing = jj.at("outgoing").get<std::vector<int>>();
      jn.distribution = jj.at("distribution").get<std::vector<std::vector<double>>>();
      cfg.net.junctions.push_back(std::move(jn));
    }
  }
  cfg.net.wire();
  return cfg;
}

}  // namespace temple
