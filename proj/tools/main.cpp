#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "temple/harness.hpp"

namespace {

using namespace temple;

struct CommonFlags {
  std::string model = "catalog";  // catalog entries fix the model; override for custom runs
  double gamma = 2.0;
  double v_ref = 1.0;
  int n = 500;
  double cfl = 0.6;
  double t_final = -1.0;
  std::string mode = "local";
  std::string limiter = "on";
  std::string mesh = "moving";
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--model", f.model, "catalog | arz | arz_log | sedimentation");
  cmd->add_option("--gamma", f.gamma, "ARZ gamma (with --model arz)");
  cmd->add_option("--vref", f.v_ref, "ARZ reference velocity");
  cmd->add_option("--N", f.n, "number of grid nodes");
  cmd->add_option("--cfl", f.cfl, "CFL number");
  cmd->add_option("--tfinal", f.t_final, "final time (negative: catalog default)");
  cmd->add_option("--mode", f.mode, "local | global invariant domains")
      ->check(CLI::IsMember({"local", "global"}));
  cmd->add_option("--limiter", f.limiter, "on | off")->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--mesh", f.mesh, "moving | fixed")->check(CLI::IsMember({"moving", "fixed"}));
  cmd->add_option("--out", f.out, "output directory for CSV/summary artifacts");
}

ExperimentSpec make_spec(const std::string& name, const CommonFlags& f) {
  ExperimentSpec spec;
  spec.name = name;
  spec.n_cells = f.n;
  spec.cfl = f.cfl;
  spec.t_final = f.t_final;
  spec.mode = f.mode == "global" ? DomainModeKind::Global : DomainModeKind::Local;
  spec.limiter = f.limiter == "on";
  spec.moving_mesh = f.mesh == "moving";
  spec.out_dir = f.out;
  return spec;
}

int cmd_run(const std::string& name, const CommonFlags& f, bool first_order, bool log_limiter) {
  ExperimentSpec spec = make_spec(name, f);
  spec.first_order = first_order;
  spec.log_limiter = log_limiter;
  const RunSummary summary = run_experiment(spec);
  std::cout << summary.to_json() << "\n";
  if (!summary.completed) {
    std::cerr << "run aborted: " << summary.abort_error << "\n";
    return 2;
  }
  return summary.monitors_ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bound-preserving moving-mesh WENO solver for Temple-class systems"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  std::string run_name = "T1";
  bool run_first_order = false;
  CLI::App* run = app.add_subcommand("run", "run one catalog experiment");
  run->add_option("name", run_name, "catalog id (5.1, 5.2, 5.3, T1..T5, 3state)")->required();
  run->add_flag("--first-order", run_first_order, "use the first-order scheme");
  bool run_log_limiter = false;
  run->add_flag("--log-limiter", run_log_limiter, "per-step limiter diagnostics");
  add_common(run, run_flags);

  CommonFlags conv_flags;
  std::string conv_name = "5.1";
  std::vector<int> conv_n{20, 40, 80, 160};
  int conv_ref = 2560;
  CLI::App* conv = app.add_subcommand("converge", "convergence study against a fine reference");
  conv->add_option("name", conv_name, "catalog id");
  conv->add_option("--N-list", conv_n, "grid sizes");
  conv->add_option("--N-ref", conv_ref, "reference grid size");
  add_common(conv, conv_flags);

  CommonFlags cons_flags;
  std::string cons_name = "5.2";
  CLI::App* cons = app.add_subcommand("conserve", "conservation error of one run");
  cons->add_option("name", cons_name, "catalog id");
  add_common(cons, cons_flags);

  std::string net_config;
  std::string net_preset;
  std::string net_emit;
  CommonFlags net_flags;
  int net_n = -1;
  CLI::App* net = app.add_subcommand("network", "road-network run");
  net->add_option("--config", net_config, "JSON network config file");
  net->add_option("--preset", net_preset, "built-in preset: 5.6 | 5.7 | 5.8");
  net->add_option("--emit-config", net_emit, "write the preset config to this path and exit");
  net->add_option("--N", net_n, "nodes per road (presets)");
  CLI::Option* net_mode_opt = net->add_option("--mode", net_flags.mode, "local | global")
                                  ->check(CLI::IsMember({"local", "global"}));
  CLI::Option* net_limiter_opt =
      net->add_option("--limiter", net_flags.limiter, "on | off")
          ->check(CLI::IsMember({"on", "off"}));
  CLI::Option* net_cfl_opt = net->add_option("--cfl", net_flags.cfl, "CFL number");
  net->add_option("--tfinal", net_flags.t_final, "final time override");
  net->add_option("--out", net_flags.out, "output directory");

  CLI::App* demo = app.add_subcommand("demo-impossibility",
                                      "fixed-mesh vs moving-mesh overshoot demonstration");
  std::string demo_model = "arz";
  double demo_gamma = 2.0, demo_vref = 1.0;
  double demo_phil = 0.8, demo_phir = 0.1, demo_v = 0.4;
  int demo_n = 200;
  demo->add_option("--model", demo_model, "arz | arz_log | sedimentation");
  demo->add_option("--gamma", demo_gamma);
  demo->add_option("--vref", demo_vref);
  demo->add_option("--phil", demo_phil);
  demo->add_option("--phir", demo_phir);
  demo->add_option("--v", demo_v, "common velocity of both states");
  demo->add_option("--N", demo_n);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_name, run_flags, run_first_order, run_log_limiter);
    if (conv->parsed()) {
      const ExperimentSpec spec = make_spec(conv_name, conv_flags);
      const ErrorReport report = convergence_study(spec, conv_n, conv_ref);
      std::cout << "errors and orders of k (" << conv_name << ")\n" << report.to_string();
      if (!conv_flags.out.empty()) {
        write_text_file(conv_flags.out + "/converge_" + conv_name + ".txt", report.to_string());
      }
      return 0;
    }
    if (cons->parsed()) {
      const ExperimentSpec spec = make_spec(cons_name, cons_flags);
      const ConservationReport report = conservation_report(spec);
      std::printf("err_Jphi = %.6e\nerr_Jy   = %.6e\n", report.err_jphi, report.err_jy);
      return 0;
    }
    if (net->parsed()) {
      std::string text;
      if (!net_config.empty()) {
        std::ifstream is(net_config);
        if (!is) {
          std::cerr << "cannot read " << net_config << "\n";
          return 2;
        }
        std::stringstream ss;
        ss << is.rdbuf();
        text = ss.str();
      } else if (!net_preset.empty()) {
        text = network_preset(net_preset, net_n);
      } else {
        std::cerr << "network: need --config or --preset\n";
        return 2;
      }
      if (!net_emit.empty()) {
        write_text_file(net_emit, text);
        std::cout << "wrote " << net_emit << "\n";
        return 0;
      }
      NetworkRunConfig cfg = load_network_config(text);
      cfg.net.options.mode =
          net_flags.mode == "global" ? DomainModeKind::Global : DomainModeKind::Local;
      for (temple::Road& r : cfg.net.roads) r.mode.kind = cfg.net.options.mode;
      cfg.net.options.limiter = net_flags.limiter == "on";
      cfg.net.options.cfl = net_flags.cfl;
      if (net_flags.t_final > 0.0) cfg.t_final = net_flags.t_final;
      const NetworkRunResult result = run_network(cfg, net_flags.out);
      std::cout << result.to_json() << "\n";
      if (!result.completed) {
        std::cerr << "network run aborted: " << result.abort_error << "\n";
        return 2;
      }
      return (result.max_v_violation <= 1e-10 && result.max_k_violation <= 1e-10 &&
              result.min_phi > 0.0)
                 ? 0
                 : 1;
    }
    if (demo->parsed()) {
      ModelSpec model = ModelSpec::arz(demo_gamma, demo_vref);
      if (demo_model == "arz_log") model = ModelSpec::arz_log(demo_vref);
      if (demo_model == "sedimentation") model = ModelSpec::sedimentation();
      const ImpossibilityReport report =
          impossibility_demo(model, demo_phil, demo_phir, demo_v, demo_n);
      std::cout << report.to_string();
      return 0;
    }
  } catch (const temple::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
