#include <CLI11.hpp>

#include <iostream>

#include "eespt/runner.hpp"

namespace {

// Exit codes: 0 ok, 2 config, 3 mesh, 4 infeasible data, 5 solver rank.
int classify(const std::exception& e) {
  if (dynamic_cast<const eespt::ConfigError*>(&e)) return 2;
  if (dynamic_cast<const eespt::ParseError*>(&e)) return 3;
  if (dynamic_cast<const eespt::UnsupportedElementError*>(&e)) return 3;
  if (dynamic_cast<const eespt::NonManifoldError*>(&e)) return 3;
  if (dynamic_cast<const eespt::DegenerateElementError*>(&e)) return 3;
  if (dynamic_cast<const eespt::NestingError*>(&e)) return 3;
  if (dynamic_cast<const eespt::InfeasibleConstraintsError*>(&e)) return 4;
  if (dynamic_cast<const eespt::IncompatibleDataError*>(&e)) return 4;
  if (dynamic_cast<const eespt::RankDeficiencyError*>(&e)) return 5;
  if (dynamic_cast<const eespt::RigidModeError*>(&e)) return 5;
  if (dynamic_cast<const eespt::NotSpdError*>(&e)) return 5;
  return 1;
}

struct CommonFlags {
  std::string config_path;
  std::string mesh_path;
  std::string method;
  std::string criterion;
  std::string fractions;
  std::string thresholds;
  int ref_levels = -1;
  std::string out_dir;
  int threads = -1;

  void attach(CLI::App* cmd, bool estimator_flags) {
    cmd->add_option("--config", config_path, "case configuration file");
    cmd->add_option("--mesh", mesh_path, "MSH 2.2 mesh file (overrides config)");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--threads", threads, "worker threads (0 = hardware)");
    if (estimator_flags) {
      cmd->add_option("--method", method, "standard | enhanced");
      cmd->add_option("--criterion", criterion, "radius | edge | area | estimate");
      cmd->add_option("--fractions", fractions, "comma list of selection fractions");
      cmd->add_option("--thresholds", thresholds, "comma list of criterion thresholds");
      cmd->add_option("--ref-levels", ref_levels, "uniform refinements for the reference solve");
    }
  }

  eespt::CaseConfig to_config() const {
    eespt::CaseConfig cfg;
    if (!config_path.empty()) cfg = eespt::load_config(config_path);
    if (!mesh_path.empty()) {
      cfg.mesh_file = mesh_path;
      cfg.case_name.clear();
      cfg.generator.clear();
    }
    if (!method.empty()) cfg.estimator.method = method;
    if (!criterion.empty()) cfg.estimator.criteria = {criterion};
    auto parse_list = [](const std::string& s) {
      std::vector<double> out;
      std::string tok;
      for (char ch : s + ",") {
        if (ch == ',') {
          if (!tok.empty()) out.push_back(std::stod(tok));
          tok.clear();
        } else
          tok += ch;
      }
      return out;
    };
    if (!fractions.empty()) cfg.estimator.fractions = parse_list(fractions);
    if (!thresholds.empty()) cfg.estimator.thresholds = parse_list(thresholds);
    if (ref_levels >= 0) cfg.estimator.ref_levels = ref_levels;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (threads >= 0) cfg.estimator.threads = threads;
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"guaranteed a posteriori error bounds for linear elasticity via "
               "equilibrated stress recovery"};
  app.require_subcommand(1);

  CommonFlags solve_flags, est_flags, sweep_flags;
  CLI::App* solve_cmd = app.add_subcommand("solve", "run the FE solve and write fields");
  solve_flags.attach(solve_cmd, false);
  CLI::App* est_cmd = app.add_subcommand("estimate", "compute the error bound");
  est_flags.attach(est_cmd, true);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "criterion sweep over selection sizes");
  sweep_flags.attach(sweep_cmd, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) {
      eespt::RunCase run = eespt::materialize(solve_flags.to_config());
      eespt::run_solve(run);
      std::cout << "wrote " << run.out_dir << "/fields.vtk and run.json\n";
    } else if (est_cmd->parsed()) {
      eespt::RunCase run = eespt::materialize(est_flags.to_config());
      eespt::ErrorReport rep = eespt::run_estimate(run);
      std::cout << "theta = " << rep.theta;
      if (rep.reference >= 0.0)
        std::cout << "  reference = " << rep.reference << "  effectivity = " << rep.effectivity;
      std::cout << "\nwrote " << run.out_dir << "/report.json and fields.vtk\n";
    } else if (sweep_cmd->parsed()) {
      eespt::RunCase run = eespt::materialize(sweep_flags.to_config());
      auto rows = eespt::run_sweep(run);
      std::cout << "wrote " << run.out_dir << "/sweep.csv (" << rows.size() << " rows)\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify(e);
  }
  return 0;
}
