#include "eespt/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "eespt/mesh_io.hpp"
#include "eespt/parallel.hpp"

namespace eespt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

int resolve_threads(int configured) { return configured > 0 ? configured : hardware_threads(); }

// Rethrows the same error type with the pipeline phase prepended, so the CLI
// exit-code mapping keeps working.
template <typename Fn>
auto phase(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    const std::string msg = std::string(name) + ": " + e.what();
    if (dynamic_cast<const InfeasibleConstraintsError*>(&e)) throw InfeasibleConstraintsError(msg);
    if (dynamic_cast<const IncompatibleDataError*>(&e)) throw IncompatibleDataError(msg);
    if (dynamic_cast<const RankDeficiencyError*>(&e)) throw RankDeficiencyError(msg);
    if (dynamic_cast<const RigidModeError*>(&e)) throw RigidModeError(msg);
    if (dynamic_cast<const NotSpdError*>(&e)) throw NotSpdError(msg);
    if (dynamic_cast<const NestingError*>(&e)) throw NestingError(msg);
    if (dynamic_cast<const InconsistencyError*>(&e)) throw InconsistencyError(msg);
    if (dynamic_cast<const UnsupportedDegreeError*>(&e)) throw UnsupportedDegreeError(msg);
    if (dynamic_cast<const MissingDataError*>(&e)) throw MissingDataError(msg);
    if (dynamic_cast<const DegenerateElementError*>(&e)) throw DegenerateElementError(msg);
    if (dynamic_cast<const DegenerateRatioError*>(&e)) throw DegenerateRatioError(msg);
    if (dynamic_cast<const ConfigError*>(&e)) throw ConfigError(msg);
    if (dynamic_cast<const ParseError*>(&e)) throw ParseError(msg);
    throw Error(msg);
  }
}

}  // namespace

RunCase materialize(const CaseConfig& cfg) {
  cfg.validate();
  RunCase run;
  run.options = cfg.estimator;
  run.out_dir = cfg.out_dir;

  if (!cfg.case_name.empty()) {
    BundledCase c = make_bundled_case(cfg.case_name, cfg.case_params);
    run.name = c.name;
    run.mesh = std::move(c.mesh);
    run.problem = c.problem;
  } else if (!cfg.mesh_file.empty()) {
    run.name = std::filesystem::path(cfg.mesh_file).stem().string();
    run.mesh = load_msh(cfg.mesh_file);
  } else {
    run.name = cfg.generator;
    StructuredSpec spec;
    if (cfg.generator == "rectangle") spec.dimension = 2;
    else if (cfg.generator == "box") spec.dimension = 3;
    else throw ConfigError("unknown generator '" + cfg.generator + "'");
    auto get = [&](const char* k, double dflt) {
      auto it = cfg.generator_params.find(k);
      return it == cfg.generator_params.end() ? dflt : std::stod(it->second);
    };
    spec.subdivisions[0] = static_cast<int>(get("nx", 1));
    spec.subdivisions[1] = static_cast<int>(get("ny", 1));
    spec.subdivisions[2] = static_cast<int>(get("nz", 1));
    spec.extent[0] = get("lx", 1.0);
    spec.extent[1] = get("ly", 1.0);
    spec.extent[2] = get("lz", 1.0);
    run.mesh = generate_structured(spec);
  }

  if (cfg.has_material) run.problem.material = cfg.material;
  if (run.mesh.dimension == 3) run.problem.material.mode = MaterialMode::Solid3D;
  if (cfg.has_bc) {
    run.problem.dirichlet = cfg.dirichlet;
    run.problem.neumann = cfg.neumann;
  }
  if (norm(cfg.body_force) > 0.0) run.problem.body_force = cfg.body_force;

  run.topo = build_topology(run.mesh);
  run.problem.validate(run.topo);
  return run;
}

EstimateArtifacts estimate_standard(const Mesh& mesh, const Topology& topo,
                                    const ProblemDef& prob, const FESolution& fe, int threads) {
  EstimateArtifacts art;
  auto t0 = Clock::now();
  art.field = phase("standard traction construction",
                    [&] { return build_standard_tractions(mesh, topo, prob, fe, threads); });
  art.construction_seconds = seconds_since(t0);

  t0 = Clock::now();
  art.admissible = phase("stress recovery",
                         [&] { return recover_admissible_stress(mesh, topo, art.field, prob,
                                                                threads); });
  art.report = cre_estimate(mesh, art.admissible, fe, prob.material);
  art.recovery_seconds = seconds_since(t0);

  art.report.timings_s["tractions"] = art.construction_seconds;
  art.report.timings_s["recovery"] = art.recovery_seconds;
  return art;
}

EstimateArtifacts estimate_enhanced(const Mesh& mesh, const Topology& topo,
                                    const ProblemDef& prob, const FESolution& fe,
                                    const TractionField& standard_field, const Selection& sel,
                                    int threads) {
  EstimateArtifacts art;
  art.selection = sel;
  auto t0 = Clock::now();
  EnhancedResult enh = phase("enhanced traction optimization", [&] {
    return build_enhanced_tractions(mesh, topo, prob, fe, standard_field, sel, threads);
  });
  art.field = enh.field;
  art.construction_seconds = seconds_since(t0);

  t0 = Clock::now();
  art.admissible = phase("stress recovery", [&] {
    return recover_admissible_stress(mesh, topo, art.field, prob, threads);
  });
  if (!sel.empty()) {
    art.admissible.provenance = "enhanced(" + criterion_name(sel.criterion) +
                                (sel.mode.fraction ? ", fraction " : ", threshold ") +
                                fmt(sel.mode.value) + ")";
  }
  art.report = cre_estimate(mesh, art.admissible, fe, prob.material);
  art.report.ridge_used = enh.ridge_used;
  art.recovery_seconds = seconds_since(t0);

  art.report.timings_s["tractions"] = art.construction_seconds;
  art.report.timings_s["recovery"] = art.recovery_seconds;
  return art;
}

ReferenceArtifacts compute_reference(const Mesh& mesh, const Topology& topo,
                                     const ProblemDef& prob, const FESolution& fe, int levels) {
  auto t0 = Clock::now();
  ReferenceArtifacts ref;
  return phase("reference solve", [&] {
    ref.fine = uniform_refine(mesh, levels);
    Topology ftopo = build_topology(ref.fine);
    ref.fe_fine = assemble_solve(ref.fine, ftopo, prob);
    ref.error = reference_error(mesh, fe, ref.fine, ref.fe_fine, prob.material);
    ref.seconds = seconds_since(t0);
    (void)topo;
    return std::move(ref);
  });
}

namespace {

void write_common_fields(const RunCase& run, const FESolution& fe,
                         const EstimateArtifacts* art, const std::string& path) {
  std::map<std::string, std::vector<double>> cell;
  std::map<std::string, std::vector<Vec3>> point;
  point["displacement"] = fe.displacement;
  std::vector<double> mises(run.mesh.num_elements());
  for (int e = 0; e < run.mesh.num_elements(); ++e) {
    double m = 0.0;
    for (double v : fe.stress[e]) m += v * v;
    mises[e] = std::sqrt(m);
  }
  cell["stress_magnitude"] = mises;
  QualityMetrics q = compute_quality(run.mesh);
  cell["radius_ratio"] = q.radius_ratio;
  cell["edge_area_ratio"] = q.edge_or_area_ratio;
  if (art) {
    cell["contribution"] = art->report.element_contribution;
    cell["density"] = art->report.element_density;
    std::vector<double> mask(run.mesh.num_elements(), 0.0);
    if (art->selection)
      for (int e : art->selection->elements) mask[e] = 1.0;
    cell["selection"] = mask;
  }
  write_vtk(path, run.mesh, cell, point);
}

nlohmann::json report_json(const RunCase& run, const ErrorReport& rep) {
  nlohmann::json j;
  j["case"] = run.name;
  j["method"] = rep.method;
  j["theta"] = rep.theta;
  j["nodes"] = run.mesh.num_nodes();
  j["elements"] = run.mesh.num_elements();
  if (rep.reference >= 0.0) {
    j["reference_error"] = rep.reference;
    j["effectivity"] = rep.effectivity;
  }
  j["timings_s"] = rep.timings_s;
  j["ridge_used"] = rep.ridge_used;
  j["contributions"] = rep.element_contribution;
  j["densities"] = rep.element_density;
  return j;
}

}  // namespace

FESolution run_solve(const RunCase& run) {
  auto t0 = Clock::now();
  FESolution fe = assemble_solve(run.mesh, run.topo, run.problem);
  double secs = seconds_since(t0);

  std::filesystem::create_directories(run.out_dir);
  write_common_fields(run, fe, nullptr, run.out_dir + "/fields.vtk");
  nlohmann::json j;
  j["case"] = run.name;
  j["nodes"] = run.mesh.num_nodes();
  j["elements"] = run.mesh.num_elements();
  j["dofs"] = run.mesh.num_nodes() * run.mesh.dimension;
  j["dimension"] = run.mesh.dimension;
  j["energy_norm"] = energy_norm_u(run.mesh, run.problem.material, fe.displacement);
  j["solve_seconds"] = secs;
  std::ofstream(run.out_dir + "/run.json") << j.dump(2) << "\n";
  return fe;
}

namespace {

Selection first_selection(const RunCase& run, const QualityMetrics& metrics,
                          const std::vector<double>& contributions) {
  const auto& opt = run.options;
  Criterion crit = criterion_from_name(opt.criteria.empty() ? "estimate" : opt.criteria.front());
  SelectionMode mode = SelectionMode::by_fraction(1.0);
  if (!opt.fractions.empty()) mode = SelectionMode::by_fraction(opt.fractions.front());
  else if (!opt.thresholds.empty()) mode = SelectionMode::by_threshold(opt.thresholds.front());
  return select_elements(run.mesh, run.topo, crit, mode, metrics,
                         crit == Criterion::Estimate ? &contributions : nullptr);
}

}  // namespace

ErrorReport run_estimate(const RunCase& run) {
  const int threads = resolve_threads(run.options.threads);
  FESolution fe = assemble_solve(run.mesh, run.topo, run.problem);

  EstimateArtifacts std_art = estimate_standard(run.mesh, run.topo, run.problem, fe, threads);
  EstimateArtifacts* final_art = &std_art;

  EstimateArtifacts enh_art;
  if (run.options.method == "enhanced") {
    QualityMetrics metrics = compute_quality(run.mesh);
    Selection sel = first_selection(run, metrics, std_art.report.element_contribution);
    enh_art = estimate_enhanced(run.mesh, run.topo, run.problem, fe, std_art.field, sel, threads);
    final_art = &enh_art;
  }

  if (run.options.ref_levels > 0) {
    ReferenceArtifacts ref =
        compute_reference(run.mesh, run.topo, run.problem, fe, run.options.ref_levels);
    final_art->report.reference = ref.error.value;
    if (ref.error.value > 0.0)
      final_art->report.effectivity = effectivity(final_art->report.theta, ref.error.value);
    final_art->report.timings_s["reference"] = ref.seconds;
  }

  std::filesystem::create_directories(run.out_dir);
  write_common_fields(run, fe, final_art, run.out_dir + "/fields.vtk");
  nlohmann::json j = report_json(run, final_art->report);
  if (final_art->selection) {
    j["selection"] = {{"criterion", criterion_name(final_art->selection->criterion)},
                      {"mode", final_art->selection->mode.fraction ? "fraction" : "threshold"},
                      {"value", final_art->selection->mode.value},
                      {"n_selected", final_art->selection->elements.size()}};
  }
  std::ofstream(run.out_dir + "/report.json") << j.dump(2) << "\n";
  if (final_art->report.ridge_used)
    std::cerr << "note: ridge regularization used in the enhanced QP solve\n";
  return final_art->report;
}

std::vector<SweepRow> run_sweep(const RunCase& run) {
  const int threads = resolve_threads(run.options.threads);
  const auto& opt = run.options;
  const bool by_fraction = !opt.fractions.empty();
  if (!by_fraction && opt.thresholds.empty())
    throw ConfigError("sweep needs a fractions or thresholds list");

  FESolution fe = assemble_solve(run.mesh, run.topo, run.problem);
  QualityMetrics metrics = compute_quality(run.mesh);

  EstimateArtifacts std_art = estimate_standard(run.mesh, run.topo, run.problem, fe, threads);
  double reference = -1.0;
  if (opt.ref_levels > 0)
    reference =
        compute_reference(run.mesh, run.topo, run.problem, fe, opt.ref_levels).error.value;

  const double t_std = std_art.total_seconds();
  const double eta_std = reference > 0.0 ? std_art.report.theta / reference : -1.0;

  std::vector<SweepRow> rows;
  for (const std::string& crit_name : opt.criteria) {
    Criterion crit = criterion_from_name(crit_name);
    // standard baseline row with a sentinel threshold outside the range
    SweepRow base;
    base.criterion = crit_name;
    base.threshold = (crit == Criterion::Estimate) ? 1.1 : 0.0;
    base.n_selected = 0;
    base.theta = std_art.report.theta;
    base.eta = eta_std;
    base.cpu_seconds = t_std;
    base.normalized_cpu = 1.0;
    rows.push_back(base);

    const std::vector<double>& points = by_fraction ? opt.fractions : opt.thresholds;
    for (double p : points) {
      SelectionMode mode =
          by_fraction ? SelectionMode::by_fraction(p) : SelectionMode::by_threshold(p);
      Selection sel =
          select_elements(run.mesh, run.topo, crit, mode, metrics,
                          crit == Criterion::Estimate ? &std_art.report.element_contribution
                                                      : nullptr);
      SweepRow row;
      row.criterion = crit_name;
      row.threshold = p;
      row.n_selected = static_cast<int>(sel.elements.size());
      if (sel.empty()) {
        row.theta = std_art.report.theta;
        row.eta = eta_std;
        row.cpu_seconds = t_std;
        row.normalized_cpu = 1.0;
      } else {
        EstimateArtifacts art =
            estimate_enhanced(run.mesh, run.topo, run.problem, fe, std_art.field, sel, threads);
        row.theta = art.report.theta;
        row.eta = reference > 0.0 ? art.report.theta / reference : -1.0;
        row.cpu_seconds = art.total_seconds();
        row.normalized_cpu = t_std > 0.0 ? row.cpu_seconds / t_std : 1.0;
        if (eta_std > 0.0 && row.cpu_seconds != t_std) {
          EfficiencyFactor ef = efficiency_factor(row.eta, eta_std, row.cpu_seconds, t_std);
          row.g_eta = ef.g_eta;
          row.l_t = ef.l_t;
          row.efficiency = ef.value;
        }
      }
      rows.push_back(row);
    }
  }

  std::filesystem::create_directories(run.out_dir);
  std::ofstream(run.out_dir + "/sweep.csv") << sweep_csv(rows);
  write_common_fields(run, fe, &std_art, run.out_dir + "/fields.vtk");
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "criterion,threshold,n_selected,theta,eta,cpu_seconds,normalized_cpu,g_eta,l_t,efficiency\n";
  for (const auto& r : rows) {
    out += r.criterion + "," + fmt(r.threshold) + "," + std::to_string(r.n_selected) + "," +
           fmt(r.theta) + "," + fmt(r.eta) + "," + fmt(r.cpu_seconds) + "," +
           fmt(r.normalized_cpu) + "," + fmt(r.g_eta) + "," + fmt(r.l_t) + "," +
           fmt(r.efficiency) + "\n";
  }
  return out;
}

}  // namespace eespt
