// Timing comparison of the serial and OpenMP paths of the two hot kernels:
// star-patch traction construction and element-local stress recovery.

#include <chrono>
#include <cstdio>
#include <string>

#include "eespt/cases.hpp"
#include "eespt/estimator.hpp"
#include "eespt/parallel.hpp"
#include "eespt/runner.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double time_once(const std::function<void()>& fn) {
  auto t0 = Clock::now();
  fn();
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) best = std::min(best, time_once(fn));
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  int n = (argc > 1) ? std::stoi(argv[1]) : 24;
  int reps = (argc > 2) ? std::stoi(argv[2]) : 3;
  const int hw = eespt::hardware_threads();

  eespt::BundledCase c = eespt::case_plate_hole_2d(n, 2 * n);
  eespt::Topology topo = eespt::build_topology(c.mesh);
  eespt::FESolution fe = eespt::assemble_solve(c.mesh, topo, c.problem);

  std::printf("plate_hole_2d: %d elements, %d nodes, %d hardware threads\n",
              c.mesh.num_elements(), c.mesh.num_nodes(), hw);
  std::printf("%-28s %10s %10s %8s\n", "kernel", "serial[s]", "parallel[s]", "speedup");

  eespt::TractionField field;
  double t_patch_serial = best_of(reps, [&] {
    field = eespt::build_standard_tractions(c.mesh, topo, c.problem, fe, 1);
  });
  double t_patch_par = best_of(reps, [&] {
    field = eespt::build_standard_tractions(c.mesh, topo, c.problem, fe, hw);
  });
  std::printf("%-28s %10.4f %10.4f %8.2fx\n", "patch traction construction", t_patch_serial,
              t_patch_par, t_patch_serial / t_patch_par);

  eespt::AdmissibleStress adm;
  double t_rec_serial = best_of(reps, [&] {
    adm = eespt::recover_admissible_stress(c.mesh, topo, field, c.problem, 1);
  });
  double t_rec_par = best_of(reps, [&] {
    adm = eespt::recover_admissible_stress(c.mesh, topo, field, c.problem, hw);
  });
  std::printf("%-28s %10.4f %10.4f %8.2fx\n", "admissible stress recovery", t_rec_serial,
              t_rec_par, t_rec_serial / t_rec_par);

  eespt::QualityMetrics metrics = eespt::compute_quality(c.mesh);
  eespt::ErrorReport rep = eespt::cre_estimate(c.mesh, adm, fe, c.problem.material);
  eespt::Selection sel = eespt::select_elements(c.mesh, topo, eespt::Criterion::Estimate,
                                                eespt::SelectionMode::by_fraction(0.25), metrics,
                                                &rep.element_contribution);
  double t_ops_serial = best_of(reps, [&] {
    eespt::build_local_operators(c.mesh, topo, sel, fe, c.problem.material, 1);
  });
  double t_ops_par = best_of(reps, [&] {
    eespt::build_local_operators(c.mesh, topo, sel, fe, c.problem.material, hw);
  });
  std::printf("%-28s %10.4f %10.4f %8.2fx\n", "local stress operators", t_ops_serial, t_ops_par,
              t_ops_serial / t_ops_par);
  return 0;
}
