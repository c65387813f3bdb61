#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eespt/cases.hpp"
#include "eespt/tractions.hpp"
#include "oracles.hpp"

using namespace eespt;

namespace {

struct Pipeline {
  BundledCase c;
  Topology topo;
  FESolution fe;
  double scale;

  explicit Pipeline(BundledCase bc) : c(std::move(bc)), topo(build_topology(c.mesh)) {
    fe = assemble_solve(c.mesh, topo, c.problem);
    scale = load_scale(c.mesh, c.problem, fe);
  }
};

}  // namespace

TEST_CASE("fe_traction_target: uniform stress, Neumann, interior average") {
  Pipeline p(case_uniform_tension(2));
  for (int fi = 0; fi < p.topo.num_facets(); ++fi) {
    const Facet& f = p.topo.facets[fi];
    auto tgt = fe_traction_target(p.c.mesh, p.topo, fi, p.fe, p.c.problem);
    // uniform sigma_xx = 1: target must be sigma . n everywhere, and exactly
    // F_d on the Neumann side
    Vec3 expect{f.normal[0], 0.0, 0.0};
    for (int k = 0; k < 2; ++k) {
      CHECK(tgt[k][0] == doctest::Approx(expect[0]).epsilon(1e-9));
      CHECK(tgt[k][1] == doctest::Approx(expect[1]).epsilon(1e-9));
    }
  }
}

TEST_CASE("fe_traction_target averages the one-sided stress vectors") {
  // two triangles with hand-set element stresses 1 and 3 in sigma_xx
  Mesh m;
  m.dimension = 2;
  m.nodes = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  m.elements = {{0, 1, 2, -1}, {0, 2, 3, -1}};
  m.finalize();
  Topology topo = build_topology(m);
  FESolution fe;
  fe.stress.assign(2, Voigt{0, 0, 0, 0, 0, 0});
  fe.stress[0][0] = 1.0;
  fe.stress[1][0] = 3.0;
  ProblemDef prob;
  prob.material = Material{1.0, 0.3, MaterialMode::PlaneStress};
  int interior = -1;
  for (int fi = 0; fi < topo.num_facets(); ++fi)
    if (!topo.facets[fi].is_boundary()) interior = fi;
  REQUIRE(interior >= 0);
  auto tgt = fe_traction_target(m, topo, interior, fe, prob);
  const Vec3 n = topo.facets[interior].normal;
  CHECK(tgt[0][0] == doctest::Approx(2.0 * n[0]).epsilon(1e-12));
  CHECK(tgt[0][1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("patch system: zero solution and zero loads give zero rhs") {
  Pipeline p(case_uniform_tension(2));
  FESolution zero = p.fe;
  for (auto& u : zero.displacement) u = Vec3{0, 0, 0};
  for (auto& s : zero.stress) s = Voigt{0, 0, 0, 0, 0, 0};
  ProblemDef prob = p.c.problem;
  prob.neumann.clear();
  for (int v = 0; v < p.c.mesh.num_nodes(); ++v) {
    PatchSystem sys = build_patch_system(p.c.mesh, p.topo, v, zero, prob);
    for (int r = 0; r < sys.equilibrium.num_rows(); ++r) CHECK(sys.equilibrium.rhs[r] == 0.0);
    for (int i = 0; i < sys.target.size(); ++i) CHECK(sys.target[i] == 0.0);
  }
}

TEST_CASE("patch system counts one vector equation per patch element") {
  Pipeline p(case_plate_hole_2d(4, 6));
  for (int v = 0; v < p.c.mesh.num_nodes(); ++v) {
    PatchSystem sys = build_patch_system(p.c.mesh, p.topo, v, p.fe, p.c.problem);
    CHECK(sys.equilibrium.num_rows() ==
          2 * static_cast<int>(p.topo.vertex_elements[v].size()));
    CHECK(sys.weight.size() == 2 * static_cast<int>(sys.facets.size()));
  }
}

TEST_CASE("uniform tension: the exact traction moments solve every patch system") {
  Pipeline p(case_uniform_tension(3));
  for (int v = 0; v < p.c.mesh.num_nodes(); ++v) {
    PatchSystem sys = build_patch_system(p.c.mesh, p.topo, v, p.fe, p.c.problem);
    // exact traction: F = sigma . n on each facet; its hat moment on facet G
    // is |G|/2 * sigma n (2D)
    VecX mu(sys.weight.size());
    for (size_t i = 0; i < sys.facets.size(); ++i) {
      const Facet& f = p.topo.facets[sys.facets[i]];
      mu[2 * i + 0] = 0.5 * f.measure * f.normal[0];  // sigma_xx = 1, others 0
      mu[2 * i + 1] = 0.0;
    }
    for (int r = 0; r < sys.equilibrium.num_rows(); ++r)
      CHECK(std::abs(sys.equilibrium.dot_row(r, mu) - sys.equilibrium.rhs[r]) <= 1e-12);
    for (int r = 0; r < sys.neumann_pins.num_rows(); ++r)
      CHECK(std::abs(sys.neumann_pins.dot_row(r, mu) - sys.neumann_pins.rhs[r]) <= 1e-12);
  }
}

TEST_CASE("patch rhs summed over the patch reproduces the FE nodal residual") {
  Pipeline p(case_plate_hole_2d(5, 8));
  // interior vertices: the hat test function is admissible, so the summed
  // right-hand side must vanish by FE equilibrium
  std::vector<char> on_boundary(p.c.mesh.num_nodes(), 0);
  for (const auto& f : p.topo.facets)
    if (f.is_boundary())
      for (int k = 0; k < 2; ++k) on_boundary[f.nodes[k]] = 1;
  int checked = 0;
  for (int v = 0; v < p.c.mesh.num_nodes(); ++v) {
    if (on_boundary[v]) continue;
    PatchSystem sys = build_patch_system(p.c.mesh, p.topo, v, p.fe, p.c.problem);
    double sum[2] = {0.0, 0.0};
    for (int r = 0; r < sys.equilibrium.num_rows(); ++r) sum[r % 2] += sys.equilibrium.rhs[r];
    CHECK(std::abs(sum[0]) <= 1e-9 * p.scale);
    CHECK(std::abs(sum[1]) <= 1e-9 * p.scale);
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("solve_patch: uniform tension recovers the exact moments at zero cost") {
  Pipeline p(case_uniform_tension(3));
  for (int v = 0; v < p.c.mesh.num_nodes(); ++v) {
    PatchSystem sys = build_patch_system(p.c.mesh, p.topo, v, p.fe, p.c.problem);
    PatchSolution sol = solve_patch(sys);
    for (size_t i = 0; i < sys.facets.size(); ++i) {
      const Facet& f = p.topo.facets[sys.facets[i]];
      CHECK(sol.moment[i][0] == doctest::Approx(0.5 * f.measure * f.normal[0]).epsilon(1e-10));
      CHECK(std::abs(sol.moment[i][1]) <= 1e-10);
    }
  }
}

TEST_CASE("solve_patch matches the dense null-space QP oracle") {
  Pipeline p(case_plate_hole_2d(4, 6));
  int tested = 0;
  for (int v = 0; v < p.c.mesh.num_nodes() && tested < 20; v += 1, ++tested) {
    PatchSystem sys = build_patch_system(p.c.mesh, p.topo, v, p.fe, p.c.problem);
    PatchSolution sol = solve_patch(sys);
    const int n = sys.weight.size();
    // oracle: minimize 1/2 mu' W mu - mu' W tau  s.t. stacked constraints
    oracle::Mat A(n, oracle::Vec(n, 0.0));
    oracle::Vec b(n);
    for (int i = 0; i < n; ++i) {
      A[i][i] = sys.weight[i];
      b[i] = sys.weight[i] * sys.target[i];
    }
    oracle::Mat C;
    oracle::Vec d;
    auto push = [&](const ConstraintBlock& blk) {
      for (int r = 0; r < blk.num_rows(); ++r) {
        oracle::Vec row(n, 0.0);
        for (const auto& [c, vv] : blk.rows[r]) row[c] = vv;
        // drop rows already in the span to keep the oracle well posed
        C.push_back(row);
        d.push_back(blk.rhs[r]);
      }
    };
    push(sys.neumann_pins);
    push(eliminate_redundant_rows(sys.equilibrium, 1e-10, sys.neumann_pins));
    oracle::Vec mu = oracle::qp_nullspace(A, b, C, d);
    for (size_t i = 0; i < sys.facets.size(); ++i)
      for (int c = 0; c < 2; ++c)
        CHECK(sol.moment[i][c] == doctest::Approx(mu[2 * i + c]).epsilon(1e-9));
  }
  CHECK(tested == 20);
}

TEST_CASE("assembled tractions: uniform tension gives sigma.n on every facet") {
  Pipeline p(case_uniform_tension(4));
  TractionField field = build_standard_tractions(p.c.mesh, p.topo, p.c.problem, p.fe, 1);
  for (int fi = 0; fi < p.topo.num_facets(); ++fi) {
    const Facet& f = p.topo.facets[fi];
    for (int k = 0; k < 2; ++k) {
      CHECK(field.coeff[fi][k][0] == doctest::Approx(f.normal[0]).epsilon(1e-10));
      CHECK(std::abs(field.coeff[fi][k][1]) <= 1e-10);
    }
  }
}

TEST_CASE("zero loads give the zero traction field") {
  BundledCase c = case_uniform_tension(2);
  c.problem.neumann.clear();
  Pipeline p(std::move(c));
  TractionField field = build_standard_tractions(p.c.mesh, p.topo, p.c.problem, p.fe, 1);
  for (const auto& fc : field.coeff)
    for (const auto& v : fc) CHECK(norm(v) <= 1e-13);
}

TEST_CASE("every element passes verify_equilibrium on bundled cases") {
  for (BundledCase bc : {case_plate_hole_2d(6, 10), case_lshape_2d(4)}) {
    Pipeline p(std::move(bc));
    TractionField field = build_standard_tractions(p.c.mesh, p.topo, p.c.problem, p.fe, 1);
    double worst_f = 0.0, worst_m = 0.0;
    for (int e = 0; e < p.c.mesh.num_elements(); ++e) {
      EquilibriumResidual r = verify_equilibrium(p.c.mesh, p.topo, field, p.c.problem, e, p.scale);
      worst_f = std::max(worst_f, r.force_rel);
      worst_m = std::max(worst_m, r.moment_rel);
    }
    CHECK(worst_f <= 1e-9);
    CHECK(worst_m <= 1e-9);
  }
}

TEST_CASE("3D standard construction is equilibrated") {
  Pipeline p(case_plate_hole_3d(2, 4, 1));
  TractionField field = build_standard_tractions(p.c.mesh, p.topo, p.c.problem, p.fe, 1);
  for (int e = 0; e < p.c.mesh.num_elements(); ++e) {
    EquilibriumResidual r = verify_equilibrium(p.c.mesh, p.topo, field, p.c.problem, e, p.scale);
    CHECK(r.force_rel <= 1e-9);
    CHECK(r.moment_rel <= 1e-9);
  }
}

TEST_CASE("body force enters the equilibrium balance") {
  BundledCase c = case_uniform_tension(3);
  c.problem.neumann.clear();
  c.problem.body_force = Vec3{0.4, -0.3, 0.0};
  Pipeline p(std::move(c));
  TractionField field = build_standard_tractions(p.c.mesh, p.topo, p.c.problem, p.fe, 1);
  for (int e = 0; e < p.c.mesh.num_elements(); ++e) {
    EquilibriumResidual r = verify_equilibrium(p.c.mesh, p.topo, field, p.c.problem, e, p.scale);
    CHECK(r.force_rel <= 1e-9);
    CHECK(r.moment_rel <= 1e-9);
  }
}

TEST_CASE("a deliberate traction perturbation shows up as |facet| * delta") {
  Pipeline p(case_uniform_tension(2));
  TractionField field = build_standard_tractions(p.c.mesh, p.topo, p.c.problem, p.fe, 1);
  int fi = p.topo.element_facets[0][0];
  const Facet& f = p.topo.facets[fi];
  const double delta = 0.25;
  EquilibriumResidual before = verify_equilibrium(p.c.mesh, p.topo, field, p.c.problem,
                                                  f.elems[0], p.scale);
  for (int k = 0; k < 2; ++k) field.coeff[fi][k][0] += delta;
  EquilibriumResidual after =
      verify_equilibrium(p.c.mesh, p.topo, field, p.c.problem, f.elems[0], p.scale);
  CHECK(norm(before.force) <= 1e-12);
  CHECK(norm(after.force) == doctest::Approx(f.measure * delta).epsilon(1e-12));
}

TEST_CASE("Neumann facets carry the interpolated F_d coefficient-wise") {
  Pipeline p(case_plate_hole_2d(4, 6));
  TractionField field = build_standard_tractions(p.c.mesh, p.topo, p.c.problem, p.fe, 1);
  int found = 0;
  for (int fi = 0; fi < p.topo.num_facets(); ++fi) {
    const Facet& f = p.topo.facets[fi];
    if (f.boundary_label < 0) continue;
    auto it = p.c.problem.neumann.find(p.topo.labels[f.boundary_label]);
    if (it == p.c.problem.neumann.end()) continue;
    CHECK(field.neumann[fi] == 1);
    for (int k = 0; k < 2; ++k)
      for (int c = 0; c < 2; ++c) CHECK(field.coeff[fi][k][c] == it->second[c]);
    ++found;
  }
  CHECK(found > 0);
}

TEST_CASE("parallel patch construction equals the serial reference") {
  Pipeline p(case_plate_hole_2d(6, 10));
  TractionField serial = build_standard_tractions(p.c.mesh, p.topo, p.c.problem, p.fe, 1);
  TractionField parallel = build_standard_tractions(p.c.mesh, p.topo, p.c.problem, p.fe, 4);
  REQUIRE(serial.num_facets() == parallel.num_facets());
  for (int fi = 0; fi < serial.num_facets(); ++fi)
    for (int k = 0; k < 2; ++k)
      for (int c = 0; c < 2; ++c) CHECK(serial.coeff[fi][k][c] == parallel.coeff[fi][k][c]);
}

TEST_CASE("missing patch solutions are rejected at assembly") {
  Pipeline p(case_uniform_tension(2));
  std::vector<PatchSolution> partial(p.c.mesh.num_nodes() - 1);
  CHECK_THROWS_AS(assemble_tractions(p.c.mesh, p.topo, p.c.problem, partial), MissingDataError);
}
