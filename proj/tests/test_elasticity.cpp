#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eespt/cases.hpp"
#include "eespt/elasticity.hpp"
#include "oracles.hpp"

using namespace eespt;

TEST_CASE("hooke_apply: zero strain, uniaxial identity, pure shear") {
  Material mat{1.0, 0.3, MaterialMode::PlaneStress};
  Voigt zero{0, 0, 0, 0, 0, 0};
  Voigt s = hooke_apply(mat, zero);
  for (int i = 0; i < 3; ++i) CHECK(s[i] == 0.0);

  // plane-stress uniaxial state: eps = (1, -nu, 0) gives sigma = (1, 0, 0)
  Voigt eps{1.0, -0.3, 0.0, 0, 0, 0};
  s = hooke_apply(mat, eps);
  CHECK(s[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s[1] == doctest::Approx(0.0).epsilon(1e-14));

  // pure shear eps_xy = 1: sigma_xy = 2 G = E / (1 + nu)
  Voigt shear{0.0, 0.0, 2.0, 0, 0, 0};
  s = hooke_apply(mat, shear);
  CHECK(s[2] == doctest::Approx(1.0 / 1.3).epsilon(1e-14));
}

TEST_CASE("hooke inverse round trip in 2D and 3D") {
  for (MaterialMode mode : {MaterialMode::PlaneStress, MaterialMode::Solid3D}) {
    Material mat{2.5, 0.27, mode};
    oracle::Rng rng(5);
    Voigt e{0, 0, 0, 0, 0, 0};
    for (int i = 0; i < mat.voigt_size(); ++i) e[i] = rng.normalish();
    Voigt s = hooke_apply(mat, e);
    Voigt back = hooke_inverse_apply(mat, s);
    for (int i = 0; i < mat.voigt_size(); ++i)
      CHECK(back[i] == doctest::Approx(e[i]).epsilon(1e-12));
  }
}

TEST_CASE("material validation rejects bad parameters") {
  Material bad{-1.0, 0.3, MaterialMode::PlaneStress};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  Material bad2{1.0, 0.5, MaterialMode::PlaneStress};
  CHECK_THROWS_AS(bad2.validate(), ConfigError);
}

TEST_CASE("uniform tension is solved exactly on any subdivision") {
  BundledCase c = case_uniform_tension(4);
  Topology topo = build_topology(c.mesh);
  FESolution fe = assemble_solve(c.mesh, topo, c.problem);
  for (int e = 0; e < c.mesh.num_elements(); ++e) {
    CHECK(fe.stress[e][0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fe.stress[e][1] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(fe.stress[e][2] == doctest::Approx(0.0).epsilon(1e-10));
  }
}

TEST_CASE("zero loads give the zero solution") {
  BundledCase c = case_uniform_tension(2);
  c.problem.neumann.clear();
  Topology topo = build_topology(c.mesh);
  FESolution fe = assemble_solve(c.mesh, topo, c.problem);
  for (const auto& u : fe.displacement) CHECK(norm(u) < 1e-14);
}

TEST_CASE("missing constraints raise a rigid-mode error") {
  BundledCase c = case_uniform_tension(2);
  c.problem.dirichlet.clear();
  c.problem.dirichlet["left"];  // label present, but no component pinned
  Topology topo = build_topology(c.mesh);
  CHECK_THROWS_AS(assemble_solve(c.mesh, topo, c.problem), RigidModeError);
}

TEST_CASE("patch test: affine displacement fields are reproduced exactly") {
  BundledCase c = case_lshape_2d(3);
  Topology topo = build_topology(c.mesh);
  const double A[2][2] = {{0.31, -0.12}, {0.055, 0.2}};
  const double b[2] = {0.01, -0.02};
  auto affine = [&](const Vec3& x) {
    return Vec3{A[0][0] * x[0] + A[0][1] * x[1] + b[0], A[1][0] * x[0] + A[1][1] * x[1] + b[1],
                0.0};
  };
  ProblemDef prob;
  prob.material = c.problem.material;
  for (const std::string& label : {"left", "right", "bottom", "top", "notch"})
    prob.dirichlet[label].field = affine;
  FESolution fe = assemble_solve(c.mesh, topo, prob);
  for (int n = 0; n < c.mesh.num_nodes(); ++n) {
    Vec3 exact = affine(c.mesh.nodes[n]);
    CHECK(norm(fe.displacement[n] - exact) < 1e-10);
  }
}

TEST_CASE("global FE equilibrium holds for every free test function") {
  BundledCase c = case_plate_hole_2d(6, 10);
  Topology topo = build_topology(c.mesh);
  FESolution fe = assemble_solve(c.mesh, topo, c.problem);
  const int d = 2;
  // residual assembled from element stresses, independently of the solver path
  std::vector<double> residual(c.mesh.num_nodes() * d, 0.0);
  for (int e = 0; e < c.mesh.num_elements(); ++e) {
    auto grads = shape_gradients(c.mesh, e);
    double vol = c.mesh.measure(e);
    const Voigt& s = fe.stress[e];
    for (int a = 0; a <= d; ++a) {
      int n = c.mesh.elements[e][a];
      residual[d * n + 0] += vol * (s[0] * grads[a][0] + s[2] * grads[a][1]);
      residual[d * n + 1] += vol * (s[2] * grads[a][0] + s[1] * grads[a][1]);
    }
  }
  for (const auto& f : topo.facets) {
    if (f.boundary_label < 0) continue;
    auto it = c.problem.neumann.find(topo.labels[f.boundary_label]);
    if (it == c.problem.neumann.end()) continue;
    for (int k = 0; k < d; ++k)
      for (int comp = 0; comp < d; ++comp)
        residual[d * f.nodes[k] + comp] -= f.measure / d * it->second[comp];
  }
  // constrained dofs carry reactions; find them from the labels
  std::vector<char> constrained(c.mesh.num_nodes() * d, 0);
  for (const auto& f : topo.facets) {
    if (f.boundary_label < 0) continue;
    auto it = c.problem.dirichlet.find(topo.labels[f.boundary_label]);
    if (it == c.problem.dirichlet.end()) continue;
    for (int k = 0; k < d; ++k)
      for (int comp = 0; comp < d; ++comp)
        if (it->second.component[comp]) constrained[d * f.nodes[k] + comp] = 1;
  }
  const double scale = load_scale(c.mesh, c.problem, fe);
  for (size_t i = 0; i < residual.size(); ++i)
    if (!constrained[i]) CHECK(std::abs(residual[i]) <= 1e-9 * scale);
}

TEST_CASE("energy norm identity: ||u||_u equals ||K eps(u)||_sigma") {
  BundledCase c = case_lshape_2d(2);
  oracle::Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<Vec3> u(c.mesh.num_nodes());
    for (auto& v : u) v = {rng.normalish(), rng.normalish(), 0.0};
    double nu = energy_norm_u(c.mesh, c.problem.material, u);
    // elementwise stress of the P1 field
    std::vector<Voigt> sig(c.mesh.num_elements());
    for (int e = 0; e < c.mesh.num_elements(); ++e) {
      auto grads = shape_gradients(c.mesh, e);
      Voigt eps{0, 0, 0, 0, 0, 0};
      for (int a = 0; a < 3; ++a) {
        int n = c.mesh.elements[e][a];
        eps[0] += grads[a][0] * u[n][0];
        eps[1] += grads[a][1] * u[n][1];
        eps[2] += grads[a][1] * u[n][0] + grads[a][0] * u[n][1];
      }
      sig[e] = hooke_apply(c.problem.material, eps);
    }
    double ns = energy_norm_sigma(c.mesh, c.problem.material, sig);
    CHECK(nu == doctest::Approx(ns).epsilon(1e-11));
  }
}

TEST_CASE("zero field has zero energy norm; uniform stress on the unit square has norm 1") {
  BundledCase c = case_uniform_tension(3);
  std::vector<Voigt> zero(c.mesh.num_elements(), Voigt{0, 0, 0, 0, 0, 0});
  CHECK(energy_norm_sigma(c.mesh, c.problem.material, zero) == 0.0);
  std::vector<Voigt> uni(c.mesh.num_elements(), Voigt{1.0, 0, 0, 0, 0, 0});
  CHECK(energy_norm_sigma(c.mesh, c.problem.material, uni) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("reference error: zero levels of separation give zero") {
  BundledCase c = case_uniform_tension(2);
  Topology topo = build_topology(c.mesh);
  FESolution fe = assemble_solve(c.mesh, topo, c.problem);
  // uniform tension is exact, so any refinement level yields zero error
  Mesh fine = uniform_refine(c.mesh, 1);
  Topology ftopo = build_topology(fine);
  FESolution ff = assemble_solve(fine, ftopo, c.problem);
  ReferenceError re = reference_error(c.mesh, fe, fine, ff, c.problem.material);
  CHECK(re.value <= 1e-10);
  CHECK(re.direct <= 1e-10);
}

TEST_CASE("reference error: shortcut matches the direct integral on a nested pair") {
  BundledCase c = case_plate_hole_2d(5, 8);
  Topology topo = build_topology(c.mesh);
  FESolution fe = assemble_solve(c.mesh, topo, c.problem);
  Mesh fine = uniform_refine(c.mesh, 2);
  Topology ftopo = build_topology(fine);
  FESolution ff = assemble_solve(fine, ftopo, c.problem);
  ReferenceError re = reference_error(c.mesh, fe, fine, ff, c.problem.material);
  CHECK(re.value > 0.0);
  CHECK(re.direct == doctest::Approx(re.value).epsilon(1e-8));
  double sq = 0.0;
  for (double v : re.element_contributions) sq += v * v;
  CHECK(std::sqrt(sq) == doctest::Approx(re.direct).epsilon(1e-12));
}

TEST_CASE("nested energy norms are monotone under refinement") {
  BundledCase c = case_plate_hole_2d(4, 6);
  Topology topo = build_topology(c.mesh);
  FESolution fe = assemble_solve(c.mesh, topo, c.problem);
  Mesh fine = uniform_refine(c.mesh, 1);
  Topology ftopo = build_topology(fine);
  FESolution ff = assemble_solve(fine, ftopo, c.problem);
  CHECK(energy_norm_u(c.mesh, c.problem.material, fe.displacement) <=
        energy_norm_u(fine, c.problem.material, ff.displacement) + 1e-12);
}

TEST_CASE("reference error rejects a non-nested mesh") {
  BundledCase c = case_uniform_tension(2);
  Topology topo = build_topology(c.mesh);
  FESolution fe = assemble_solve(c.mesh, topo, c.problem);
  BundledCase other = case_uniform_tension(3);
  Topology otopo = build_topology(other.mesh);
  FESolution ofe = assemble_solve(other.mesh, otopo, other.problem);
  CHECK_THROWS_AS(reference_error(c.mesh, fe, other.mesh, ofe, c.problem.material), NestingError);
}
