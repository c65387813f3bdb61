#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eespt/cases.hpp"
#include "eespt/estimator.hpp"
#include "eespt/quadrature.hpp"

using namespace eespt;

namespace {

struct Pipeline {
  BundledCase c;
  Topology topo;
  FESolution fe;
  TractionField field;
  double scale;

  explicit Pipeline(BundledCase bc, int threads = 1)
      : c(std::move(bc)), topo(build_topology(c.mesh)) {
    fe = assemble_solve(c.mesh, topo, c.problem);
    field = build_standard_tractions(c.mesh, topo, c.problem, fe, threads);
    scale = load_scale(c.mesh, c.problem, fe);
  }
};

}  // namespace

TEST_CASE("recovery on the uniform-tension case returns the constant stress") {
  Pipeline p(case_uniform_tension(4));
  AdmissibleStress adm = recover_admissible_stress(p.c.mesh, p.topo, p.field, p.c.problem);
  for (int e = 0; e < p.c.mesh.num_elements(); ++e) {
    for (const Voigt& cf : adm.stress[e].coeff) {
      CHECK(cf[0] == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(std::abs(cf[1]) <= 1e-9);
      CHECK(std::abs(cf[2]) <= 1e-9);
    }
    CHECK(adm.weak_residual[e] <= 1e-9 * p.scale);
  }
}

TEST_CASE("zero loads recover the zero stress field") {
  BundledCase c = case_uniform_tension(2);
  c.problem.neumann.clear();
  Pipeline p(std::move(c));
  AdmissibleStress adm = recover_admissible_stress(p.c.mesh, p.topo, p.field, p.c.problem);
  for (int e = 0; e < p.c.mesh.num_elements(); ++e)
    for (const Voigt& cf : adm.stress[e].coeff)
      for (int i = 0; i < 3; ++i) CHECK(std::abs(cf[i]) <= 1e-12);
}

TEST_CASE("bundled case: recovery residuals stay below tolerance") {
  Pipeline p(case_lshape_2d(5));
  AdmissibleStress adm = recover_admissible_stress(p.c.mesh, p.topo, p.field, p.c.problem);
  double worst = 0.0;
  for (double r : adm.weak_residual) worst = std::max(worst, r);
  CHECK(worst <= 1e-9 * p.scale);
}

TEST_CASE("parallel recovery equals the serial reference") {
  Pipeline p(case_plate_hole_2d(5, 8));
  AdmissibleStress serial = recover_admissible_stress(p.c.mesh, p.topo, p.field, p.c.problem, 1);
  AdmissibleStress parallel = recover_admissible_stress(p.c.mesh, p.topo, p.field, p.c.problem, 4);
  for (int e = 0; e < p.c.mesh.num_elements(); ++e)
    for (size_t l = 0; l < serial.stress[e].coeff.size(); ++l)
      for (int i = 0; i < 3; ++i)
        CHECK(serial.stress[e].coeff[l][i] == parallel.stress[e].coeff[l][i]);
}

TEST_CASE("cre_estimate vanishes when the admissible stress equals the FE stress") {
  Pipeline p(case_uniform_tension(3));
  // build an admissible field equal to K eps(u_h) elementwise
  AdmissibleStress adm;
  adm.provenance = "standard";
  adm.stress.resize(p.c.mesh.num_elements());
  adm.weak_residual.assign(p.c.mesh.num_elements(), 0.0);
  const LagrangeBasis& sbasis = LagrangeBasis::get(2, 3);
  for (int e = 0; e < p.c.mesh.num_elements(); ++e) {
    adm.stress[e].element = e;
    adm.stress[e].degree = 3;
    adm.stress[e].coeff.assign(sbasis.size(), Voigt{0, 0, 0, 0, 0, 0});
    for (auto& cf : adm.stress[e].coeff)
      for (int i = 0; i < 3; ++i) cf[i] = p.fe.stress[e][i];
  }
  ErrorReport rep = cre_estimate(p.c.mesh, adm, p.fe, p.c.problem.material);
  CHECK(rep.theta <= 1e-14);
}

TEST_CASE("uniform tension: theta is numerically zero") {
  Pipeline p(case_uniform_tension(8));
  AdmissibleStress adm = recover_admissible_stress(p.c.mesh, p.topo, p.field, p.c.problem);
  ErrorReport rep = cre_estimate(p.c.mesh, adm, p.fe, p.c.problem.material);
  double nu = energy_norm_u(p.c.mesh, p.c.problem.material, p.fe.displacement);
  CHECK(rep.theta <= 1e-10 * nu);
}

TEST_CASE("theta aggregates the element contributions pythagoreanly") {
  Pipeline p(case_lshape_2d(4));
  AdmissibleStress adm = recover_admissible_stress(p.c.mesh, p.topo, p.field, p.c.problem);
  ErrorReport rep = cre_estimate(p.c.mesh, adm, p.fe, p.c.problem.material);
  double sq = 0.0;
  for (double c : rep.element_contribution) sq += c * c;
  CHECK(std::sqrt(sq) == doctest::Approx(rep.theta).epsilon(1e-12));
  for (int e = 0; e < p.c.mesh.num_elements(); ++e) {
    double dens = rep.element_contribution[e] * rep.element_contribution[e] / p.c.mesh.measure(e);
    CHECK(rep.element_density[e] == doctest::Approx(dens).epsilon(1e-12));
  }
}

TEST_CASE("guaranteed bound against a nested overkill reference") {
  for (BundledCase bc : {case_plate_hole_2d(6, 10), case_lshape_2d(5)}) {
    Pipeline p(std::move(bc));
    AdmissibleStress adm = recover_admissible_stress(p.c.mesh, p.topo, p.field, p.c.problem);
    ErrorReport rep = cre_estimate(p.c.mesh, adm, p.fe, p.c.problem.material);
    Mesh fine = uniform_refine(p.c.mesh, 2);
    Topology ftopo = build_topology(fine);
    FESolution ff = assemble_solve(fine, ftopo, p.c.problem);
    ReferenceError re = reference_error(p.c.mesh, p.fe, fine, ff, p.c.problem.material);
    CHECK(re.value > 0.0);
    CHECK(rep.theta >= re.value * (1.0 - 1e-6));
    double eta = effectivity(rep.theta, re.value);
    CHECK(eta >= 1.0 - 1e-10);
    CHECK(eta <= 8.0);
  }
}

TEST_CASE("3D bound sanity on the coarse plate") {
  Pipeline p(case_plate_hole_3d(2, 4, 1));
  AdmissibleStress adm = recover_admissible_stress(p.c.mesh, p.topo, p.field, p.c.problem);
  ErrorReport rep = cre_estimate(p.c.mesh, adm, p.fe, p.c.problem.material);
  Mesh fine = uniform_refine(p.c.mesh, 1);
  Topology ftopo = build_topology(fine);
  FESolution ff = assemble_solve(fine, ftopo, p.c.problem);
  ReferenceError re = reference_error(p.c.mesh, p.fe, fine, ff, p.c.problem.material);
  CHECK(rep.theta >= re.value * (1.0 - 1e-6));
}

TEST_CASE("effectivity basics and error paths") {
  CHECK(effectivity(2.0, 2.0) == 1.0);
  CHECK(effectivity(2.0, 1.0) == 2.0);
  CHECK_THROWS_AS(effectivity(1.0, 0.0), UndefinedEffectivityError);
}

TEST_CASE("estimate ratio normalizes by the maximal squared contribution") {
  std::vector<double> contrib = {1.0, 0.5, 2.0};
  std::vector<double> r = estimate_ratio(contrib);
  CHECK(r[2] == 1.0);
  CHECK(r[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(r[1] == doctest::Approx(0.0625).epsilon(1e-14));
  std::vector<double> uni = {0.7, 0.7, 0.7};
  for (double v : estimate_ratio(uni)) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  std::vector<double> zero = {0.0, 0.0};
  CHECK_THROWS_AS(estimate_ratio(zero), DegenerateRatioError);
}

TEST_CASE("efficiency factor formula and the degenerate timing case") {
  EfficiencyFactor f = efficiency_factor(1.8, 2.0, 15.0, 10.0);
  CHECK(f.g_eta == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(f.l_t == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(f.value == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(efficiency_factor(2.0, 2.0, 15.0, 10.0).value == 0.0);
  CHECK_THROWS_AS(efficiency_factor(1.8, 2.0, 10.0, 10.0), DivisionByZeroError);
}

TEST_CASE("Prager-Synge identity on the 2-element square with overkill reference") {
  BundledCase c = case_uniform_tension(1);
  c.problem.neumann.clear();
  c.problem.neumann["right"] = Vec3{0.0, 1.0, 0.0};  // shear so the solve is inexact
  Pipeline p(std::move(c));
  AdmissibleStress adm = recover_admissible_stress(p.c.mesh, p.topo, p.field, p.c.problem);
  ErrorReport rep = cre_estimate(p.c.mesh, adm, p.fe, p.c.problem.material);
  REQUIRE(rep.theta > 0.0);

  Mesh fine = uniform_refine(p.c.mesh, 4);
  Topology ftopo = build_topology(fine);
  FESolution ff = assemble_solve(fine, ftopo, p.c.problem);
  ReferenceError re = reference_error(p.c.mesh, p.fe, fine, ff, p.c.problem.material);

  // || sigma_ref - sigma_hat ||^2 over the fine mesh
  const Eigen::MatrixXd Dinv = p.c.problem.material.compliance_matrix();
  const QuadRule& vr = simplex_rule(2, 8);
  double s_term = 0.0;
  for (int fe_id = 0; fe_id < fine.num_elements(); ++fe_id) {
    int ce = fine.parent_element[fe_id];
    AffineMap fmap = affine_map(fine, fe_id);
    AffineMap cmap = affine_map(p.c.mesh, ce);
    for (int q = 0; q < vr.size(); ++q) {
      Vec3 x = fmap.to_physical(vr.points[q]);
      Voigt sh = adm.stress[ce].at_reference(2, cmap.to_reference(x));
      Eigen::VectorXd diff(3);
      for (int i = 0; i < 3; ++i) diff[i] = ff.stress[fe_id][i] - sh[i];
      s_term += vr.weights[q] * std::abs(fmap.detJ) * diff.dot(Dinv * diff);
    }
  }
  double u_term = re.value * re.value;
  double lhs = rep.theta * rep.theta;
  CHECK(std::abs(lhs - (u_term + s_term)) <= 0.05 * lhs);
}
