#include "eespt/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "eespt/parallel.hpp"
#include "eespt/quadrature.hpp"

namespace eespt {

AdmissibleStress recover_admissible_stress(const Mesh& mesh, const Topology& topo,
                                           const TractionField& tractions,
                                           const ProblemDef& prob, int threads,
                                           int extra_degree) {
  AdmissibleStress out;
  out.provenance =
      tractions.provenance == TractionField::Provenance::Standard ? "standard" : "enhanced";
  out.stress.resize(mesh.num_elements());
  out.weak_residual.resize(mesh.num_elements());
  parallel_for(mesh.num_elements(), threads, [&](int e) {
    ElementLocalSpace space(mesh, topo, e, prob.material, extra_degree);
    ElementTraction t = element_traction(mesh, topo, tractions, e);
    auto sol = space.solve(t, prob.body(e), Vec3{0, 0, 0}, true);
    out.stress[e] = sol.stress;
    out.weak_residual[e] = sol.weak_residual;
  });
  return out;
}

ErrorReport cre_estimate(const Mesh& mesh, const AdmissibleStress& admissible,
                         const FESolution& fe, const Material& mat) {
  ErrorReport rep;
  rep.method = admissible.provenance;
  const int d = mesh.dimension;
  const int vs = mat.voigt_size();
  const Eigen::MatrixXd Dinv = mat.compliance_matrix();
  const QuadRule& vr = simplex_rule(d, 8);

  rep.element_contribution.resize(mesh.num_elements());
  rep.element_density.resize(mesh.num_elements());
  double total = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const ElementStress& sh = admissible.stress[e];
    const double jac = std::abs(affine_map(mesh, e).detJ);
    double acc = 0.0;
    for (int q = 0; q < vr.size(); ++q) {
      Voigt s = sh.at_reference(d, vr.points[q]);
      for (int c = 0; c < vs; ++c) s[c] -= fe.stress[e][c];
      Eigen::VectorXd sv(vs);
      for (int c = 0; c < vs; ++c) sv[c] = s[c];
      acc += vr.weights[q] * jac * sv.dot(Dinv * sv);
    }
    rep.element_contribution[e] = std::sqrt(std::max(0.0, acc));
    rep.element_density[e] = acc / mesh.measure(e);
    total += acc;
  }
  rep.theta = std::sqrt(std::max(0.0, total));
  return rep;
}

double effectivity(double theta, double reference_error) {
  if (!(reference_error > 0.0))
    throw UndefinedEffectivityError("effectivity undefined for zero reference error");
  return theta / reference_error;
}

std::vector<double> estimate_ratio(const std::vector<double>& contributions) {
  if (contributions.empty()) throw DegenerateRatioError("no contributions");
  double m = 0.0;
  for (double c : contributions) m = std::max(m, c * c);
  if (m == 0.0) throw DegenerateRatioError("all contributions are zero");
  std::vector<double> out(contributions.size());
  for (size_t i = 0; i < contributions.size(); ++i) out[i] = contributions[i] * contributions[i] / m;
  return out;
}

EfficiencyFactor efficiency_factor(double eta, double eta_std, double t, double t_std) {
  if (t == t_std) throw DivisionByZeroError("efficiency factor undefined when t equals t_std");
  EfficiencyFactor f;
  f.g_eta = std::abs((eta - eta_std) / eta_std);
  f.l_t = std::abs((t - t_std) / t_std);
  f.value = f.g_eta / f.l_t;
  return f;
}

double energy_norm_sigma_poly(const Mesh& mesh, const Material& mat,
                              const AdmissibleStress& admissible) {
  const int d = mesh.dimension;
  const int vs = mat.voigt_size();
  const Eigen::MatrixXd Dinv = mat.compliance_matrix();
  const QuadRule& vr = simplex_rule(d, 8);
  double total = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double jac = std::abs(affine_map(mesh, e).detJ);
    for (int q = 0; q < vr.size(); ++q) {
      Voigt s = admissible.stress[e].at_reference(d, vr.points[q]);
      Eigen::VectorXd sv(vs);
      for (int c = 0; c < vs; ++c) sv[c] = s[c];
      total += vr.weights[q] * jac * sv.dot(Dinv * sv);
    }
  }
  return std::sqrt(std::max(0.0, total));
}

}  // namespace eespt
