#include "eespt/elasticity.hpp"

#include <algorithm>
#include <cmath>

#include "eespt/linalg.hpp"

namespace eespt {

void Material::validate() const {
  if (!(young > 0.0)) throw ConfigError("Young's modulus must be positive");
  if (!(poisson > -1.0 && poisson < 0.5)) throw ConfigError("Poisson ratio must lie in (-1, 0.5)");
}

Eigen::MatrixXd Material::stiffness_matrix() const {
  validate();
  if (mode == MaterialMode::PlaneStress) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(3, 3);
    const double f = young / (1.0 - poisson * poisson);
    D(0, 0) = D(1, 1) = f;
    D(0, 1) = D(1, 0) = f * poisson;
    D(2, 2) = f * (1.0 - poisson) / 2.0;
    return D;
  }
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(6, 6);
  const double lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
  const double mu = young / (2.0 * (1.0 + poisson));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) D(i, j) = lambda;
    D(i, i) += 2.0 * mu;
    D(i + 3, i + 3) = mu;
  }
  return D;
}

Eigen::MatrixXd Material::compliance_matrix() const { return stiffness_matrix().inverse(); }

namespace {

Voigt apply_matrix(const Eigen::MatrixXd& M, const Voigt& v, int n) {
  Voigt out{0, 0, 0, 0, 0, 0};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i] += M(i, j) * v[j];
  return out;
}

}  // namespace

Voigt hooke_apply(const Material& mat, const Voigt& strain) {
  return apply_matrix(mat.stiffness_matrix(), strain, mat.voigt_size());
}

Voigt hooke_inverse_apply(const Material& mat, const Voigt& stress) {
  return apply_matrix(mat.compliance_matrix(), stress, mat.voigt_size());
}

void ProblemDef::validate(const Topology& topo) const {
  material.validate();
  if (dirichlet.empty()) throw ConfigError("problem needs at least one Dirichlet label");
  for (const auto& [name, bc] : dirichlet) {
    if (topo.label_id(name) < 0) throw ConfigError("Dirichlet label '" + name + "' not in mesh");
    if (neumann.count(name)) throw ConfigError("label '" + name + "' is both Dirichlet and Neumann");
  }
  for (const auto& [name, t] : neumann)
    if (topo.label_id(name) < 0) throw ConfigError("Neumann label '" + name + "' not in mesh");
}

std::vector<Vec3> shape_gradients(const Mesh& mesh, int e) {
  const auto& el = mesh.elements[e];
  const int d = mesh.dimension;
  Eigen::MatrixXd J(d, d);
  for (int c = 0; c < d; ++c) {
    Vec3 edge = mesh.nodes[el[c + 1]] - mesh.nodes[el[0]];
    for (int r = 0; r < d; ++r) J(r, c) = edge[r];
  }
  Eigen::MatrixXd Jinv = J.inverse();
  std::vector<Vec3> g(d + 1, Vec3{0, 0, 0});
  // reference gradients: lambda_0 = 1 - sum(xi), lambda_c = xi_c
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) {
      g[c + 1][r] += Jinv(c, r);
      g[0][r] -= Jinv(c, r);
    }
  return g;
}

namespace {

// Strain-displacement rows: strain = B * u_nodal, engineering shear.
Eigen::MatrixXd strain_matrix(const std::vector<Vec3>& grads, int dim) {
  const int nn = static_cast<int>(grads.size());
  const int vs = (dim == 2) ? 3 : 6;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(vs, dim * nn);
  for (int a = 0; a < nn; ++a) {
    const Vec3& g = grads[a];
    if (dim == 2) {
      B(0, 2 * a + 0) = g[0];
      B(1, 2 * a + 1) = g[1];
      B(2, 2 * a + 0) = g[1];
      B(2, 2 * a + 1) = g[0];
    } else {
      B(0, 3 * a + 0) = g[0];
      B(1, 3 * a + 1) = g[1];
      B(2, 3 * a + 2) = g[2];
      B(3, 3 * a + 1) = g[2];
      B(3, 3 * a + 2) = g[1];
      B(4, 3 * a + 0) = g[2];
      B(4, 3 * a + 2) = g[0];
      B(5, 3 * a + 0) = g[1];
      B(5, 3 * a + 1) = g[0];
    }
  }
  return B;
}

}  // namespace

FESolution assemble_solve(const Mesh& mesh, const Topology& topo, const ProblemDef& prob) {
  prob.validate(topo);
  const int d = mesh.dimension;
  const int ndof = mesh.num_nodes() * d;
  const Eigen::MatrixXd D = prob.material.stiffness_matrix();

  // Dirichlet constraints collected nodewise from labeled boundary facets.
  std::vector<char> constrained(ndof, 0);
  std::vector<double> cvalue(ndof, 0.0);
  for (const auto& f : topo.facets) {
    if (f.boundary_label < 0) continue;
    auto it = prob.dirichlet.find(topo.labels[f.boundary_label]);
    if (it == prob.dirichlet.end()) continue;
    for (int k = 0; k < d; ++k) {
      int node = f.nodes[k];
      for (int c = 0; c < d; ++c) {
        std::optional<double> want;
        if (it->second.field) want = it->second.field(mesh.nodes[node])[c];
        else if (it->second.component[c]) want = *it->second.component[c];
        if (!want) continue;
        int dof = node * d + c;
        if (constrained[dof] && std::abs(cvalue[dof] - *want) > 1e-12)
          throw ConfigError("conflicting Dirichlet values at node " + std::to_string(node));
        constrained[dof] = 1;
        cvalue[dof] = *want;
      }
    }
  }

  std::vector<int> free_index(ndof, -1);
  int nfree = 0;
  for (int i = 0; i < ndof; ++i)
    if (!constrained[i]) free_index[i] = nfree++;
  if (nfree == ndof) throw RigidModeError("no Dirichlet constraint was applied to any node");

  SparseSymmetric A(nfree);
  VecX b = VecX::Zero(nfree);

  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto grads = shape_gradients(mesh, e);
    const Eigen::MatrixXd B = strain_matrix(grads, d);
    const double vol = mesh.measure(e);
    const Eigen::MatrixXd Ke = vol * B.transpose() * D * B;
    const auto& el = mesh.elements[e];
    const Vec3 f = prob.body(e);
    const int nn = d + 1;
    std::vector<int> dofs(nn * d);
    for (int a = 0; a < nn; ++a)
      for (int c = 0; c < d; ++c) dofs[a * d + c] = el[a] * d + c;
    for (int a = 0; a < nn; ++a)
      for (int c = 0; c < d; ++c) {
        int gi = dofs[a * d + c];
        if (free_index[gi] >= 0) b[free_index[gi]] += vol / nn * f[c];
      }
    for (int i = 0; i < nn * d; ++i) {
      int gi = dofs[i];
      for (int j = 0; j < nn * d; ++j) {
        int gj = dofs[j];
        if (free_index[gi] >= 0 && free_index[gj] >= 0) {
          if (free_index[gi] >= free_index[gj]) A.add(free_index[gi], free_index[gj], Ke(i, j));
        } else if (free_index[gi] >= 0 && constrained[gj]) {
          b[free_index[gi]] -= Ke(i, j) * cvalue[gj];
        }
      }
    }
  }

  // Neumann facet loads: constant traction, hat integral = |facet|/d per node.
  for (const auto& f : topo.facets) {
    if (f.boundary_label < 0) continue;
    auto it = prob.neumann.find(topo.labels[f.boundary_label]);
    if (it == prob.neumann.end()) continue;
    for (int k = 0; k < d; ++k)
      for (int c = 0; c < d; ++c) {
        int dof = f.nodes[k] * d + c;
        if (free_index[dof] >= 0) b[free_index[dof]] += f.measure / d * it->second[c];
      }
  }

  A.finalize();
  VecX u_free;
  try {
    u_free = solve_spd(A, b);
  } catch (const NotSpdError&) {
    throw RigidModeError("stiffness is singular: Dirichlet constraints leave rigid modes");
  }

  FESolution sol;
  sol.degree = 1;
  sol.displacement.assign(mesh.num_nodes(), Vec3{0, 0, 0});
  for (int n = 0; n < mesh.num_nodes(); ++n)
    for (int c = 0; c < d; ++c) {
      int dof = n * d + c;
      sol.displacement[n][c] = constrained[dof] ? cvalue[dof] : u_free[free_index[dof]];
    }

  sol.strain.resize(mesh.num_elements());
  sol.stress.resize(mesh.num_elements());
  const int vs = prob.material.voigt_size();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto grads = shape_gradients(mesh, e);
    Voigt eps{0, 0, 0, 0, 0, 0};
    const auto& el = mesh.elements[e];
    for (int a = 0; a <= d; ++a) {
      const Vec3& u = sol.displacement[el[a]];
      const Vec3& g = grads[a];
      if (d == 2) {
        eps[0] += g[0] * u[0];
        eps[1] += g[1] * u[1];
        eps[2] += g[1] * u[0] + g[0] * u[1];
      } else {
        eps[0] += g[0] * u[0];
        eps[1] += g[1] * u[1];
        eps[2] += g[2] * u[2];
        eps[3] += g[2] * u[1] + g[1] * u[2];
        eps[4] += g[2] * u[0] + g[0] * u[2];
        eps[5] += g[1] * u[0] + g[0] * u[1];
      }
    }
    sol.strain[e] = eps;
    sol.stress[e] = apply_matrix(D, eps, vs);
  }
  return sol;
}

double energy_norm_u(const Mesh& mesh, const Material& mat, const std::vector<Vec3>& u) {
  const int d = mesh.dimension;
  const Eigen::MatrixXd D = mat.stiffness_matrix();
  const int vs = mat.voigt_size();
  double acc = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto grads = shape_gradients(mesh, e);
    Voigt eps{0, 0, 0, 0, 0, 0};
    const auto& el = mesh.elements[e];
    for (int a = 0; a <= d; ++a) {
      const Vec3& ua = u[el[a]];
      const Vec3& g = grads[a];
      if (d == 2) {
        eps[0] += g[0] * ua[0];
        eps[1] += g[1] * ua[1];
        eps[2] += g[1] * ua[0] + g[0] * ua[1];
      } else {
        eps[0] += g[0] * ua[0];
        eps[1] += g[1] * ua[1];
        eps[2] += g[2] * ua[2];
        eps[3] += g[2] * ua[1] + g[1] * ua[2];
        eps[4] += g[2] * ua[0] + g[0] * ua[2];
        eps[5] += g[1] * ua[0] + g[0] * ua[1];
      }
    }
    Voigt sig = apply_matrix(D, eps, vs);
    double dens = 0.0;
    for (int i = 0; i < vs; ++i) dens += sig[i] * eps[i];
    acc += mesh.measure(e) * dens;
  }
  return std::sqrt(std::max(0.0, acc));
}

double energy_norm_sigma(const Mesh& mesh, const Material& mat, const std::vector<Voigt>& stress) {
  const Eigen::MatrixXd Dinv = mat.compliance_matrix();
  const int vs = mat.voigt_size();
  double acc = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    Voigt eps = apply_matrix(Dinv, stress[e], vs);
    double dens = 0.0;
    for (int i = 0; i < vs; ++i) dens += stress[e][i] * eps[i];
    acc += mesh.measure(e) * dens;
  }
  return std::sqrt(std::max(0.0, acc));
}

double load_scale(const Mesh& mesh, const ProblemDef& prob, const FESolution& fe) {
  double s = 0.0;
  for (const auto& [name, t] : prob.neumann) s = std::max(s, norm(t));
  const double diam = mesh.bbox_diameter();
  for (int e = 0; e < mesh.num_elements(); ++e) s = std::max(s, norm(prob.body(e)) * diam);
  for (const auto& sig : fe.stress) {
    double m = 0.0;
    for (double v : sig) m += v * v;
    s = std::max(s, std::sqrt(m));
  }
  return s;
}

ReferenceError reference_error(const Mesh& coarse, const FESolution& u_h, const Mesh& fine,
                               const FESolution& u_ref, const Material& mat) {
  if (fine.parent_element.size() != static_cast<size_t>(fine.num_elements()))
    throw NestingError("fine mesh does not carry refinement ancestry");
  if (fine.num_elements() % coarse.num_elements() != 0)
    throw NestingError("fine mesh is not a uniform refinement of the coarse mesh");
  for (int p : fine.parent_element)
    if (p < 0 || p >= coarse.num_elements()) throw NestingError("invalid parent element id");
  if (std::abs(fine.total_measure() - coarse.total_measure()) >
      1e-10 * std::abs(coarse.total_measure()))
    throw NestingError("fine and coarse meshes cover different domains");

  const double nref = energy_norm_u(fine, mat, u_ref.displacement);
  const double nh = energy_norm_u(coarse, mat, u_h.displacement);
  double rad = nref * nref - nh * nh;
  if (rad < -1e-12 * std::max(1.0, nref * nref))
    throw InconsistencyError("reference energy norm below coarse energy norm");

  ReferenceError out;
  out.value = std::sqrt(std::max(0.0, rad));
  const bool shortcut_below_roundoff = rad <= 1e-13 * std::max(1.0, nref * nref);

  // direct route: integrate the strain difference childwise
  const Eigen::MatrixXd D = mat.stiffness_matrix();
  const int vs = mat.voigt_size();
  std::vector<double> acc(coarse.num_elements(), 0.0);
  for (int fe_id = 0; fe_id < fine.num_elements(); ++fe_id) {
    const int ce = fine.parent_element[fe_id];
    Voigt diff{0, 0, 0, 0, 0, 0};
    for (int i = 0; i < vs; ++i) diff[i] = u_ref.strain[fe_id][i] - u_h.strain[ce][i];
    Voigt sig = apply_matrix(D, diff, vs);
    double dens = 0.0;
    for (int i = 0; i < vs; ++i) dens += sig[i] * diff[i];
    acc[ce] += fine.measure(fe_id) * dens;
  }
  double total = 0.0;
  out.element_contributions.resize(coarse.num_elements());
  for (int e = 0; e < coarse.num_elements(); ++e) {
    total += acc[e];
    out.element_contributions[e] = std::sqrt(std::max(0.0, acc[e]));
  }
  out.direct = std::sqrt(std::max(0.0, total));
  // the energy-difference form has no significant digits left at the
  // round-off floor; the direct integral stays accurate there
  if (shortcut_below_roundoff) out.value = out.direct;
  return out;
}

}  // namespace eespt
