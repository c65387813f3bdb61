#include "eespt/local_solver.hpp"

#include <algorithm>
#include <cmath>

namespace eespt {

Vec3 AffineMap::to_physical(const Vec3& ref) const {
  Vec3 out = origin;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out[r] += J(r, c) * ref[c];
  return out;
}

Vec3 AffineMap::to_reference(const Vec3& phys) const {
  Vec3 d = phys - origin;
  Vec3 out{0, 0, 0};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out[r] += Jinv(r, c) * d[c];
  return out;
}

AffineMap affine_map(const Mesh& mesh, int elem) {
  const int d = mesh.dimension;
  AffineMap m;
  m.origin = mesh.nodes[mesh.elements[elem][0]];
  m.J = Eigen::Matrix3d::Identity();
  for (int c = 0; c < d; ++c) {
    Vec3 e = mesh.nodes[mesh.elements[elem][c + 1]] - m.origin;
    for (int r = 0; r < 3; ++r) m.J(r, c) = e[r];
  }
  if (d == 2) m.J(2, 2) = 1.0;
  m.detJ = m.J.determinant();
  m.Jinv = m.J.inverse();
  return m;
}

SimplexMoments simplex_moments(const Mesh& mesh, int elem) {
  const int d = mesh.dimension;
  SimplexMoments sm;
  sm.measure = std::abs(mesh.signed_measure(elem));
  double bb = mesh.bbox_diameter();
  if (sm.measure < 1e-14 * std::pow(bb, d))
    throw DegenerateElementError("element " + std::to_string(elem) + " is degenerate");
  sm.centroid = mesh.centroid(elem);
  const auto& el = mesh.elements[elem];
  if (d == 2) {
    // polar moment of a triangle about its centroid: A (a^2 + b^2 + c^2) / 36
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        Vec3 e = mesh.nodes[el[i]] - mesh.nodes[el[j]];
        s += dot(e, e);
      }
    sm.inertia_scalar = sm.measure * s / 36.0;
  } else {
    // covariance of a tetrahedron about the centroid: (V/20) sum x_i x_i^T
    Eigen::Matrix3d C = Eigen::Matrix3d::Zero();
    for (int i = 0; i < 4; ++i) {
      Vec3 x = mesh.nodes[el[i]] - sm.centroid;
      Eigen::Vector3d v(x[0], x[1], x[2]);
      C += v * v.transpose();
    }
    C *= sm.measure / 20.0;
    sm.inertia_tensor = C.trace() * Eigen::Matrix3d::Identity() - C;
  }
  return sm;
}

Voigt ElementStress::at_reference(int dim, const Vec3& ref) const {
  const LagrangeBasis& basis = LagrangeBasis::get(dim, degree);
  std::vector<double> phi;
  basis.eval(ref, phi);
  Voigt out{0, 0, 0, 0, 0, 0};
  for (int l = 0; l < basis.size(); ++l)
    for (int c = 0; c < 6; ++c) out[c] += phi[l] * coeff[l][c];
  return out;
}

namespace {

// Rows of the engineering-Voigt strain operator for given physical gradients.
void fill_strain_matrix(Eigen::MatrixXd& B, const std::vector<Vec3>& grads, int dim) {
  const int nn = static_cast<int>(grads.size());
  B.setZero();
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
}

constexpr int kQuadDegree = 8;

}  // namespace

ElementLocalSpace::ElementLocalSpace(const Mesh& mesh, const Topology& topo, int elem,
                                     const Material& mat, int extra_degree)
    : elem_(elem), dim_(mesh.dimension), degree_(1 + extra_degree), mat_(mat) {
  if (extra_degree < 1 || extra_degree > 3)
    throw UnsupportedDegreeError("extra degree must be in 1..3");
  map_ = affine_map(mesh, elem);
  moments_ = simplex_moments(mesh, elem);
  D_ = mat.stiffness_matrix();

  const LagrangeBasis& basis = LagrangeBasis::get(dim_, degree_);
  nshape_ = basis.size();
  const int ndof = num_dofs();
  const int vs = mat.voigt_size();

  // volume quadrature
  const QuadRule& vr = simplex_rule(dim_, kQuadDegree);
  const double jac = std::abs(map_.detJ);
  wq_.resize(vr.size());
  xq_.resize(vr.size());
  phi_.resize(vr.size());
  gradq_.resize(vr.size());
  Bq_.assign(vr.size(), Eigen::MatrixXd::Zero(vs, ndof));
  K_ = Eigen::MatrixXd::Zero(ndof, ndof);
  intB_ = Eigen::MatrixXd::Zero(ndof, vs);
  std::vector<Vec3> ref_grads;
  for (int q = 0; q < vr.size(); ++q) {
    wq_[q] = vr.weights[q] * jac;
    xq_[q] = map_.to_physical(vr.points[q]);
    basis.eval(vr.points[q], phi_[q]);
    basis.eval_grad(vr.points[q], ref_grads);
    gradq_[q].resize(nshape_);
    for (int a = 0; a < nshape_; ++a) {
      Vec3 g{0, 0, 0};
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) g[r] += map_.Jinv(c, r) * ref_grads[a][c];
      gradq_[q][a] = g;
    }
    fill_strain_matrix(Bq_[q], gradq_[q], dim_);
    K_ += wq_[q] * Bq_[q].transpose() * D_ * Bq_[q];
    intB_ += wq_[q] * Bq_[q].transpose();
  }

  // facet quadrature and basis traces
  facet_ids_.assign(topo.element_facets[elem].begin(),
                    topo.element_facets[elem].begin() + dim_ + 1);
  const QuadRule& fr = facet_rule(dim_, kQuadDegree);
  for (int lf = 0; lf <= dim_; ++lf) {
    const Facet& f = topo.facets[facet_ids_[lf]];
    eta_[lf] = topo.eta_of(facet_ids_[lf], elem);
    FacetQuad& Q = fq_[lf];
    Q.wq.resize(fr.size());
    Q.xq.resize(fr.size());
    Q.phi.resize(fr.size());
    Q.hat.resize(fr.size());
    Vec3 a = mesh.nodes[f.nodes[0]], b = mesh.nodes[f.nodes[1]];
    Vec3 c = (dim_ == 3) ? mesh.nodes[f.nodes[2]] : Vec3{0, 0, 0};
    // reference facet measure: 1 (segment) or 1/2 (triangle)
    const double ref_measure = (dim_ == 2) ? 1.0 : 0.5;
    for (int q = 0; q < fr.size(); ++q) {
      const Vec3& rp = fr.points[q];
      Vec3 x;
      if (dim_ == 2) {
        x = a + rp[0] * (b - a);
        Q.hat[q] = {1.0 - rp[0], rp[0], 0.0};
      } else {
        x = a + rp[0] * (b - a) + rp[1] * (c - a);
        Q.hat[q] = {1.0 - rp[0] - rp[1], rp[0], rp[1]};
      }
      Q.wq[q] = fr.weights[q] / ref_measure * f.measure;
      Q.xq[q] = x;
      basis.eval(map_.to_reference(x), Q.phi[q]);
    }
  }

  // gauge rows: zero mean displacement and zero mean rotation
  const int ng = (dim_ == 2) ? 3 : 6;
  G_ = Eigen::MatrixXd::Zero(ng, ndof);
  for (int q = 0; q < static_cast<int>(wq_.size()); ++q) {
    for (int a = 0; a < nshape_; ++a) {
      for (int c = 0; c < dim_; ++c) G_(c, dim_ * a + c) += wq_[q] * phi_[q][a];
      const Vec3& g = gradq_[q][a];
      if (dim_ == 2) {
        // mean of (dx uy - dy ux)
        G_(2, 2 * a + 1) += wq_[q] * g[0];
        G_(2, 2 * a + 0) -= wq_[q] * g[1];
      } else {
        G_(3, 3 * a + 2) += wq_[q] * g[1];  // curl_x = dy uz - dz uy
        G_(3, 3 * a + 1) -= wq_[q] * g[2];
        G_(4, 3 * a + 0) += wq_[q] * g[2];  // curl_y = dz ux - dx uz
        G_(4, 3 * a + 2) -= wq_[q] * g[0];
        G_(5, 3 * a + 1) += wq_[q] * g[0];  // curl_z = dx uy - dy ux
        G_(5, 3 * a + 0) -= wq_[q] * g[1];
      }
    }
  }

  bordered_ = Eigen::MatrixXd::Zero(ndof + ng, ndof + ng);
  bordered_.topLeftCorner(ndof, ndof) = K_;
  bordered_.block(ndof, 0, ng, ndof) = G_;
  bordered_.block(0, ndof, ndof, ng) = G_.transpose();
  lu_.compute(bordered_);
}

VecX ElementLocalSpace::load_vector(const ElementTraction& traction, const Vec3& f_constant,
                                    const Vec3& f_rotational) const {
  const int ndof = num_dofs();
  VecX ell = VecX::Zero(ndof);
  // body force
  const bool has_body = norm(f_constant) != 0.0 || norm(f_rotational) != 0.0;
  if (has_body) {
    for (size_t q = 0; q < wq_.size(); ++q) {
      Vec3 f = f_constant + cross(f_rotational, xq_[q] - moments_.centroid);
      for (int a = 0; a < nshape_; ++a)
        for (int c = 0; c < dim_; ++c) ell[dim_ * a + c] += wq_[q] * phi_[q][a] * f[c];
    }
  }
  // facet tractions (already on the element side)
  for (int lf = 0; lf <= dim_; ++lf) {
    const FacetQuad& Q = fq_[lf];
    const auto& tv = traction.values[lf];
    bool zero = true;
    for (int k = 0; k < dim_; ++k)
      if (norm(tv[k]) != 0.0) zero = false;
    if (zero) continue;
    for (size_t q = 0; q < Q.wq.size(); ++q) {
      Vec3 t{0, 0, 0};
      for (int k = 0; k < dim_; ++k) t += Q.hat[q][k] * tv[k];
      for (int a = 0; a < nshape_; ++a)
        for (int c = 0; c < dim_; ++c) ell[dim_ * a + c] += Q.wq[q] * Q.phi[q][a] * t[c];
    }
  }
  return ell;
}

void ElementLocalSpace::data_residual(const ElementTraction& traction, const Vec3& f_constant,
                                      const Vec3& f_rotational, Vec3& force, Vec3& moment) const {
  force = Vec3{0, 0, 0};
  moment = Vec3{0, 0, 0};
  for (int lf = 0; lf <= dim_; ++lf) {
    const FacetQuad& Q = fq_[lf];
    const auto& tv = traction.values[lf];
    for (size_t q = 0; q < Q.wq.size(); ++q) {
      Vec3 t{0, 0, 0};
      for (int k = 0; k < dim_; ++k) t += Q.hat[q][k] * tv[k];
      force += Q.wq[q] * t;
      moment += Q.wq[q] * cross(Q.xq[q] - moments_.centroid, t);
    }
  }
  // constant body part integrates to measure * constant; rotational part has
  // zero resultant about the centroid and moment I_G * omega
  force += moments_.measure * f_constant;
  if (dim_ == 2) {
    moment[2] += moments_.inertia_scalar * f_rotational[2];
  } else {
    Eigen::Vector3d om(f_rotational[0], f_rotational[1], f_rotational[2]);
    Eigen::Vector3d mm = moments_.inertia_tensor * om;
    moment += Vec3{mm[0], mm[1], mm[2]};
  }
}

double ElementLocalSpace::data_scale(const ElementTraction& traction, const Vec3& f_constant,
                                     const Vec3& f_rotational) const {
  double tmax = 0.0;
  for (int lf = 0; lf <= dim_; ++lf)
    for (int k = 0; k < dim_; ++k) tmax = std::max(tmax, norm(traction.values[lf][k]));
  double boundary = 0.0;
  for (int lf = 0; lf <= dim_; ++lf)
    for (double w : fq_[lf].wq) boundary += w;
  const double diam = std::cbrt(moments_.measure) + 1.0;  // coarse element size proxy
  double fmag = norm(f_constant) + norm(f_rotational) * diam;
  return tmax * boundary + fmag * moments_.measure;
}

ElementStress ElementLocalSpace::stress_of(const VecX& dofs) const {
  const LagrangeBasis& sbasis = LagrangeBasis::get(dim_, degree_ - 1);
  const LagrangeBasis& basis = LagrangeBasis::get(dim_, degree_);
  ElementStress s;
  s.element = elem_;
  s.degree = degree_ - 1;
  s.coeff.assign(sbasis.size(), Voigt{0, 0, 0, 0, 0, 0});
  const int vs = mat_.voigt_size();
  std::vector<Vec3> ref_grads;
  Eigen::MatrixXd B(vs, num_dofs());
  std::vector<Vec3> grads(nshape_);
  for (int l = 0; l < sbasis.size(); ++l) {
    basis.eval_grad(sbasis.nodes()[l], ref_grads);
    for (int a = 0; a < nshape_; ++a) {
      Vec3 g{0, 0, 0};
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) g[r] += map_.Jinv(c, r) * ref_grads[a][c];
      grads[a] = g;
    }
    fill_strain_matrix(B, grads, dim_);
    VecX sig = D_ * (B * dofs);
    for (int c = 0; c < vs; ++c) s.coeff[l][c] = sig[c];
  }
  return s;
}

ElementLocalSpace::Solution ElementLocalSpace::solve(const ElementTraction& traction,
                                                     const Vec3& f_constant,
                                                     const Vec3& f_rotational,
                                                     bool check_compatibility) const {
  if (check_compatibility) {
    Vec3 fr, mr;
    data_residual(traction, f_constant, f_rotational, fr, mr);
    double scale = std::max(data_scale(traction, f_constant, f_rotational), 1e-300);
    if (norm(fr) > 1e-8 * scale || norm(mr) > 1e-8 * scale * (std::cbrt(moments_.measure) + 1.0))
      throw IncompatibleDataError("element " + std::to_string(elem_) +
                                  ": Neumann data not self-equilibrated (force " +
                                  std::to_string(norm(fr)) + ", moment " + std::to_string(norm(mr)) +
                                  ", scale " + std::to_string(scale) + ")");
  }
  const int ndof = num_dofs();
  const int ng = G_.rows();
  VecX ell = load_vector(traction, f_constant, f_rotational);
  VecX rhs = VecX::Zero(ndof + ng);
  rhs.head(ndof) = ell;
  VecX sol = lu_.solve(rhs);
  sol += lu_.solve(rhs - bordered_ * sol);  // one refinement step
  Solution out;
  out.dofs = sol.head(ndof);
  out.stress = stress_of(out.dofs);
  VecX weak = K_ * out.dofs - ell;
  out.weak_residual = weak.cwiseAbs().maxCoeff();
  return out;
}

double ElementLocalSpace::strong_residual(const Solution& sol, const Vec3& f_constant,
                                          const Vec3& f_rotational) const {
  const LagrangeBasis& basis = LagrangeBasis::get(dim_, degree_);
  const QuadRule& vr = simplex_rule(dim_, kQuadDegree);
  std::vector<std::array<double, 6>> ref_hess;
  double acc = 0.0;
  for (int q = 0; q < vr.size(); ++q) {
    basis.eval_hess(vr.points[q], ref_hess);
    // physical second derivatives: H_phys = Jinv^T H_ref Jinv
    // div sigma with sigma = D * B(u): assemble from second derivatives
    Vec3 div{0, 0, 0};
    for (int a = 0; a < nshape_; ++a) {
      Eigen::Matrix3d Href = Eigen::Matrix3d::Zero();
      Href(0, 0) = ref_hess[a][0];
      Href(1, 1) = ref_hess[a][1];
      Href(2, 2) = ref_hess[a][2];
      Href(1, 2) = Href(2, 1) = ref_hess[a][3];
      Href(0, 2) = Href(2, 0) = ref_hess[a][4];
      Href(0, 1) = Href(1, 0) = ref_hess[a][5];
      Eigen::Matrix3d H = map_.Jinv.transpose() * Href * map_.Jinv;
      for (int c = 0; c < dim_; ++c) {
        const double ua = sol.dofs[dim_ * a + c];
        if (ua == 0.0) continue;
        // strain derivative contributions to div(D eps)
        if (dim_ == 2) {
          const double d2xx = H(0, 0), d2yy = H(1, 1), d2xy = H(0, 1);
          // sigma = D * (eps_xx, eps_yy, gamma_xy)
          // div_x = dx sxx + dy sxy ; div_y = dx sxy + dy syy
          double exx_dx = (c == 0) ? d2xx : 0.0, exx_dy = (c == 0) ? d2xy : 0.0;
          double eyy_dx = (c == 1) ? d2xy : 0.0, eyy_dy = (c == 1) ? d2yy : 0.0;
          double gxy_dx = (c == 0) ? d2xy : d2xx;
          double gxy_dy = (c == 0) ? d2yy : d2xy;
          double sxx_dx = D_(0, 0) * exx_dx + D_(0, 1) * eyy_dx + D_(0, 2) * gxy_dx;
          double syy_dy = D_(1, 0) * exx_dy + D_(1, 1) * eyy_dy + D_(1, 2) * gxy_dy;
          double sxy_dx = D_(2, 0) * exx_dx + D_(2, 1) * eyy_dx + D_(2, 2) * gxy_dx;
          double sxy_dy = D_(2, 0) * exx_dy + D_(2, 1) * eyy_dy + D_(2, 2) * gxy_dy;
          div[0] += ua * (sxx_dx + sxy_dy);
          div[1] += ua * (sxy_dx + syy_dy);
        } else {
          // assemble d(sigma_ij)/dx_j for the isotropic 3D law
          // eps components: (xx, yy, zz, yz, xz, xy) with engineering shears
          auto d2 = [&](int i, int j) { return H(i, j); };
          double e_d[6][3] = {};
          // derivative of eps component k with respect to x_m, for unit dof (a, c)
          for (int mcomp = 0; mcomp < 3; ++mcomp) {
            e_d[0][mcomp] = (c == 0) ? d2(0, mcomp) : 0.0;
            e_d[1][mcomp] = (c == 1) ? d2(1, mcomp) : 0.0;
            e_d[2][mcomp] = (c == 2) ? d2(2, mcomp) : 0.0;
            e_d[3][mcomp] = ((c == 1) ? d2(2, mcomp) : 0.0) + ((c == 2) ? d2(1, mcomp) : 0.0);
            e_d[4][mcomp] = ((c == 0) ? d2(2, mcomp) : 0.0) + ((c == 2) ? d2(0, mcomp) : 0.0);
            e_d[5][mcomp] = ((c == 0) ? d2(1, mcomp) : 0.0) + ((c == 1) ? d2(0, mcomp) : 0.0);
          }
          double s_d[6][3];
          for (int k = 0; k < 6; ++k)
            for (int mcomp = 0; mcomp < 3; ++mcomp) {
              double v = 0.0;
              for (int l = 0; l < 6; ++l) v += D_(k, l) * e_d[l][mcomp];
              s_d[k][mcomp] = v;
            }
          // Voigt index of sigma_{im}: (0,5,4; 5,1,3; 4,3,2)
          static const int vix[3][3] = {{0, 5, 4}, {5, 1, 3}, {4, 3, 2}};
          for (int i = 0; i < 3; ++i) {
            double s = 0.0;
            for (int mcomp = 0; mcomp < 3; ++mcomp) s += s_d[vix[i][mcomp]][mcomp];
            div[i] += ua * s;
          }
        }
      }
    }
    Vec3 f = f_constant + cross(f_rotational, xq_[q] - moments_.centroid);
    Vec3 r = div + f;
    acc += wq_[q] * dot(r, r);
  }
  return acc;
}

BalancedLoad balancing_body_force(const ElementLocalSpace& space, const ElementTraction& traction) {
  BalancedLoad load;
  load.element = space.element();
  Vec3 force, moment;
  space.data_residual(traction, Vec3{0, 0, 0}, Vec3{0, 0, 0}, force, moment);
  const auto& sm = space.moments();
  load.constant = (-1.0 / sm.measure) * force;
  if (space.dim() == 2) {
    load.rotational = {0.0, 0.0, -moment[2] / sm.inertia_scalar};
  } else {
    Eigen::Vector3d m(moment[0], moment[1], moment[2]);
    Eigen::Vector3d om = -sm.inertia_tensor.ldlt().solve(m);
    load.rotational = {om[0], om[1], om[2]};
  }
  return load;
}

ElementStress StressOperator::apply(const VecX& traction_dofs) const {
  if (traction_dofs.size() != num_cols()) throw Error("StressOperator: dof size mismatch");
  VecX w = displacement * traction_dofs;
  return space->stress_of(w);
}

StressOperator traction_to_stress_operator(std::shared_ptr<const ElementLocalSpace> space,
                                           const std::vector<int>& facet_subset,
                                           const Voigt& sigma_h) {
  StressOperator op;
  op.element = space->element();
  op.facets = facet_subset;
  const int d = space->dim();
  op.dofs_per_facet = d * d;
  const int ncols = op.num_cols();
  op.displacement = Eigen::MatrixXd::Zero(space->num_dofs(), ncols);
  op.space = space;

  // local facet index of each requested facet
  std::vector<int> local(facet_subset.size(), -1);
  for (size_t i = 0; i < facet_subset.size(); ++i) {
    for (int lf = 0; lf <= d; ++lf)
      if (space->facet_ids()[lf] == facet_subset[i]) local[i] = lf;
    if (local[i] < 0) throw Error("traction_to_stress_operator: facet not on element");
  }

  int col = 0;
  for (size_t i = 0; i < facet_subset.size(); ++i) {
    const double sign = space->eta(local[i]);
    for (int k = 0; k < d; ++k)
      for (int c = 0; c < d; ++c, ++col) {
        ElementTraction t;
        t.clear();
        t.values[local[i]][k][c] = sign;  // element side of a unit field dof
        BalancedLoad f = balancing_body_force(*space, t);
        auto sol = space->solve(t, f.constant, f.rotational, false);
        op.displacement.col(col) = sol.dofs;
      }
  }

  op.a_local = op.displacement.transpose() * space->local_stiffness() * op.displacement;
  const int vs = (d == 2) ? 3 : 6;
  VecX sh = VecX::Zero(vs);
  for (int c = 0; c < vs; ++c) sh[c] = sigma_h[c];
  op.b_fe = op.displacement.transpose() * (space->integrated_strain_matrix() * sh);
  return op;
}

}  // namespace eespt
