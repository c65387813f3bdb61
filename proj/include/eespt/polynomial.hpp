#pragma once

#include <vector>

#include "eespt/types.hpp"

namespace eespt {

// Nodal Lagrange basis of given total degree on the reference simplex
// (unit triangle / unit tetrahedron), nodes on the equispaced lattice.
// Values, gradients and second derivatives are evaluated in reference
// coordinates; callers map derivatives through the element Jacobian.
class LagrangeBasis {
 public:
  LagrangeBasis(int dim, int degree);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Vec3>& nodes() const { return nodes_; }

  // values[i] = phi_i(p)
  void eval(const Vec3& p, std::vector<double>& values) const;
  // grads[i] = reference gradient of phi_i at p
  void eval_grad(const Vec3& p, std::vector<Vec3>& grads) const;
  // hess[i] = upper-triangular packed reference Hessian of phi_i at p:
  // 2D (dxx, dyy, dxy), 3D (dxx, dyy, dzz, dyz, dxz, dxy)
  void eval_hess(const Vec3& p, std::vector<std::array<double, 6>>& hess) const;

  // Shared instances, cached per (dim, degree).
  static const LagrangeBasis& get(int dim, int degree);

 private:
  int dim_;
  int degree_;
  std::vector<Vec3> nodes_;
  std::vector<std::array<int, 3>> exponents_;     // monomial exponents, |a| <= degree
  std::vector<std::vector<double>> coeffs_;       // coeffs_[i][j]: phi_i = sum_j c_ij m_j
};

}  // namespace eespt
