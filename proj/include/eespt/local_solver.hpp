#pragma once

#include <Eigen/Dense>

#include <memory>
#include <vector>

#include "eespt/elasticity.hpp"
#include "eespt/linalg.hpp"
#include "eespt/mesh.hpp"
#include "eespt/polynomial.hpp"
#include "eespt/quadrature.hpp"

namespace eespt {

struct AffineMap {
  Vec3 origin{0, 0, 0};
  Eigen::Matrix3d J = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d Jinv = Eigen::Matrix3d::Identity();
  double detJ = 1.0;

  Vec3 to_physical(const Vec3& ref) const;
  Vec3 to_reference(const Vec3& phys) const;
};

AffineMap affine_map(const Mesh& mesh, int elem);

struct SimplexMoments {
  double measure = 0.0;
  Vec3 centroid{0, 0, 0};
  double inertia_scalar = 0.0;          // 2D: polar moment about the out-of-plane axis
  Eigen::Matrix3d inertia_tensor = Eigen::Matrix3d::Zero();  // 3D
};

// Exact (closed-form) measure, centroid and unit-density inertia.
SimplexMoments simplex_moments(const Mesh& mesh, int elem);

// Body force of the form  f(x) = constant + rotational ^ (x - G).
struct BalancedLoad {
  int element = -1;
  Vec3 constant{0, 0, 0};
  Vec3 rotational{0, 0, 0};  // 2D uses only the z component

  Vec3 value_at(const Vec3& x, const Vec3& centroid) const {
    return constant + cross(rotational, x - centroid);
  }
  bool is_zero() const { return norm(constant) == 0.0 && norm(rotational) == 0.0; }
};

// Linear traction on the facets of one element, already on the element side
// (eta applied). values[local_facet][k] is the nodal value at the k-th node
// of the facet in canonical (sorted) order.
struct ElementTraction {
  std::array<std::array<Vec3, 3>, 4> values{};

  void clear() {
    for (auto& f : values)
      for (auto& v : f) v = Vec3{0, 0, 0};
  }
};

// Polynomial stress on one element, nodal Voigt values on the reference
// lattice of LagrangeBasis(dim, degree).
struct ElementStress {
  int element = -1;
  int degree = 0;
  std::vector<Voigt> coeff;

  Voigt at_reference(int dim, const Vec3& ref) const;
};

// Displacement-type solve space of degree p+k on a single element, with the
// rigid modes pinned by zero mean displacement and zero mean rotation.
class ElementLocalSpace {
 public:
  ElementLocalSpace(const Mesh& mesh, const Topology& topo, int elem, const Material& mat,
                    int extra_degree = 3);

  int element() const { return elem_; }
  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int num_shape() const { return nshape_; }
  int num_dofs() const { return dim_ * nshape_; }
  const AffineMap& map() const { return map_; }
  const SimplexMoments& moments() const { return moments_; }
  const std::vector<int>& facet_ids() const { return facet_ids_; }
  const Eigen::MatrixXd& local_stiffness() const { return K_; }
  int eta(int local_facet) const { return eta_[local_facet]; }

  struct Solution {
    VecX dofs;                 // displacement coefficients
    ElementStress stress;
    double weak_residual = 0.0;  // max weak-equilibrium residual over the test basis
  };

  // Pure Neumann solve: traction on the element side, body force
  // constant + rotational about the centroid. Data must be self-equilibrated.
  Solution solve(const ElementTraction& traction, const Vec3& f_constant,
                 const Vec3& f_rotational, bool check_compatibility = true) const;

  // Equilibrium residuals of the data (resultant force, moment about G).
  void data_residual(const ElementTraction& traction, const Vec3& f_constant,
                     const Vec3& f_rotational, Vec3& force, Vec3& moment) const;
  double data_scale(const ElementTraction& traction, const Vec3& f_constant,
                    const Vec3& f_rotational) const;

  // L2 integral of ||div sigma + f||^2 over the element (strong residual).
  double strong_residual(const Solution& sol, const Vec3& f_constant,
                         const Vec3& f_rotational) const;

  // Load vector of (traction, body force) against the displacement test basis.
  VecX load_vector(const ElementTraction& traction, const Vec3& f_constant,
                   const Vec3& f_rotational) const;

  ElementStress stress_of(const VecX& dofs) const;

  // integral of B^T over the element; maps a constant Voigt stress to the
  // load vector of its virtual work
  const Eigen::MatrixXd& integrated_strain_matrix() const { return intB_; }

 private:
  int elem_;
  int dim_;
  int degree_;
  int nshape_;
  AffineMap map_;
  SimplexMoments moments_;
  Material mat_;
  Eigen::MatrixXd D_;

  std::vector<int> facet_ids_;
  std::array<int, 4> eta_{1, 1, 1, 1};

  // volume quadrature data
  std::vector<double> wq_;                  // physical weights
  std::vector<Vec3> xq_;                    // physical points
  std::vector<std::vector<double>> phi_;    // basis values per qpoint
  std::vector<Eigen::MatrixXd> Bq_;         // strain matrix per qpoint
  std::vector<std::vector<Vec3>> gradq_;    // physical gradients per qpoint

  // facet quadrature data, per local facet
  struct FacetQuad {
    std::vector<double> wq;                 // physical weights
    std::vector<Vec3> xq;                   // physical points
    std::vector<std::vector<double>> phi;   // element basis traces
    std::vector<std::array<double, 3>> hat; // facet P1 hats at qpoints (canonical node order)
  };
  std::array<FacetQuad, 4> fq_;

  Eigen::MatrixXd K_;        // local stiffness
  Eigen::MatrixXd G_;        // gauge rows (rigid-mode pinning)
  Eigen::MatrixXd intB_;     // integral of B^T (num_dofs x voigt)
  Eigen::MatrixXd bordered_; // [K G'; G 0]
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

// Balancing body force for traction data on one element (Neumann problems
// P^H / P^R): cancels the traction's resultant and its moment about G.
BalancedLoad balancing_body_force(const ElementLocalSpace& space, const ElementTraction& traction);

// Linear map from facet traction dofs (global field, eta applied internally)
// to the element stress response, each column solved with its own balancing
// body force. Dof order: facets as listed, then facet node, then component.
struct StressOperator {
  int element = -1;
  std::vector<int> facets;       // global facet ids
  int dofs_per_facet = 0;        // dim * dim
  Eigen::MatrixXd displacement;  // num_dofs x ncols (solution columns)
  Eigen::MatrixXd a_local;       // ncols x ncols: energy Gram of the columns
  VecX b_fe;                     // ncols: column energy pairing with sigma_h
  std::shared_ptr<const ElementLocalSpace> space;

  int num_cols() const { return static_cast<int>(facets.size()) * dofs_per_facet; }
  ElementStress apply(const VecX& traction_dofs) const;
};

StressOperator traction_to_stress_operator(std::shared_ptr<const ElementLocalSpace> space,
                                           const std::vector<int>& facet_subset,
                                           const Voigt& sigma_h);

}  // namespace eespt
