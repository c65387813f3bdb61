#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eespt/mesh.hpp"

namespace eespt {

enum class MaterialMode { PlaneStress, Solid3D };

// Voigt storage: 2D (xx, yy, xy), 3D (xx, yy, zz, yz, xz, xy).
// Strains use engineering shear components, so Tr[sigma eps] = s . e.
using Voigt = std::array<double, 6>;

struct Material {
  double young = 1.0;
  double poisson = 0.3;
  MaterialMode mode = MaterialMode::PlaneStress;

  int voigt_size() const { return mode == MaterialMode::PlaneStress ? 3 : 6; }
  Eigen::MatrixXd stiffness_matrix() const;   // D: stress = D * strain
  Eigen::MatrixXd compliance_matrix() const;  // D^-1
  void validate() const;
};

Voigt hooke_apply(const Material& mat, const Voigt& strain);
Voigt hooke_inverse_apply(const Material& mat, const Voigt& stress);

struct DirichletBC {
  std::array<std::optional<double>, 3> component;  // per-component prescribed value
  // optional prescribed displacement field; when set it constrains all
  // components and takes precedence over the constants
  std::function<Vec3(const Vec3&)> field;
};

struct ProblemDef {
  Material material;
  std::map<std::string, DirichletBC> dirichlet;
  std::map<std::string, Vec3> neumann;  // constant traction per label
  Vec3 body_force{0.0, 0.0, 0.0};
  std::vector<Vec3> body_force_per_element;  // optional override, empty = uniform

  Vec3 body(int elem) const {
    return body_force_per_element.empty() ? body_force : body_force_per_element[elem];
  }
  void validate(const Topology& topo) const;
};

struct FESolution {
  int degree = 1;
  std::vector<Vec3> displacement;  // nodal
  std::vector<Voigt> strain;       // constant per element
  std::vector<Voigt> stress;       // constant per element, Hooke of strain
};

// P1 shape function gradients on an element (constant).
std::vector<Vec3> shape_gradients(const Mesh& mesh, int elem);

FESolution assemble_solve(const Mesh& mesh, const Topology& topo, const ProblemDef& prob);

double energy_norm_u(const Mesh& mesh, const Material& mat, const std::vector<Vec3>& displacement);
double energy_norm_sigma(const Mesh& mesh, const Material& mat, const std::vector<Voigt>& stress);

// Magnitude of the applied loads, used to normalize equilibrium residuals.
double load_scale(const Mesh& mesh, const ProblemDef& prob, const FESolution& fe);

struct ReferenceError {
  double value = 0.0;   // sqrt(||u_ref||^2 - ||u_h||^2), valid on nested meshes
  double direct = 0.0;  // elementwise integral of ||u_ref - embedded u_h||
  std::vector<double> element_contributions;  // per coarse element, direct path
};

// Energy-norm distance between a coarse solve and a solve on a uniform
// refinement of the same mesh under the same problem. Requires homogeneous
// (or exactly representable) Dirichlet data so the two spaces nest.
ReferenceError reference_error(const Mesh& coarse, const FESolution& u_h, const Mesh& fine,
                               const FESolution& u_ref, const Material& mat);

}  // namespace eespt
