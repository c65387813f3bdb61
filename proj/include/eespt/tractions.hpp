#pragma once

#include <vector>

#include "eespt/elasticity.hpp"
#include "eespt/linalg.hpp"
#include "eespt/local_solver.hpp"
#include "eespt/mesh.hpp"

namespace eespt {

// Inter-element traction field F in the degree-1 facet space: one polynomial
// per facet, shared by both adjacent elements through the signs eta.
struct TractionField {
  enum class Provenance { Standard, Enhanced };
  Provenance provenance = Provenance::Standard;
  std::vector<std::array<Vec3, 3>> coeff;  // nodal values, canonical facet node order
  std::vector<char> neumann;               // facet carries prescribed F_d

  int num_facets() const { return static_cast<int>(coeff.size()); }
};

// Traction data of one element extracted from a field (eta applied).
ElementTraction element_traction(const Mesh& mesh, const Topology& topo,
                                 const TractionField& field, int elem);

// FE traction target on a facet: mean of the one-sided FE stress vectors on
// interior facets, the F_d interpolant on Neumann facets, the one-sided
// stress vector elsewhere on the boundary.
std::array<Vec3, 3> fe_traction_target(const Mesh& mesh, const Topology& topo, int facet,
                                       const FESolution& fe, const ProblemDef& prob);

// Star-patch problem of one vertex. Unknowns are the hat-weighted traction
// moments (one d-vector per patch facet); the equilibrium rows are the
// strong-prolongation conditions of the patch elements tested with rigid
// translations.
struct PatchSystem {
  int vertex = -1;
  std::vector<int> facets;       // J_i, defines the unknown layout
  VecX weight;                   // diagonal least-squares weights (per scalar dof)
  VecX target;                   // hat-weighted moments of the FE traction targets
  ConstraintBlock equilibrium;   // label "L"
  ConstraintBlock neumann_pins;  // label "C"
};

struct PatchSolution {
  int vertex = -1;
  std::vector<int> facets;
  std::vector<Vec3> moment;  // hat-weighted traction moment per facet
};

PatchSystem build_patch_system(const Mesh& mesh, const Topology& topo, int vertex,
                               const FESolution& fe, const ProblemDef& prob);

PatchSolution solve_patch(const PatchSystem& system);

// Per-facet moment identification: recover the facet polynomial whose
// hat-weighted moments match the per-vertex patch contributions.
TractionField assemble_tractions(const Mesh& mesh, const Topology& topo, const ProblemDef& prob,
                                 const std::vector<PatchSolution>& patches);

struct EquilibriumResidual {
  Vec3 force{0, 0, 0};
  Vec3 moment{0, 0, 0};        // about the element centroid
  double force_rel = 0.0;      // normalized by load scale x boundary measure
  double moment_rel = 0.0;
};

EquilibriumResidual verify_equilibrium(const Mesh& mesh, const Topology& topo,
                                       const TractionField& field, const ProblemDef& prob,
                                       int elem, double load_scale_value);

// Full standard construction; patch problems run in parallel when threads > 1.
TractionField build_standard_tractions(const Mesh& mesh, const Topology& topo,
                                       const ProblemDef& prob, const FESolution& fe,
                                       int threads = 1);

}  // namespace eespt
