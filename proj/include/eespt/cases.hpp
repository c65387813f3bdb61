#pragma once

#include <map>
#include <string>

#include "eespt/elasticity.hpp"
#include "eespt/mesh.hpp"

namespace eespt {

// Self-contained benchmark cases: mesh plus canonical loading.
struct BundledCase {
  std::string name;
  Mesh mesh;
  ProblemDef problem;
};

// Unit square under uniaxial tension; the exact solution is linear, so the
// FE solve is exact and the estimate must vanish.
BundledCase case_uniform_tension(int n);

// Quarter model of a plate with a circular hole, symmetry conditions on the
// cut planes, unit tension on the far edge.
BundledCase case_plate_hole_2d(int n_radial, int n_tangential);

// L-shaped domain, clamped on one leg end, shear traction on the other;
// re-entrant corner singularity at the interior corner.
BundledCase case_lshape_2d(int n_per_block);

// One-eighth model of a 3D open-hole plate under tension, symmetry planes
// at x = 0, y = 0 and z = 0.
BundledCase case_plate_hole_3d(int n_radial, int n_tangential, int n_layers);

// Named lookup used by the CLI; params are generator-specific integers.
BundledCase make_bundled_case(const std::string& name,
                              const std::map<std::string, std::string>& params);

}  // namespace eespt
