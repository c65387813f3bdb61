#pragma once

#include <vector>

#include "eespt/types.hpp"

namespace eespt {

// Quadrature rule on a reference domain. Points carry reference coordinates,
// weights sum to the reference measure (segment 1, triangle 1/2, tet 1/6).
struct QuadRule {
  std::vector<Vec3> points;
  std::vector<double> weights;
  int size() const { return static_cast<int>(points.size()); }
};

// Gauss-Legendre on [0,1], exact for polynomials of degree 2n-1.
QuadRule gauss_segment(int npoints);

// Conical-product rules on the reference simplex, exact for total degree <= deg.
const QuadRule& triangle_rule(int deg);
const QuadRule& tetrahedron_rule(int deg);

// Rule for the reference facet of a d-dimensional simplex: segment in 2D,
// triangle in 3D.
const QuadRule& facet_rule(int dim, int deg);

// Volume rule for the d-dimensional reference simplex.
const QuadRule& simplex_rule(int dim, int deg);

}  // namespace eespt
