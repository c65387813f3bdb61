#pragma once

#include <map>
#include <string>
#include <vector>

#include "eespt/types.hpp"

namespace eespt {

// Canonical key of a facet: node ids ascending, unused slot = -1 (2D edges).
using FacetKey = std::array<int, 3>;

FacetKey make_facet_key(int a, int b, int c = -1);

// Simplicial mesh: triangles in 2D, tetrahedra in 3D. Elements are stored
// with positive signed measure (finalize() reorients). Immutable after
// construction, safe to share across threads.
struct Mesh {
  int dimension = 2;
  std::vector<Vec3> nodes;
  std::vector<std::array<int, 4>> elements;  // [dim+1] node ids, slot 3 = -1 in 2D
  std::map<FacetKey, std::string> boundary_labels;

  // Ancestor element in the refinement root; empty unless built by uniform_refine.
  std::vector<int> parent_element;

  int nodes_per_element() const { return dimension + 1; }
  int facets_per_element() const { return dimension + 1; }
  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_elements() const { return static_cast<int>(elements.size()); }

  double signed_measure(int elem) const;
  double measure(int elem) const { return signed_measure(elem); }
  Vec3 centroid(int elem) const;
  double total_measure() const;
  double bbox_diameter() const;

  // Reorients elements to positive measure and validates node references.
  void finalize();
};

struct Facet {
  FacetKey nodes;              // canonical ascending order
  std::array<int, 2> elems;    // adjacent element ids, [1] = -1 on boundary
  std::array<int, 2> eta;      // orientation signs per adjacent element
  Vec3 normal;                 // unit, outward for elems[0] (the eta = +1 side)
  double measure;              // length in 2D, area in 3D
  Vec3 center;
  int boundary_label = -1;     // index into Topology::labels, -1 if interior

  bool is_boundary() const { return elems[1] < 0; }
};

struct Topology {
  std::vector<Facet> facets;
  std::vector<std::array<int, 4>> element_facets;  // per element, dim+1 facet ids
  std::vector<std::vector<int>> vertex_elements;   // star patch elements per vertex
  std::vector<std::vector<int>> vertex_facets;     // facets incident to the vertex
  std::vector<std::string> labels;

  int num_facets() const { return static_cast<int>(facets.size()); }
  int label_id(const std::string& name) const;
  // Sign eta of `elem` on facet f; elem must be adjacent.
  int eta_of(int f, int elem) const;
};

struct QualityMetrics {
  std::vector<double> radius_ratio;
  std::vector<double> edge_or_area_ratio;
};

struct StructuredSpec {
  int dimension = 2;
  double extent[3] = {1.0, 1.0, 1.0};
  int subdivisions[3] = {1, 1, 1};
};

Mesh generate_structured(const StructuredSpec& spec);

Topology build_topology(const Mesh& mesh);

double radius_ratio(const Mesh& mesh, int elem);
double edge_or_area_ratio(const Mesh& mesh, int elem);
QualityMetrics compute_quality(const Mesh& mesh);

Mesh uniform_refine(const Mesh& mesh, int levels);

}  // namespace eespt
