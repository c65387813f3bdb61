#pragma once

#include <map>
#include <string>
#include <vector>

#include "eespt/mesh.hpp"

namespace eespt {

// ASCII Gmsh MSH 2.2 subset: triangles (type 2) and tetrahedra (type 4) as
// domain elements, lines (type 1) / triangles as labeled boundary facets.
Mesh load_msh(const std::string& path);

void write_msh(const std::string& path, const Mesh& mesh);

// Legacy ASCII VTK unstructured grid with optional per-cell scalar fields
// and per-point vector fields.
void write_vtk(const std::string& path, const Mesh& mesh,
               const std::map<std::string, std::vector<double>>& cell_fields = {},
               const std::map<std::string, std::vector<Vec3>>& point_fields = {});

}  // namespace eespt
