#include "eespt/mesh_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace eespt {

namespace {

std::string next_line(std::ifstream& in, const char* what) {
  std::string line;
  while (std::getline(in, line)) {
    // strip trailing CR from files written on other platforms
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) return line;
  }
  throw ParseError(std::string("unexpected end of file while reading ") + what);
}

}  // namespace

Mesh load_msh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file: " + path);

  std::map<int, std::string> physical_names;
  std::map<int, int> physical_dims;
  std::vector<Vec3> raw_nodes;
  std::map<int, int> node_id_map;  // msh id -> dense index

  struct RawElem {
    int type;
    int phys;
    std::array<int, 4> nodes;
  };
  std::vector<RawElem> raw;

  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line == "$MeshFormat") {
      std::istringstream ls(next_line(in, "$MeshFormat"));
      double version;
      int file_type, data_size;
      if (!(ls >> version >> file_type >> data_size))
        throw ParseError("malformed $MeshFormat section");
      if (version < 2.0 || version >= 3.0 || file_type != 0)
        throw ParseError("only ASCII MSH 2.x is supported");
      if (next_line(in, "$EndMeshFormat") != "$EndMeshFormat")
        throw ParseError("missing $EndMeshFormat");
    } else if (line == "$PhysicalNames") {
      int n = std::stoi(next_line(in, "$PhysicalNames count"));
      for (int i = 0; i < n; ++i) {
        std::istringstream ls(next_line(in, "physical name"));
        int dim, id;
        std::string name;
        if (!(ls >> dim >> id)) throw ParseError("malformed physical name line");
        std::getline(ls, name);
        auto q0 = name.find('"'), q1 = name.rfind('"');
        if (q0 == std::string::npos || q1 <= q0)
          throw ParseError("physical name must be quoted");
        physical_names[id] = name.substr(q0 + 1, q1 - q0 - 1);
        physical_dims[id] = dim;
      }
      if (next_line(in, "$EndPhysicalNames") != "$EndPhysicalNames")
        throw ParseError("missing $EndPhysicalNames");
    } else if (line == "$Nodes") {
      int n = std::stoi(next_line(in, "$Nodes count"));
      for (int i = 0; i < n; ++i) {
        std::istringstream ls(next_line(in, "node"));
        int id;
        double x, y, z;
        if (!(ls >> id >> x >> y >> z)) throw ParseError("malformed node line");
        node_id_map[id] = static_cast<int>(raw_nodes.size());
        raw_nodes.push_back({x, y, z});
      }
      if (next_line(in, "$EndNodes") != "$EndNodes") throw ParseError("missing $EndNodes");
    } else if (line == "$Elements") {
      int n = std::stoi(next_line(in, "$Elements count"));
      for (int i = 0; i < n; ++i) {
        std::istringstream ls(next_line(in, "element"));
        int id, type, ntags;
        if (!(ls >> id >> type >> ntags)) throw ParseError("malformed element line");
        int phys = -1;
        for (int t = 0; t < ntags; ++t) {
          int tag;
          if (!(ls >> tag)) throw ParseError("malformed element tags");
          if (t == 0) phys = tag;
        }
        int nn;
        switch (type) {
          case 15: nn = 1; break;  // point, ignored
          case 1: nn = 2; break;
          case 2: nn = 3; break;
          case 4: nn = 4; break;
          default:
            throw UnsupportedElementError("unsupported element type " + std::to_string(type));
        }
        RawElem e;
        e.type = type;
        e.phys = phys;
        e.nodes = {-1, -1, -1, -1};
        for (int k = 0; k < nn; ++k) {
          int nid;
          if (!(ls >> nid)) throw ParseError("element with too few nodes");
          auto it = node_id_map.find(nid);
          if (it == node_id_map.end())
            throw ParseError("element references unknown node " + std::to_string(nid));
          e.nodes[k] = it->second;
        }
        if (type != 15) raw.push_back(e);
      }
      if (next_line(in, "$EndElements") != "$EndElements")
        throw ParseError("missing $EndElements");
    }
    // unrecognized sections are skipped line by line until their $End tag
    else if (!line.empty() && line[0] == '$' && line.rfind("$End", 0) != 0) {
      std::string end = "$End" + line.substr(1);
      while (std::getline(in, line)) {
        while (!line.empty() && line.back() == '\r') line.pop_back();
        if (line == end) break;
      }
    }
  }

  bool has_tet = std::any_of(raw.begin(), raw.end(), [](const RawElem& e) { return e.type == 4; });
  bool has_tri = std::any_of(raw.begin(), raw.end(), [](const RawElem& e) { return e.type == 2; });
  if (!has_tet && !has_tri) throw ParseError("mesh contains no triangles or tetrahedra");

  Mesh m;
  m.dimension = has_tet ? 3 : 2;
  m.nodes = raw_nodes;
  for (const auto& e : raw) {
    bool domain = (m.dimension == 2) ? (e.type == 2) : (e.type == 4);
    if (m.dimension == 3 && e.type == 2) {
      auto it = physical_dims.find(e.phys);
      if (it != physical_dims.end() && it->second == 3)
        throw ParseError("mixed 2D/3D domain elements are not supported");
    }
    if (domain) {
      m.elements.push_back(e.nodes);
    } else {
      // boundary facet: line in 2D, triangle in 3D
      bool facet = (m.dimension == 2) ? (e.type == 1) : (e.type == 2 || e.type == 1);
      if (!facet) throw ParseError("mixed-dimension element set");
      if (m.dimension == 3 && e.type == 1) continue;  // feature lines carry no facet label
      FacetKey key = (m.dimension == 2) ? make_facet_key(e.nodes[0], e.nodes[1])
                                        : make_facet_key(e.nodes[0], e.nodes[1], e.nodes[2]);
      auto it = physical_names.find(e.phys);
      m.boundary_labels[key] =
          (it != physical_names.end()) ? it->second : ("phys" + std::to_string(e.phys));
    }
  }
  if (m.elements.empty()) throw ParseError("mesh contains no domain elements");
  m.finalize();
  return m;
}

void write_msh(const std::string& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write mesh file: " + path);
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";

  std::vector<std::string> labels;
  for (const auto& [key, name] : mesh.boundary_labels)
    if (std::find(labels.begin(), labels.end(), name) == labels.end()) labels.push_back(name);
  std::sort(labels.begin(), labels.end());

  const int facet_dim = mesh.dimension - 1;
  const int domain_phys = static_cast<int>(labels.size()) + 1;
  out << "$PhysicalNames\n" << labels.size() + 1 << "\n";
  for (size_t i = 0; i < labels.size(); ++i)
    out << facet_dim << " " << i + 1 << " \"" << labels[i] << "\"\n";
  out << mesh.dimension << " " << domain_phys << " \"domain\"\n$EndPhysicalNames\n";

  out << "$Nodes\n" << mesh.num_nodes() << "\n";
  char buf[256];
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d %.17g %.17g %.17g\n", i + 1, mesh.nodes[i][0],
                  mesh.nodes[i][1], mesh.nodes[i][2]);
    out << buf;
  }
  out << "$EndNodes\n";

  auto label_index = [&](const std::string& name) {
    return static_cast<int>(std::find(labels.begin(), labels.end(), name) - labels.begin()) + 1;
  };

  out << "$Elements\n" << mesh.boundary_labels.size() + mesh.elements.size() << "\n";
  int eid = 1;
  const int facet_type = (mesh.dimension == 2) ? 1 : 2;
  for (const auto& [key, name] : mesh.boundary_labels) {
    out << eid++ << " " << facet_type << " 2 " << label_index(name) << " " << label_index(name);
    for (int k = 0; k < mesh.dimension; ++k) out << " " << key[k] + 1;
    out << "\n";
  }
  const int domain_type = (mesh.dimension == 2) ? 2 : 4;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    out << eid++ << " " << domain_type << " 2 " << domain_phys << " " << domain_phys;
    for (int k = 0; k <= mesh.dimension; ++k) out << " " << mesh.elements[e][k] + 1;
    out << "\n";
  }
  out << "$EndElements\n";
}

void write_vtk(const std::string& path, const Mesh& mesh,
               const std::map<std::string, std::vector<double>>& cell_fields,
               const std::map<std::string, std::vector<Vec3>>& point_fields) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write VTK file: " + path);
  out << "# vtk DataFile Version 3.0\n";
  out << "eespt fields\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_nodes() << " double\n";
  char buf[256];
  for (const auto& p : mesh.nodes) {
    std::snprintf(buf, sizeof(buf), "%.12g %.12g %.12g\n", p[0], p[1], p[2]);
    out << buf;
  }
  const int npe = mesh.nodes_per_element();
  out << "CELLS " << mesh.num_elements() << " " << mesh.num_elements() * (npe + 1) << "\n";
  for (int e = 0; e < mesh.num_elements(); ++e) {
    out << npe;
    for (int k = 0; k < npe; ++k) out << " " << mesh.elements[e][k];
    out << "\n";
  }
  out << "CELL_TYPES " << mesh.num_elements() << "\n";
  const int vtk_type = (mesh.dimension == 2) ? 5 : 10;
  for (int e = 0; e < mesh.num_elements(); ++e) out << vtk_type << "\n";

  if (!cell_fields.empty()) {
    out << "CELL_DATA " << mesh.num_elements() << "\n";
    for (const auto& [name, values] : cell_fields) {
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : values) {
        std::snprintf(buf, sizeof(buf), "%.12g\n", v);
        out << buf;
      }
    }
  }
  if (!point_fields.empty()) {
    out << "POINT_DATA " << mesh.num_nodes() << "\n";
    for (const auto& [name, values] : point_fields) {
      out << "VECTORS " << name << " double\n";
      for (const auto& v : values) {
        std::snprintf(buf, sizeof(buf), "%.12g %.12g %.12g\n", v[0], v[1], v[2]);
        out << buf;
      }
    }
  }
}

}  // namespace eespt
