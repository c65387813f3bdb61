#include "eespt/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace eespt {

FacetKey make_facet_key(int a, int b, int c) {
  FacetKey k{a, b, c};
  if (c < 0) {
    if (k[0] > k[1]) std::swap(k[0], k[1]);
  } else {
    std::sort(k.begin(), k.end());
  }
  return k;
}

double Mesh::signed_measure(int e) const {
  const auto& el = elements[e];
  if (dimension == 2) {
    Vec3 a = nodes[el[1]] - nodes[el[0]];
    Vec3 b = nodes[el[2]] - nodes[el[0]];
    return 0.5 * (a[0] * b[1] - a[1] * b[0]);
  }
  Vec3 a = nodes[el[1]] - nodes[el[0]];
  Vec3 b = nodes[el[2]] - nodes[el[0]];
  Vec3 c = nodes[el[3]] - nodes[el[0]];
  return dot(a, cross(b, c)) / 6.0;
}

Vec3 Mesh::centroid(int e) const {
  const auto& el = elements[e];
  Vec3 g{0, 0, 0};
  const int n = nodes_per_element();
  for (int i = 0; i < n; ++i) g += nodes[el[i]];
  return (1.0 / n) * g;
}

double Mesh::total_measure() const {
  double s = 0.0;
  for (int e = 0; e < num_elements(); ++e) s += signed_measure(e);
  return s;
}

double Mesh::bbox_diameter() const {
  Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  for (const auto& p : nodes)
    for (int d = 0; d < 3; ++d) {
      lo[d] = std::min(lo[d], p[d]);
      hi[d] = std::max(hi[d], p[d]);
    }
  return norm(hi - lo);
}

void Mesh::finalize() {
  const int n = nodes_per_element();
  for (int e = 0; e < num_elements(); ++e) {
    auto& el = elements[e];
    for (int i = 0; i < n; ++i)
      if (el[i] < 0 || el[i] >= num_nodes())
        throw ParseError("element " + std::to_string(e) + " references node " +
                         std::to_string(el[i]) + " out of range");
    if (signed_measure(e) < 0.0) std::swap(el[1], el[2]);
  }
}

Mesh generate_structured(const StructuredSpec& spec) {
  for (int d = 0; d < spec.dimension; ++d) {
    if (spec.subdivisions[d] < 1) throw ConfigError("subdivision count must be >= 1");
    if (!(spec.extent[d] > 0.0)) throw ConfigError("extent must be positive");
  }
  Mesh m;
  m.dimension = spec.dimension;
  const int nx = spec.subdivisions[0], ny = spec.subdivisions[1];
  if (spec.dimension == 2) {
    auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        m.nodes.push_back({spec.extent[0] * i / nx, spec.extent[1] * j / ny, 0.0});
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
        if ((i + j) % 2 == 0) {
          m.elements.push_back({v00, v10, v11, -1});
          m.elements.push_back({v00, v11, v01, -1});
        } else {
          m.elements.push_back({v00, v10, v01, -1});
          m.elements.push_back({v10, v11, v01, -1});
        }
      }
    for (int j = 0; j < ny; ++j) {
      m.boundary_labels[make_facet_key(vid(0, j), vid(0, j + 1))] = "left";
      m.boundary_labels[make_facet_key(vid(nx, j), vid(nx, j + 1))] = "right";
    }
    for (int i = 0; i < nx; ++i) {
      m.boundary_labels[make_facet_key(vid(i, 0), vid(i + 1, 0))] = "bottom";
      m.boundary_labels[make_facet_key(vid(i, ny), vid(i + 1, ny))] = "top";
    }
  } else {
    const int nz = spec.subdivisions[2];
    auto vid = [&](int i, int j, int k) { return (k * (ny + 1) + j) * (nx + 1) + i; };
    for (int k = 0; k <= nz; ++k)
      for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
          m.nodes.push_back(
              {spec.extent[0] * i / nx, spec.extent[1] * j / ny, spec.extent[2] * k / nz});
    // Kuhn split of each cell along the main diagonal; identical in every
    // cell, hence conforming across cell faces.
    static const int kuhn[6][4] = {{0, 1, 3, 7}, {0, 3, 2, 7}, {0, 2, 6, 7},
                                   {0, 6, 4, 7}, {0, 4, 5, 7}, {0, 5, 1, 7}};
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          int corner[8];
          for (int c = 0; c < 8; ++c)
            corner[c] = vid(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
          for (const auto& t : kuhn)
            m.elements.push_back({corner[t[0]], corner[t[1]], corner[t[2]], corner[t[3]]});
        }
    auto label_quad = [&](int a, int b, int c, int d, const std::string& name) {
      // the Kuhn split cuts every boundary quad along its a-d diagonal
      m.boundary_labels[make_facet_key(a, b, d)] = name;
      m.boundary_labels[make_facet_key(a, d, c)] = name;
    };
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < ny; ++j) {
        label_quad(vid(0, j, k), vid(0, j + 1, k), vid(0, j, k + 1), vid(0, j + 1, k + 1), "left");
        label_quad(vid(nx, j, k), vid(nx, j + 1, k), vid(nx, j, k + 1), vid(nx, j + 1, k + 1),
                   "right");
      }
    for (int k = 0; k < nz; ++k)
      for (int i = 0; i < nx; ++i) {
        label_quad(vid(i, 0, k), vid(i + 1, 0, k), vid(i, 0, k + 1), vid(i + 1, 0, k + 1),
                   "bottom");
        label_quad(vid(i, ny, k), vid(i + 1, ny, k), vid(i, ny, k + 1), vid(i + 1, ny, k + 1),
                   "top");
      }
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        label_quad(vid(i, j, 0), vid(i + 1, j, 0), vid(i, j + 1, 0), vid(i + 1, j + 1, 0),
                   "front");
        label_quad(vid(i, j, nz), vid(i + 1, j, nz), vid(i, j + 1, nz), vid(i + 1, j + 1, nz),
                   "back");
      }
  }
  m.finalize();
  return m;
}

namespace {

// Local facets of an element: facet l is opposite local node l.
void element_facet_nodes(const Mesh& mesh, int e, int l, int out[3]) {
  const auto& el = mesh.elements[e];
  int c = 0;
  for (int i = 0; i <= mesh.dimension; ++i)
    if (i != l) out[c++] = el[i];
  if (mesh.dimension == 2) out[2] = -1;
}

}  // namespace

Topology build_topology(const Mesh& mesh) {
  Topology topo;
  const int d = mesh.dimension;
  std::map<FacetKey, int> index;
  topo.element_facets.assign(mesh.num_elements(), {-1, -1, -1, -1});

  for (int e = 0; e < mesh.num_elements(); ++e)
    for (int l = 0; l <= d; ++l) {
      int fn[3];
      element_facet_nodes(mesh, e, l, fn);
      FacetKey key = make_facet_key(fn[0], fn[1], fn[2]);
      auto it = index.find(key);
      if (it == index.end()) {
        Facet f;
        f.nodes = key;
        f.elems = {e, -1};
        f.eta = {1, 1};
        index.emplace(key, topo.num_facets());
        topo.facets.push_back(f);
      } else {
        Facet& f = topo.facets[it->second];
        if (f.elems[1] >= 0)
          throw NonManifoldError("facet shared by more than two elements");
        f.elems[1] = e;
        f.eta[1] = -1;
      }
    }

  // Normalize adjacency: lower element id carries eta = +1.
  for (auto& f : topo.facets)
    if (f.elems[1] >= 0 && f.elems[1] < f.elems[0]) std::swap(f.elems[0], f.elems[1]);

  for (int fi = 0; fi < topo.num_facets(); ++fi) {
    Facet& f = topo.facets[fi];
    for (int side = 0; side < 2; ++side) {
      int e = f.elems[side];
      if (e < 0) continue;
      for (int l = 0; l <= d; ++l) {
        int fn[3];
        element_facet_nodes(mesh, e, l, fn);
        if (make_facet_key(fn[0], fn[1], fn[2]) == f.nodes) topo.element_facets[e][l] = fi;
      }
    }
  }

  // Geometry: measure, center, unit normal outward of the eta = +1 element.
  for (auto& f : topo.facets) {
    Vec3 a = mesh.nodes[f.nodes[0]], b = mesh.nodes[f.nodes[1]];
    if (d == 2) {
      Vec3 t = b - a;
      f.measure = norm(t);
      f.center = 0.5 * (a + b);
      f.normal = {t[1] / f.measure, -t[0] / f.measure, 0.0};
    } else {
      Vec3 c = mesh.nodes[f.nodes[2]];
      Vec3 n = cross(b - a, c - a);
      double nn = norm(n);
      f.measure = 0.5 * nn;
      f.center = (1.0 / 3.0) * (a + (b + c));
      f.normal = (1.0 / nn) * n;
    }
    Vec3 away = f.center - mesh.centroid(f.elems[0]);
    if (dot(f.normal, away) < 0.0) f.normal = -1.0 * f.normal;
  }

  // Boundary labels.
  std::map<std::string, int> label_ids;
  for (const auto& [key, name] : mesh.boundary_labels) {
    auto it = index.find(key);
    if (it == index.end())
      throw ParseError("boundary label '" + name + "' refers to a facet not in the mesh");
    Facet& f = topo.facets[it->second];
    if (!f.is_boundary())
      throw ParseError("boundary label '" + name + "' set on an interior facet");
    auto lit = label_ids.find(name);
    if (lit == label_ids.end()) {
      lit = label_ids.emplace(name, static_cast<int>(topo.labels.size())).first;
      topo.labels.push_back(name);
    }
    f.boundary_label = lit->second;
  }

  // Star patches.
  topo.vertex_elements.assign(mesh.num_nodes(), {});
  topo.vertex_facets.assign(mesh.num_nodes(), {});
  for (int e = 0; e < mesh.num_elements(); ++e)
    for (int i = 0; i <= d; ++i) topo.vertex_elements[mesh.elements[e][i]].push_back(e);
  for (int fi = 0; fi < topo.num_facets(); ++fi)
    for (int i = 0; i < d; ++i) topo.vertex_facets[topo.facets[fi].nodes[i]].push_back(fi);

  return topo;
}

int Topology::label_id(const std::string& name) const {
  for (int i = 0; i < static_cast<int>(labels.size()); ++i)
    if (labels[i] == name) return i;
  return -1;
}

int Topology::eta_of(int f, int elem) const {
  const Facet& fa = facets[f];
  if (fa.elems[0] == elem) return fa.eta[0];
  if (fa.elems[1] == elem) return fa.eta[1];
  throw Error("eta_of: element not adjacent to facet");
}

namespace {

void check_not_degenerate(const Mesh& mesh, int e) {
  double bb = mesh.bbox_diameter();
  double scale = std::pow(bb, mesh.dimension);
  if (std::abs(mesh.signed_measure(e)) < 1e-14 * scale)
    throw DegenerateElementError("element " + std::to_string(e) + " is degenerate");
}

}  // namespace

double radius_ratio(const Mesh& mesh, int e) {
  check_not_degenerate(mesh, e);
  const auto& el = mesh.elements[e];
  if (mesh.dimension == 2) {
    Vec3 p0 = mesh.nodes[el[0]], p1 = mesh.nodes[el[1]], p2 = mesh.nodes[el[2]];
    double a = norm(p1 - p2), b = norm(p0 - p2), c = norm(p0 - p1);
    double area = std::abs(mesh.signed_measure(e));
    double r_in = 2.0 * area / (a + b + c);
    double r_circ = a * b * c / (4.0 * area);
    return r_in / r_circ;
  }
  Vec3 p[4];
  for (int i = 0; i < 4; ++i) p[i] = mesh.nodes[el[i]];
  double vol = std::abs(mesh.signed_measure(e));
  double area_sum = 0.0;
  static const int face[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
  for (const auto& fc : face)
    area_sum += 0.5 * norm(cross(p[fc[1]] - p[fc[0]], p[fc[2]] - p[fc[0]]));
  double r_in = 3.0 * vol / area_sum;
  // circumcenter from |x - p0|^2 = |x - pi|^2
  Vec3 e1 = p[1] - p[0], e2 = p[2] - p[0], e3 = p[3] - p[0];
  double rhs[3] = {0.5 * dot(e1, e1), 0.5 * dot(e2, e2), 0.5 * dot(e3, e3)};
  // solve 3x3 by Cramer
  Vec3 r1 = e1, r2 = e2, r3 = e3;
  double det = dot(r1, cross(r2, r3));
  Vec3 cx = cross(r2, r3), cy = cross(r3, r1), cz = cross(r1, r2);
  Vec3 center{(rhs[0] * cx[0] + rhs[1] * cy[0] + rhs[2] * cz[0]) / det,
              (rhs[0] * cx[1] + rhs[1] * cy[1] + rhs[2] * cz[1]) / det,
              (rhs[0] * cx[2] + rhs[1] * cy[2] + rhs[2] * cz[2]) / det};
  double r_circ = norm(center);
  return r_in / r_circ;
}

double edge_or_area_ratio(const Mesh& mesh, int e) {
  check_not_degenerate(mesh, e);
  const auto& el = mesh.elements[e];
  if (mesh.dimension == 2) {
    double lo = std::numeric_limits<double>::max(), hi = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        double l = norm(mesh.nodes[el[i]] - mesh.nodes[el[j]]);
        lo = std::min(lo, l);
        hi = std::max(hi, l);
      }
    return lo / hi;
  }
  Vec3 p[4];
  for (int i = 0; i < 4; ++i) p[i] = mesh.nodes[el[i]];
  static const int face[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
  double lo = std::numeric_limits<double>::max(), hi = 0.0;
  for (const auto& fc : face) {
    double a = 0.5 * norm(cross(p[fc[1]] - p[fc[0]], p[fc[2]] - p[fc[0]]));
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  return lo / hi;
}

QualityMetrics compute_quality(const Mesh& mesh) {
  QualityMetrics q;
  q.radius_ratio.resize(mesh.num_elements());
  q.edge_or_area_ratio.resize(mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    q.radius_ratio[e] = radius_ratio(mesh, e);
    q.edge_or_area_ratio[e] = edge_or_area_ratio(mesh, e);
  }
  return q;
}

namespace {

Mesh refine_once(const Mesh& mesh) {
  Mesh out;
  out.dimension = mesh.dimension;
  out.nodes = mesh.nodes;
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    int id = out.num_nodes();
    out.nodes.push_back(0.5 * (mesh.nodes[a] + mesh.nodes[b]));
    midpoint.emplace(key, id);
    return id;
  };

  if (mesh.dimension == 2) {
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const auto& el = mesh.elements[e];
      int v0 = el[0], v1 = el[1], v2 = el[2];
      int m01 = mid(v0, v1), m12 = mid(v1, v2), m02 = mid(v0, v2);
      const std::array<std::array<int, 4>, 4> kids = {{{v0, m01, m02, -1},
                                                       {v1, m12, m01, -1},
                                                       {v2, m02, m12, -1},
                                                       {m01, m12, m02, -1}}};
      for (const auto& k : kids) {
        out.elements.push_back(k);
        out.parent_element.push_back(e);
      }
    }
    for (const auto& [key, name] : mesh.boundary_labels) {
      int a = key[0], b = key[1];
      int m = mid(a, b);
      out.boundary_labels[make_facet_key(a, m)] = name;
      out.boundary_labels[make_facet_key(m, b)] = name;
    }
  } else {
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const auto& el = mesh.elements[e];
      int v[4] = {el[0], el[1], el[2], el[3]};
      int m01 = mid(v[0], v[1]), m02 = mid(v[0], v[2]), m03 = mid(v[0], v[3]);
      int m12 = mid(v[1], v[2]), m13 = mid(v[1], v[3]), m23 = mid(v[2], v[3]);
      std::vector<std::array<int, 4>> kids = {{v[0], m01, m02, m03},
                                              {v[1], m01, m12, m13},
                                              {v[2], m02, m12, m23},
                                              {v[3], m03, m13, m23}};
      // central octahedron: split along the shortest of its three diagonals
      struct Diag { int a, b, c0, c1, c2, c3; };
      // around diagonal (a,b) the remaining midpoints form the cycle c0..c3
      const Diag diags[3] = {{m01, m23, m02, m03, m13, m12},
                             {m02, m13, m01, m03, m23, m12},
                             {m03, m12, m01, m02, m23, m13}};
      int best = 0;
      double best_len = std::numeric_limits<double>::max();
      for (int i = 0; i < 3; ++i) {
        double len = norm(out.nodes[diags[i].a] - out.nodes[diags[i].b]);
        if (len < best_len - 1e-15 * (1.0 + best_len)) {
          best_len = len;
          best = i;
        }
      }
      const Diag& dg = diags[best];
      const int cyc[4] = {dg.c0, dg.c1, dg.c2, dg.c3};
      for (int i = 0; i < 4; ++i)
        kids.push_back({dg.a, dg.b, cyc[i], cyc[(i + 1) % 4]});
      for (const auto& k : kids) {
        out.elements.push_back(k);
        out.parent_element.push_back(e);
      }
    }
    for (const auto& [key, name] : mesh.boundary_labels) {
      int a = key[0], b = key[1], c = key[2];
      int ab = mid(a, b), ac = mid(a, c), bc = mid(b, c);
      out.boundary_labels[make_facet_key(a, ab, ac)] = name;
      out.boundary_labels[make_facet_key(b, ab, bc)] = name;
      out.boundary_labels[make_facet_key(c, ac, bc)] = name;
      out.boundary_labels[make_facet_key(ab, bc, ac)] = name;
    }
  }
  out.finalize();
  return out;
}

}  // namespace

Mesh uniform_refine(const Mesh& mesh, int levels) {
  if (levels < 1) throw ConfigError("uniform_refine: levels must be >= 1");
  Mesh cur = refine_once(mesh);
  for (int l = 1; l < levels; ++l) {
    Mesh next = refine_once(cur);
    // compose ancestors so parent_element always refers to the root mesh
    for (auto& p : next.parent_element) p = cur.parent_element[p];
    cur = std::move(next);
  }
  return cur;
}

}  // namespace eespt
