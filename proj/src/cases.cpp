#include "eespt/cases.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace eespt {

namespace {

int param_int(const std::map<std::string, std::string>& params, const std::string& key, int dflt) {
  auto it = params.find(key);
  return it == params.end() ? dflt : std::stoi(it->second);
}

// Classify the boundary facets of a freshly built mesh by geometry and write
// the labels back into mesh.boundary_labels.
void label_by_position(Mesh& mesh,
                       const std::function<std::string(const Vec3&)>& classify) {
  Topology topo = build_topology(mesh);
  mesh.boundary_labels.clear();
  for (const auto& f : topo.facets) {
    if (!f.is_boundary()) continue;
    mesh.boundary_labels[f.nodes] = classify(f.center);
  }
}

struct QuarterPlateGrid {
  std::vector<Vec3> nodes;
  std::vector<std::array<int, 4>> triangles;  // 2D elements
  int nr, nt;
  double r, lx, ly;

  int vid(int i, int j) const { return j * (nr + 1) + i; }
};

// Polar-to-boundary mapped grid on [0, pi/2] x [hole radius, outer box].
QuarterPlateGrid quarter_plate_grid(int nr, int nt, double r, double lx, double ly) {
  QuarterPlateGrid g;
  g.nr = nr;
  g.nt = nt;
  g.r = r;
  g.lx = lx;
  g.ly = ly;
  const double pi2 = std::asin(1.0);
  for (int j = 0; j <= nt; ++j) {
    double th = pi2 * j / nt;
    double cx = std::cos(th), sy = std::sin(th);
    double outer = std::min(cx > 1e-14 ? lx / cx : 1e300, sy > 1e-14 ? ly / sy : 1e300);
    for (int i = 0; i <= nr; ++i) {
      // mild geometric grading toward the hole
      double s = std::pow(double(i) / nr, 1.15);
      double rho = r + (outer - r) * s;
      g.nodes.push_back({rho * cx, rho * sy, 0.0});
    }
  }
  for (int j = 0; j < nt; ++j)
    for (int i = 0; i < nr; ++i) {
      int v00 = g.vid(i, j), v10 = g.vid(i + 1, j), v01 = g.vid(i, j + 1),
          v11 = g.vid(i + 1, j + 1);
      if ((i + j) % 2 == 0) {
        g.triangles.push_back({v00, v10, v11, -1});
        g.triangles.push_back({v00, v11, v01, -1});
      } else {
        g.triangles.push_back({v00, v10, v01, -1});
        g.triangles.push_back({v10, v11, v01, -1});
      }
    }
  return g;
}

}  // namespace

BundledCase case_uniform_tension(int n) {
  BundledCase c;
  c.name = "uniform_tension";
  StructuredSpec spec;
  spec.dimension = 2;
  spec.subdivisions[0] = spec.subdivisions[1] = n;
  c.mesh = generate_structured(spec);
  c.problem.material = Material{1.0, 0.3, MaterialMode::PlaneStress};
  c.problem.dirichlet["left"].component[0] = 0.0;
  c.problem.dirichlet["bottom"].component[1] = 0.0;
  c.problem.neumann["right"] = Vec3{1.0, 0.0, 0.0};
  return c;
}

BundledCase case_plate_hole_2d(int nr, int nt) {
  const double r = 1.0, lx = 4.0, ly = 3.0;
  QuarterPlateGrid g = quarter_plate_grid(nr, nt, r, lx, ly);
  BundledCase c;
  c.name = "plate_hole_2d";
  c.mesh.dimension = 2;
  c.mesh.nodes = g.nodes;
  c.mesh.elements = g.triangles;
  c.mesh.finalize();
  const double tol = 1e-9 * (lx + ly);
  label_by_position(c.mesh, [&](const Vec3& x) -> std::string {
    if (x[0] < tol) return "left";
    if (x[1] < tol) return "bottom";
    if (x[0] > lx - tol) return "right";
    if (x[1] > ly - tol) return "top";
    return "hole";
  });
  c.problem.material = Material{1.0, 0.3, MaterialMode::PlaneStress};
  c.problem.dirichlet["left"].component[0] = 0.0;    // symmetry plane x = 0
  c.problem.dirichlet["bottom"].component[1] = 0.0;  // symmetry plane y = 0
  c.problem.neumann["right"] = Vec3{1.0, 0.0, 0.0};
  return c;
}

BundledCase case_lshape_2d(int n) {
  BundledCase c;
  c.name = "lshape_2d";
  c.mesh.dimension = 2;
  const int m = 2 * n;  // grid over [0,2]^2, upper-right quadrant removed
  const double h = 2.0 / m;
  std::vector<int> remap((m + 1) * (m + 1), -1);
  auto gid = [&](int i, int j) { return j * (m + 1) + i; };
  std::vector<std::array<int, 4>> cells;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      double cx = (i + 0.5) * h, cy = (j + 0.5) * h;
      if (cx > 1.0 && cy > 1.0) continue;
      cells.push_back({i, j, 0, 0});
    }
  for (const auto& cell : cells) {
    int i = cell[0], j = cell[1];
    for (int dj = 0; dj <= 1; ++dj)
      for (int di = 0; di <= 1; ++di) remap[gid(i + di, j + dj)] = 0;
  }
  int next = 0;
  for (int k = 0; k < (m + 1) * (m + 1); ++k)
    if (remap[k] == 0) remap[k] = next++;
    else remap[k] = -1;
  c.mesh.nodes.resize(next);
  for (int j = 0; j <= m; ++j)
    for (int i = 0; i <= m; ++i) {
      int id = remap[gid(i, j)];
      if (id < 0) continue;
      double x = i * h, y = j * h;
      // smooth deterministic distortion, interior nodes only, keeps validity
      bool on_bnd = (i == 0 || j == 0 || i == m || j == m ||
                     (std::abs(x - 1.0) < 1e-12 && y >= 1.0 - 1e-12) ||
                     (std::abs(y - 1.0) < 1e-12 && x >= 1.0 - 1e-12));
      if (!on_bnd) {
        x += 0.17 * h * std::sin(3.1 * x + 1.7) * std::sin(2.3 * y + 0.4);
        y += 0.17 * h * std::sin(2.7 * x + 0.9) * std::sin(3.7 * y + 2.1);
      }
      c.mesh.nodes[id] = {x, y, 0.0};
    }
  for (const auto& cell : cells) {
    int i = cell[0], j = cell[1];
    int v00 = remap[gid(i, j)], v10 = remap[gid(i + 1, j)];
    int v01 = remap[gid(i, j + 1)], v11 = remap[gid(i + 1, j + 1)];
    if ((i + j) % 2 == 0) {
      c.mesh.elements.push_back({v00, v10, v11, -1});
      c.mesh.elements.push_back({v00, v11, v01, -1});
    } else {
      c.mesh.elements.push_back({v00, v10, v01, -1});
      c.mesh.elements.push_back({v10, v11, v01, -1});
    }
  }
  c.mesh.finalize();
  const double tol = 1e-9;
  label_by_position(c.mesh, [&](const Vec3& x) -> std::string {
    if (x[0] < tol) return "left";
    if (x[0] > 2.0 - tol) return "right";
    if (x[1] < tol) return "bottom";
    if (x[1] > 2.0 - tol) return "top";
    return "notch";
  });
  c.problem.material = Material{1.0, 0.3, MaterialMode::PlaneStress};
  c.problem.dirichlet["left"].component[0] = 0.0;
  c.problem.dirichlet["left"].component[1] = 0.0;
  c.problem.neumann["right"] = Vec3{0.0, 0.5, 0.0};
  return c;
}

BundledCase case_plate_hole_3d(int nr, int nt, int nz) {
  const double r = 1.0, lx = 4.0, ly = 3.0, hz = 0.5;
  QuarterPlateGrid g = quarter_plate_grid(nr, nt, r, lx, ly);
  BundledCase c;
  c.name = "plate_hole_3d";
  c.mesh.dimension = 3;
  const int nlayer = static_cast<int>(g.nodes.size());
  for (int k = 0; k <= nz; ++k)
    for (const auto& p : g.nodes) c.mesh.nodes.push_back({p[0], p[1], hz * k / nz});

  // split each prism into three tets with Dompierre's vertex-ordering rule,
  // which keeps shared quad faces conforming
  auto add_prism = [&](std::array<int, 6> v) {
    int rot = 0;
    for (int i = 1; i < 6; ++i)
      if (v[i] < v[rot]) rot = i;
    static const int perm[6][6] = {{0, 1, 2, 3, 4, 5}, {1, 2, 0, 4, 5, 3}, {2, 0, 1, 5, 3, 4},
                                   {3, 5, 4, 0, 2, 1}, {4, 3, 5, 1, 0, 2}, {5, 4, 3, 2, 1, 0}};
    std::array<int, 6> w;
    for (int i = 0; i < 6; ++i) w[i] = v[perm[rot][i]];
    if (std::min(w[1], w[5]) < std::min(w[2], w[4])) {
      c.mesh.elements.push_back({w[0], w[1], w[2], w[5]});
      c.mesh.elements.push_back({w[0], w[1], w[5], w[4]});
      c.mesh.elements.push_back({w[0], w[4], w[5], w[3]});
    } else {
      c.mesh.elements.push_back({w[0], w[1], w[2], w[4]});
      c.mesh.elements.push_back({w[0], w[4], w[2], w[5]});
      c.mesh.elements.push_back({w[0], w[4], w[5], w[3]});
    }
  };
  for (int k = 0; k < nz; ++k)
    for (const auto& t : g.triangles)
      add_prism({t[0] + k * nlayer, t[1] + k * nlayer, t[2] + k * nlayer,
                 t[0] + (k + 1) * nlayer, t[1] + (k + 1) * nlayer, t[2] + (k + 1) * nlayer});
  c.mesh.finalize();

  const double tol = 1e-9 * (lx + ly);
  label_by_position(c.mesh, [&](const Vec3& x) -> std::string {
    if (x[2] < tol) return "front";
    if (x[2] > hz - tol) return "back";
    if (x[0] < tol) return "left";
    if (x[1] < tol) return "bottom";
    if (x[0] > lx - tol) return "right";
    if (x[1] > ly - tol) return "top";
    return "hole";
  });
  c.problem.material = Material{1.0, 0.3, MaterialMode::Solid3D};
  c.problem.dirichlet["left"].component[0] = 0.0;
  c.problem.dirichlet["bottom"].component[1] = 0.0;
  c.problem.dirichlet["front"].component[2] = 0.0;
  c.problem.neumann["right"] = Vec3{1.0, 0.0, 0.0};
  return c;
}

BundledCase make_bundled_case(const std::string& name,
                              const std::map<std::string, std::string>& params) {
  if (name == "uniform_tension") return case_uniform_tension(param_int(params, "n", 8));
  if (name == "plate_hole_2d")
    return case_plate_hole_2d(param_int(params, "nr", 25), param_int(params, "nt", 40));
  if (name == "lshape_2d") return case_lshape_2d(param_int(params, "n", 13));
  if (name == "plate_hole_3d")
    return case_plate_hole_3d(param_int(params, "nr", 4), param_int(params, "nt", 8),
                              param_int(params, "nz", 2));
  throw ConfigError("unknown bundled case '" + name + "'");
}

}  // namespace eespt
