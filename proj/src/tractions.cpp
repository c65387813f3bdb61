#include "eespt/tractions.hpp"

#include <algorithm>
#include <cmath>

#include "eespt/parallel.hpp"
#include "eespt/quadrature.hpp"

namespace eespt {

ElementTraction element_traction(const Mesh& mesh, const Topology& topo,
                                 const TractionField& field, int elem) {
  ElementTraction t;
  t.clear();
  const int d = mesh.dimension;
  for (int lf = 0; lf <= d; ++lf) {
    int fi = topo.element_facets[elem][lf];
    double sign = topo.eta_of(fi, elem);
    for (int k = 0; k < d; ++k) t.values[lf][k] = sign * field.coeff[fi][k];
  }
  return t;
}

std::array<Vec3, 3> fe_traction_target(const Mesh& mesh, const Topology& topo, int facet,
                                       const FESolution& fe, const ProblemDef& prob) {
  const Facet& f = topo.facets[facet];
  const int d = mesh.dimension;
  std::array<Vec3, 3> out{Vec3{0, 0, 0}, Vec3{0, 0, 0}, Vec3{0, 0, 0}};

  if (f.boundary_label >= 0) {
    auto it = prob.neumann.find(topo.labels[f.boundary_label]);
    if (it != prob.neumann.end()) {
      for (int k = 0; k < d; ++k) out[k] = it->second;
      return out;
    }
  }

  auto stress_vector = [&](int elem) {
    const Voigt& s = fe.stress[elem];
    Vec3 t{0, 0, 0};
    if (d == 2) {
      t[0] = s[0] * f.normal[0] + s[2] * f.normal[1];
      t[1] = s[2] * f.normal[0] + s[1] * f.normal[1];
    } else {
      t[0] = s[0] * f.normal[0] + s[5] * f.normal[1] + s[4] * f.normal[2];
      t[1] = s[5] * f.normal[0] + s[1] * f.normal[1] + s[3] * f.normal[2];
      t[2] = s[4] * f.normal[0] + s[3] * f.normal[1] + s[2] * f.normal[2];
    }
    return t;
  };

  Vec3 t = stress_vector(f.elems[0]);
  if (!f.is_boundary()) t = 0.5 * (t + stress_vector(f.elems[1]));
  for (int k = 0; k < d; ++k) out[k] = t;
  return out;
}

namespace {

// integral of lambda_k * g over the facet, g linear with canonical nodal values
Vec3 hat_moment(const Facet& f, int dim, const std::array<Vec3, 3>& g, int k) {
  if (dim == 2) {
    // M = |G|/6 [[2,1],[1,2]]
    int j = 1 - k;
    return (f.measure / 6.0) * (2.0 * g[k] + g[j]);
  }
  Vec3 sum{0, 0, 0};
  for (int j = 0; j < 3; ++j) sum += g[j];
  return (f.measure / 12.0) * (g[k] + sum);
}

int facet_vertex_index(const Facet& f, int dim, int vertex) {
  for (int k = 0; k < dim; ++k)
    if (f.nodes[k] == vertex) return k;
  return -1;
}

}  // namespace

PatchSystem build_patch_system(const Mesh& mesh, const Topology& topo, int vertex,
                               const FESolution& fe, const ProblemDef& prob) {
  const int d = mesh.dimension;
  PatchSystem sys;
  sys.vertex = vertex;
  sys.facets = topo.vertex_facets[vertex];
  const int nf = static_cast<int>(sys.facets.size());
  const int nunk = d * nf;

  sys.weight = VecX::Zero(nunk);
  sys.target = VecX::Zero(nunk);
  for (int i = 0; i < nf; ++i) {
    const Facet& f = topo.facets[sys.facets[i]];
    auto tgt = fe_traction_target(mesh, topo, sys.facets[i], fe, prob);
    int k = facet_vertex_index(f, d, vertex);
    Vec3 m = hat_moment(f, d, tgt, k);
    for (int c = 0; c < d; ++c) {
      sys.weight[d * i + c] = 1.0 / f.measure;
      sys.target[d * i + c] = m[c];
    }
  }

  // One vector equation per patch element: the traction moments attributed to
  // this vertex balance the FE virtual work of the hat function.
  sys.equilibrium.label = "L";
  sys.equilibrium.ncols = nunk;
  for (int e : topo.vertex_elements[vertex]) {
    const auto grads = shape_gradients(mesh, e);
    const auto& el = mesh.elements[e];
    int local_vertex = -1;
    for (int a = 0; a <= d; ++a)
      if (el[a] == vertex) local_vertex = a;
    const Vec3& gl = grads[local_vertex];
    const double vol = mesh.measure(e);
    const Vec3 f_d = prob.body(e);
    const Voigt& s = fe.stress[e];
    Vec3 rhs{0, 0, 0};
    if (d == 2) {
      rhs[0] = vol * (s[0] * gl[0] + s[2] * gl[1]);
      rhs[1] = vol * (s[2] * gl[0] + s[1] * gl[1]);
    } else {
      rhs[0] = vol * (s[0] * gl[0] + s[5] * gl[1] + s[4] * gl[2]);
      rhs[1] = vol * (s[5] * gl[0] + s[1] * gl[1] + s[3] * gl[2]);
      rhs[2] = vol * (s[4] * gl[0] + s[3] * gl[1] + s[2] * gl[2]);
    }
    rhs = rhs - (vol / (d + 1)) * f_d;

    for (int c = 0; c < d; ++c) {
      std::vector<std::pair<int, double>> row;
      for (int i = 0; i < nf; ++i) {
        int fi = sys.facets[i];
        // facet belongs to this element?
        bool mine = false;
        for (int lf = 0; lf <= d; ++lf)
          if (topo.element_facets[e][lf] == fi) mine = true;
        if (!mine) continue;
        row.emplace_back(d * i + c, static_cast<double>(topo.eta_of(fi, e)));
      }
      sys.equilibrium.add_row(row, rhs[c]);
    }
  }

  // Neumann facets: pin the vertex-attributed moment of the prescribed F_d.
  sys.neumann_pins.label = "C";
  sys.neumann_pins.ncols = nunk;
  for (int i = 0; i < nf; ++i) {
    const Facet& f = topo.facets[sys.facets[i]];
    if (f.boundary_label < 0) continue;
    auto it = prob.neumann.find(topo.labels[f.boundary_label]);
    if (it == prob.neumann.end()) continue;
    std::array<Vec3, 3> fd_nodal{Vec3{0, 0, 0}, Vec3{0, 0, 0}, Vec3{0, 0, 0}};
    for (int k = 0; k < d; ++k) fd_nodal[k] = it->second;
    int k = facet_vertex_index(f, d, vertex);
    Vec3 m = hat_moment(f, d, fd_nodal, k);
    for (int c = 0; c < d; ++c)
      sys.neumann_pins.add_row({{d * i + c, 1.0}}, m[c]);
  }
  return sys;
}

PatchSolution solve_patch(const PatchSystem& sys) {
  PatchSolution out;
  out.vertex = sys.vertex;
  out.facets = sys.facets;
  const int n = sys.weight.size();
  if (n == 0) return out;

  SparseSymmetric A(n);
  for (int i = 0; i < n; ++i) A.add(i, i, sys.weight[i]);
  A.finalize();
  VecX B(n);
  for (int i = 0; i < n; ++i) B[i] = sys.weight[i] * sys.target[i];

  std::vector<ConstraintBlock> blocks;
  if (sys.neumann_pins.num_rows() > 0) blocks.push_back(sys.neumann_pins);
  // the FE-equilibrium compatibility can span the pins and the equilibrium
  // rows jointly, so the reduction must see both
  ConstraintBlock reduced = eliminate_redundant_rows(sys.equilibrium, 1e-10, sys.neumann_pins);
  if (reduced.num_rows() > 0) blocks.push_back(reduced);

  SaddleResult res = solve_saddle(A, B, blocks);

  const int d = static_cast<int>(n / sys.facets.size());
  out.moment.resize(sys.facets.size());
  for (size_t i = 0; i < sys.facets.size(); ++i) {
    out.moment[i] = Vec3{0, 0, 0};
    for (int c = 0; c < d; ++c) out.moment[i][c] = res.primal[d * i + c];
  }
  return out;
}

TractionField assemble_tractions(const Mesh& mesh, const Topology& topo, const ProblemDef& prob,
                                 const std::vector<PatchSolution>& patches) {
  const int d = mesh.dimension;
  TractionField field;
  field.provenance = TractionField::Provenance::Standard;
  field.coeff.assign(topo.num_facets(), {Vec3{0, 0, 0}, Vec3{0, 0, 0}, Vec3{0, 0, 0}});
  field.neumann.assign(topo.num_facets(), 0);

  if (static_cast<int>(patches.size()) != mesh.num_nodes())
    throw MissingDataError("assemble_tractions: one patch solution per vertex required");

  // collect per-facet hat moments from the vertex patches
  std::vector<std::array<Vec3, 3>> moments(topo.num_facets(),
                                           {Vec3{0, 0, 0}, Vec3{0, 0, 0}, Vec3{0, 0, 0}});
  std::vector<std::array<char, 3>> seen{};
  seen.assign(topo.num_facets(), {0, 0, 0});
  for (int v = 0; v < mesh.num_nodes(); ++v) {
    const PatchSolution& p = patches[v];
    if (p.vertex != v && !p.facets.empty())
      throw MissingDataError("patch solution out of order");
    for (size_t i = 0; i < p.facets.size(); ++i) {
      const Facet& f = topo.facets[p.facets[i]];
      int k = facet_vertex_index(f, d, v);
      if (k < 0) throw MissingDataError("patch facet does not touch its vertex");
      moments[p.facets[i]][k] = p.moment[i];
      seen[p.facets[i]][k] = 1;
    }
  }

  for (int fi = 0; fi < topo.num_facets(); ++fi) {
    const Facet& f = topo.facets[fi];
    for (int k = 0; k < d; ++k)
      if (!seen[fi][k]) throw MissingDataError("missing patch solution for facet vertex");
    // invert the facet mass matrix to get nodal values from hat moments
    if (d == 2) {
      const auto& m = moments[fi];
      field.coeff[fi][0] = (2.0 / f.measure) * (2.0 * m[0] - m[1]);
      field.coeff[fi][1] = (2.0 / f.measure) * (2.0 * m[1] - m[0]);
    } else {
      const auto& m = moments[fi];
      Vec3 sum = m[0] + m[1] + m[2];
      for (int k = 0; k < 3; ++k)
        field.coeff[fi][k] = (3.0 / f.measure) * (4.0 * m[k] - sum);
    }
    // Neumann facets carry the prescribed interpolant exactly
    if (f.boundary_label >= 0) {
      auto it = prob.neumann.find(topo.labels[f.boundary_label]);
      if (it != prob.neumann.end()) {
        for (int k = 0; k < d; ++k) field.coeff[fi][k] = it->second;
        field.neumann[fi] = 1;
      }
    }
  }
  return field;
}

EquilibriumResidual verify_equilibrium(const Mesh& mesh, const Topology& topo,
                                       const TractionField& field, const ProblemDef& prob,
                                       int elem, double load_scale_value) {
  const int d = mesh.dimension;
  EquilibriumResidual out;
  const Vec3 G = mesh.centroid(elem);
  const QuadRule& fr = facet_rule(d, 4);
  double boundary_measure = 0.0;
  double diam = 0.0;
  for (int lf = 0; lf <= d; ++lf) {
    int fi = topo.element_facets[elem][lf];
    const Facet& f = topo.facets[fi];
    boundary_measure += f.measure;
    diam = std::max(diam, 2.0 * norm(f.center - G));
    double sign = topo.eta_of(fi, elem);
    Vec3 a = mesh.nodes[f.nodes[0]], b = mesh.nodes[f.nodes[1]];
    Vec3 c = (d == 3) ? mesh.nodes[f.nodes[2]] : Vec3{0, 0, 0};
    const double ref_measure = (d == 2) ? 1.0 : 0.5;
    for (int q = 0; q < fr.size(); ++q) {
      const Vec3& rp = fr.points[q];
      Vec3 x, t{0, 0, 0};
      double h0, h1, h2 = 0.0;
      if (d == 2) {
        x = a + rp[0] * (b - a);
        h0 = 1.0 - rp[0];
        h1 = rp[0];
      } else {
        x = a + rp[0] * (b - a) + rp[1] * (c - a);
        h0 = 1.0 - rp[0] - rp[1];
        h1 = rp[0];
        h2 = rp[1];
      }
      t = h0 * field.coeff[fi][0] + h1 * field.coeff[fi][1];
      if (d == 3) t += h2 * field.coeff[fi][2];
      double w = fr.weights[q] / ref_measure * f.measure * sign;
      out.force += w * t;
      out.moment += w * cross(x - G, t);
    }
  }
  const double vol = mesh.measure(elem);
  out.force += vol * prob.body(elem);
  // a constant body force has no moment about the centroid

  const double fscale = std::max(load_scale_value * boundary_measure, 1e-300);
  out.force_rel = norm(out.force) / fscale;
  out.moment_rel = norm(out.moment) / (fscale * std::max(diam, 1e-300));
  return out;
}

TractionField build_standard_tractions(const Mesh& mesh, const Topology& topo,
                                       const ProblemDef& prob, const FESolution& fe,
                                       int threads) {
  std::vector<PatchSolution> patches(mesh.num_nodes());
  parallel_for(mesh.num_nodes(), threads, [&](int v) {
    PatchSystem sys = build_patch_system(mesh, topo, v, fe, prob);
    patches[v] = solve_patch(sys);
    patches[v].vertex = v;
  });
  return assemble_tractions(mesh, topo, prob, patches);
}

}  // namespace eespt
