#include "eespt/enhanced.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "eespt/parallel.hpp"
#include "eespt/quadrature.hpp"

namespace eespt {

Criterion criterion_from_name(const std::string& name) {
  if (name == "radius") return Criterion::Radius;
  if (name == "edge") return Criterion::Edge;
  if (name == "area") return Criterion::Area;
  if (name == "estimate") return Criterion::Estimate;
  throw ConfigError("unknown criterion '" + name + "'");
}

std::string criterion_name(Criterion c) {
  switch (c) {
    case Criterion::Radius: return "radius";
    case Criterion::Edge: return "edge";
    case Criterion::Area: return "area";
    default: return "estimate";
  }
}

bool Selection::is_selected(int elem) const {
  return std::binary_search(elements.begin(), elements.end(), elem);
}

bool Selection::facet_in_zone(int facet) const {
  return std::binary_search(facets.begin(), facets.end(), facet);
}

namespace {

std::vector<int> facets_of(const Topology& topo, const std::vector<int>& elems, int d) {
  std::set<int> fs;
  for (int e : elems)
    for (int lf = 0; lf <= d; ++lf) fs.insert(topo.element_facets[e][lf]);
  return {fs.begin(), fs.end()};
}

}  // namespace

Selection select_elements(const Mesh& mesh, const Topology& topo, Criterion criterion,
                          SelectionMode mode, const QualityMetrics& metrics,
                          const std::vector<double>* contributions) {
  const int d = mesh.dimension;
  const int ne = mesh.num_elements();

  std::vector<double> value(ne);
  const bool estimate = (criterion == Criterion::Estimate);
  if (estimate) {
    if (!contributions || static_cast<int>(contributions->size()) != ne)
      throw MissingDataError("estimate criterion requires a prior standard-estimator run");
    value = estimate_ratio(*contributions);
  } else if (criterion == Criterion::Radius) {
    value = metrics.radius_ratio;
  } else {
    value = metrics.edge_or_area_ratio;
  }

  std::vector<int> selected;
  if (!mode.fraction) {
    for (int e = 0; e < ne; ++e) {
      bool in = estimate ? (value[e] >= mode.value) : (value[e] <= mode.value);
      if (in) selected.push_back(e);
    }
  } else {
    if (mode.value < 0.0 || mode.value > 1.0) throw ConfigError("fraction must lie in [0, 1]");
    int k = static_cast<int>(std::ceil(mode.value * ne));
    k = std::min(k, ne);
    std::vector<int> order(ne);
    for (int e = 0; e < ne; ++e) order[e] = e;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      double va = estimate ? -value[a] : value[a];
      double vb = estimate ? -value[b] : value[b];
      return std::tie(va, a) < std::tie(vb, b);
    });
    selected.assign(order.begin(), order.begin() + k);
    std::sort(selected.begin(), selected.end());
  }

  // structural closure: an unselected element touching two or more selected
  // facets joins the zone, so every seam element touches exactly one
  std::vector<char> in_zone(ne, 0);
  for (int e : selected) in_zone[e] = 1;
  bool changed = !selected.empty();
  while (changed) {
    changed = false;
    std::vector<int> zone;
    for (int e = 0; e < ne; ++e)
      if (in_zone[e]) zone.push_back(e);
    auto je = facets_of(topo, zone, d);
    std::set<int> je_set(je.begin(), je.end());
    for (int e = 0; e < ne; ++e) {
      if (in_zone[e]) continue;
      int touch = 0;
      for (int lf = 0; lf <= d; ++lf)
        if (je_set.count(topo.element_facets[e][lf])) ++touch;
      if (touch >= 2) {
        in_zone[e] = 1;
        changed = true;
      }
    }
  }

  Selection sel;
  sel.criterion = criterion;
  sel.mode = mode;
  for (int e = 0; e < ne; ++e)
    if (in_zone[e]) sel.elements.push_back(e);
  sel.facets = facets_of(topo, sel.elements, d);

  std::set<int> je_set(sel.facets.begin(), sel.facets.end());
  std::set<int> seam;
  for (int f : sel.facets)
    for (int side = 0; side < 2; ++side) {
      int e = topo.facets[f].elems[side];
      if (e >= 0 && !in_zone[e]) seam.insert(e);
    }
  sel.seam_elements.assign(seam.begin(), seam.end());
  return sel;
}

HRDecomposition compute_H(const Selection& sel, const FESolution& fe) {
  if (fe.degree != 1)
    throw UnsupportedDegreeError("H part implemented for degree 1 only (H vanishes there)");
  HRDecomposition hr;
  hr.facets = sel.facets;
  hr.H.assign(sel.facets.size(), {Vec3{0, 0, 0}, Vec3{0, 0, 0}, Vec3{0, 0, 0}});
  hr.R.assign(sel.facets.size(), {Vec3{0, 0, 0}, Vec3{0, 0, 0}, Vec3{0, 0, 0}});
  return hr;
}

std::map<int, StressOperator> build_local_operators(const Mesh& mesh, const Topology& topo,
                                                    const Selection& sel, const FESolution& fe,
                                                    const Material& mat, int threads) {
  const int d = mesh.dimension;
  std::vector<StressOperator> ops(sel.elements.size());
  parallel_for(static_cast<int>(sel.elements.size()), threads, [&](int i) {
    int e = sel.elements[i];
    auto space = std::make_shared<ElementLocalSpace>(mesh, topo, e, mat, 3);
    std::vector<int> facets(topo.element_facets[e].begin(),
                            topo.element_facets[e].begin() + d + 1);
    ops[i] = traction_to_stress_operator(space, facets, fe.stress[e]);
  });
  std::map<int, StressOperator> out;
  for (size_t i = 0; i < sel.elements.size(); ++i) out.emplace(sel.elements[i], std::move(ops[i]));
  return out;
}

QPSystem assemble_qp(const Mesh& mesh, const Topology& topo, const Selection& sel,
                     const HRDecomposition& hr, const FESolution& fe, const Material& mat,
                     const std::map<int, StressOperator>& operators) {
  const int d = mesh.dimension;
  QPSystem qp;
  qp.selection = sel;
  qp.dofs_per_facet = d * d;
  int off = 0;
  for (int f : sel.facets) {
    qp.facet_offset[f] = off;
    off += qp.dofs_per_facet;
  }
  qp.num_dofs = off;
  qp.A = SparseSymmetric(qp.num_dofs);
  qp.B = VecX::Zero(qp.num_dofs);

  for (int e : sel.elements) {
    auto it = operators.find(e);
    if (it == operators.end())
      throw MissingDataError("missing local operator for element " + std::to_string(e));
    const StressOperator& op = it->second;
    const int ncols = op.num_cols();
    std::vector<int> gdof(ncols);
    for (size_t i = 0; i < op.facets.size(); ++i) {
      int base = qp.facet_offset.at(op.facets[i]);
      for (int k = 0; k < qp.dofs_per_facet; ++k)
        gdof[i * qp.dofs_per_facet + k] = base + k;
    }
    for (int i = 0; i < ncols; ++i) {
      qp.B[gdof[i]] += op.b_fe[i];
      for (int j = 0; j < ncols; ++j)
        if (gdof[i] >= gdof[j]) qp.A.add(gdof[i], gdof[j], op.a_local(i, j));
    }
  }
  qp.A.finalize();
  // H = 0 at degree 1; a nonzero H would shift B by the sigma^H pairing
  (void)hr;
  (void)topo;
  (void)fe;
  (void)mat;
  return qp;
}

namespace {

// integral of hat_k * cross(x - G, e_c) over a facet
Vec3 facet_moment_coeff(const Mesh& mesh, const Facet& f, int dim, int k, int c, const Vec3& G) {
  const QuadRule& fr = facet_rule(dim, 4);
  Vec3 a = mesh.nodes[f.nodes[0]], b = mesh.nodes[f.nodes[1]];
  Vec3 cc = (dim == 3) ? mesh.nodes[f.nodes[2]] : Vec3{0, 0, 0};
  const double ref_measure = (dim == 2) ? 1.0 : 0.5;
  Vec3 e{0, 0, 0};
  e[c] = 1.0;
  Vec3 acc{0, 0, 0};
  for (int q = 0; q < fr.size(); ++q) {
    const Vec3& rp = fr.points[q];
    Vec3 x;
    double hk;
    if (dim == 2) {
      x = a + rp[0] * (b - a);
      hk = (k == 0) ? 1.0 - rp[0] : rp[0];
    } else {
      x = a + rp[0] * (b - a) + rp[1] * (cc - a);
      hk = (k == 0) ? (1.0 - rp[0] - rp[1]) : ((k == 1) ? rp[0] : rp[1]);
    }
    acc += (fr.weights[q] / ref_measure * f.measure * hk) * cross(x - G, e);
  }
  return acc;
}

// resultant and moment of the standard tractions of `elem` over its facets
// outside J_e (element side)
void standard_outside_contribution(const Mesh& mesh, const Topology& topo,
                                   const TractionField& std_field, const Selection& sel, int elem,
                                   const Vec3& G, Vec3& force, Vec3& moment) {
  const int d = mesh.dimension;
  force = Vec3{0, 0, 0};
  moment = Vec3{0, 0, 0};
  const QuadRule& fr = facet_rule(d, 4);
  for (int lf = 0; lf <= d; ++lf) {
    int fi = topo.element_facets[elem][lf];
    if (sel.facet_in_zone(fi)) continue;
    const Facet& f = topo.facets[fi];
    double sign = topo.eta_of(fi, elem);
    Vec3 a = mesh.nodes[f.nodes[0]], b = mesh.nodes[f.nodes[1]];
    Vec3 c = (d == 3) ? mesh.nodes[f.nodes[2]] : Vec3{0, 0, 0};
    const double ref_measure = (d == 2) ? 1.0 : 0.5;
    for (int q = 0; q < fr.size(); ++q) {
      const Vec3& rp = fr.points[q];
      Vec3 x;
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
      Vec3 t = h0 * std_field.coeff[fi][0] + h1 * std_field.coeff[fi][1];
      if (d == 3) t += h2 * std_field.coeff[fi][2];
      double w = fr.weights[q] / ref_measure * f.measure * sign;
      force += w * t;
      moment += w * cross(x - G, t);
    }
  }
}

}  // namespace

void assemble_constraints(const Mesh& mesh, const Topology& topo, const Selection& sel,
                          const HRDecomposition& hr, const TractionField& standard_field,
                          const ProblemDef& prob, QPSystem& qp) {
  const int d = mesh.dimension;
  qp.neumann.label = "C";
  qp.neumann.ncols = qp.num_dofs;
  qp.equilibrium_reduced.label = "L";

  // C block: dofwise Neumann pins (boundary facets carry eta = +1, H = 0)
  for (size_t i = 0; i < sel.facets.size(); ++i) {
    const Facet& f = topo.facets[sel.facets[i]];
    if (f.boundary_label < 0) continue;
    auto it = prob.neumann.find(topo.labels[f.boundary_label]);
    if (it == prob.neumann.end()) continue;
    int base = qp.facet_offset.at(sel.facets[i]);
    for (int k = 0; k < d; ++k)
      for (int c = 0; c < d; ++c) {
        double rhs = it->second[c] - hr.H[i][k][c];
        qp.neumann.add_row({{base + d * k + c, 1.0}}, rhs, f.nodes[k]);
      }
  }

  // L block: force and moment balance per element of E_e and of the seam
  ConstraintBlock L;
  L.label = "L";
  L.ncols = qp.num_dofs;
  auto add_element_rows = [&](int e, bool seam) {
    const Vec3 G = mesh.centroid(e);
    const double vol = mesh.measure(e);
    Vec3 rhs_force = -vol * prob.body(e);
    Vec3 rhs_moment{0, 0, 0};  // constant body force: zero moment about G
    if (seam) {
      Vec3 sf, sm;
      standard_outside_contribution(mesh, topo, standard_field, sel, e, G, sf, sm);
      rhs_force = rhs_force - sf;
      rhs_moment = rhs_moment - sm;
    }
    // subtract the H part on zone facets (H = 0 at degree 1, kept for shape)
    // force rows
    for (int c = 0; c < d; ++c) {
      std::vector<std::pair<int, double>> row;
      for (int lf = 0; lf <= d; ++lf) {
        int fi = topo.element_facets[e][lf];
        if (!sel.facet_in_zone(fi)) continue;
        const Facet& f = topo.facets[fi];
        double sign = topo.eta_of(fi, e);
        int base = qp.facet_offset.at(fi);
        for (int k = 0; k < d; ++k) row.emplace_back(base + d * k + c, sign * f.measure / d);
      }
      L.add_row(row, rhs_force[c], e);
    }
    // moment rows: z only in 2D, all three in 3D
    const int m0 = (d == 2) ? 2 : 0;
    for (int mc = m0; mc < 3; ++mc) {
      std::vector<std::pair<int, double>> row;
      for (int lf = 0; lf <= d; ++lf) {
        int fi = topo.element_facets[e][lf];
        if (!sel.facet_in_zone(fi)) continue;
        const Facet& f = topo.facets[fi];
        double sign = topo.eta_of(fi, e);
        int base = qp.facet_offset.at(fi);
        for (int k = 0; k < d; ++k)
          for (int c = 0; c < d; ++c) {
            Vec3 m = facet_moment_coeff(mesh, f, d, k, c, G);
            double v = sign * m[mc];
            if (v != 0.0) row.emplace_back(base + d * k + c, v);
          }
      }
      L.add_row(row, rhs_moment[mc], e);
    }
  };

  for (int e : sel.elements) add_element_rows(e, false);
  for (int e : sel.seam_elements) add_element_rows(e, true);
  qp.equilibrium_rows_before = L.num_rows();
  qp.equilibrium_reduced = eliminate_redundant_rows(L, 1e-10, qp.neumann);
}

EnhancedResult solve_enhanced(const QPSystem& qp, const TractionField& standard_field) {
  EnhancedResult out;
  out.hr.facets = qp.selection.facets;
  if (qp.selection.empty()) {
    out.field = standard_field;
    return out;
  }

  std::vector<ConstraintBlock> blocks;
  if (qp.neumann.num_rows() > 0) blocks.push_back(qp.neumann);
  if (qp.equilibrium_reduced.num_rows() > 0) blocks.push_back(qp.equilibrium_reduced);
  SaddleResult res = solve_saddle(qp.A, qp.B, blocks);
  out.ridge_used = res.ridge_used;

  out.field = standard_field;
  out.field.provenance = TractionField::Provenance::Enhanced;
  const int d = (qp.dofs_per_facet == 4) ? 2 : 3;
  out.hr.H.assign(qp.selection.facets.size(), {Vec3{0, 0, 0}, Vec3{0, 0, 0}, Vec3{0, 0, 0}});
  out.hr.R.assign(qp.selection.facets.size(), {Vec3{0, 0, 0}, Vec3{0, 0, 0}, Vec3{0, 0, 0}});
  for (size_t i = 0; i < qp.selection.facets.size(); ++i) {
    int fi = qp.selection.facets[i];
    int base = qp.facet_offset.at(fi);
    for (int k = 0; k < d; ++k)
      for (int c = 0; c < d; ++c) {
        out.hr.R[i][k][c] = res.primal[base + d * k + c];
        out.field.coeff[fi][k][c] = out.hr.H[i][k][c] + out.hr.R[i][k][c];
      }
  }
  return out;
}

EnhancedResult build_enhanced_tractions(const Mesh& mesh, const Topology& topo,
                                        const ProblemDef& prob, const FESolution& fe,
                                        const TractionField& standard_field, const Selection& sel,
                                        int threads) {
  HRDecomposition hr = compute_H(sel, fe);
  if (sel.empty()) {
    EnhancedResult out;
    out.field = standard_field;
    out.hr = hr;
    return out;
  }
  auto ops = build_local_operators(mesh, topo, sel, fe, prob.material, threads);
  QPSystem qp = assemble_qp(mesh, topo, sel, hr, fe, prob.material, ops);
  assemble_constraints(mesh, topo, sel, hr, standard_field, prob, qp);
  return solve_enhanced(qp, standard_field);
}

}  // namespace eespt
