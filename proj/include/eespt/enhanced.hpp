#pragma once

#include <map>
#include <string>
#include <vector>

#include "eespt/estimator.hpp"
#include "eespt/tractions.hpp"

namespace eespt {

enum class Criterion { Radius, Edge, Area, Estimate };

Criterion criterion_from_name(const std::string& name);
std::string criterion_name(Criterion c);

struct SelectionMode {
  bool fraction = false;
  double value = 0.0;  // threshold or fraction share

  static SelectionMode by_threshold(double t) { return {false, t}; }
  static SelectionMode by_fraction(double f) { return {true, f}; }
};

// Zone selected for the enhanced construction. After the structural closure
// every non-selected element touches at most one facet of J_e.
struct Selection {
  std::vector<int> elements;       // E_e, sorted
  std::vector<int> facets;         // J_e: all facets of E_e elements, sorted
  std::vector<int> seam_elements;  // E_bar \ E_e, sorted
  Criterion criterion = Criterion::Radius;
  SelectionMode mode;

  bool empty() const { return elements.empty(); }
  bool is_selected(int elem) const;
  bool facet_in_zone(int facet) const;
};

Selection select_elements(const Mesh& mesh, const Topology& topo, Criterion criterion,
                          SelectionMode mode, const QualityMetrics& metrics,
                          const std::vector<double>* contributions);

// H part of the H/R traction split on the selected facets. At degree 1 the
// facet space holds only vertex functions, which forces H = 0; the operation
// asserts that identity and leaves the general-degree path unimplemented.
struct HRDecomposition {
  std::vector<int> facets;                 // same order as Selection::facets
  std::vector<std::array<Vec3, 3>> H;
  std::vector<std::array<Vec3, 3>> R;
};

HRDecomposition compute_H(const Selection& sel, const FESolution& fe);

struct QPSystem {
  Selection selection;
  std::map<int, int> facet_offset;  // facet id -> first dof index
  int dofs_per_facet = 0;
  int num_dofs = 0;
  SparseSymmetric A{0};
  VecX B;
  ConstraintBlock neumann;              // "C"
  ConstraintBlock equilibrium_reduced;  // "L" after redundancy elimination
  int equilibrium_rows_before = 0;
};

// Local stress operators of the selected elements (each element's facets in
// local order), built in parallel.
std::map<int, StressOperator> build_local_operators(const Mesh& mesh, const Topology& topo,
                                                    const Selection& sel, const FESolution& fe,
                                                    const Material& mat, int threads = 1);

QPSystem assemble_qp(const Mesh& mesh, const Topology& topo, const Selection& sel,
                     const HRDecomposition& hr, const FESolution& fe, const Material& mat,
                     const std::map<int, StressOperator>& operators);

// Constraint blocks: Neumann pins on J_e facets of the loaded boundary, and
// force/moment equilibrium rows per element of E_e and of the seam (standard
// tractions on facets outside J_e moved to the right-hand side).
void assemble_constraints(const Mesh& mesh, const Topology& topo, const Selection& sel,
                          const HRDecomposition& hr, const TractionField& standard_field,
                          const ProblemDef& prob, QPSystem& qp);

struct EnhancedResult {
  TractionField field;  // standard outside J_e, optimized inside
  HRDecomposition hr;
  bool ridge_used = false;
};

EnhancedResult solve_enhanced(const QPSystem& qp, const TractionField& standard_field);

// Convenience pipeline: select, build operators, assemble, solve.
EnhancedResult build_enhanced_tractions(const Mesh& mesh, const Topology& topo,
                                        const ProblemDef& prob, const FESolution& fe,
                                        const TractionField& standard_field, const Selection& sel,
                                        int threads = 1);

}  // namespace eespt
