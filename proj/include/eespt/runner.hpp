#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eespt/cases.hpp"
#include "eespt/config.hpp"
#include "eespt/enhanced.hpp"
#include "eespt/estimator.hpp"

namespace eespt {

// A fully materialized run: mesh, topology, loading and options.
struct RunCase {
  std::string name;
  Mesh mesh;
  Topology topo;
  ProblemDef problem;
  EstimatorOptions options;
  std::string out_dir;
};

RunCase materialize(const CaseConfig& cfg);

struct EstimateArtifacts {
  TractionField field;
  AdmissibleStress admissible;
  ErrorReport report;
  std::optional<Selection> selection;
  double construction_seconds = 0.0;  // traction construction (patches [+ QP])
  double recovery_seconds = 0.0;      // local recovery + CRE integration
  double total_seconds() const { return construction_seconds + recovery_seconds; }
};

EstimateArtifacts estimate_standard(const Mesh& mesh, const Topology& topo,
                                    const ProblemDef& prob, const FESolution& fe, int threads);

EstimateArtifacts estimate_enhanced(const Mesh& mesh, const Topology& topo,
                                    const ProblemDef& prob, const FESolution& fe,
                                    const TractionField& standard_field, const Selection& sel,
                                    int threads);

// Reference solve on a nested uniform refinement.
struct ReferenceArtifacts {
  Mesh fine;
  FESolution fe_fine;
  ReferenceError error;
  double seconds = 0.0;
};

ReferenceArtifacts compute_reference(const Mesh& mesh, const Topology& topo,
                                     const ProblemDef& prob, const FESolution& fe, int levels);

struct SweepRow {
  std::string criterion;
  double threshold = 0.0;  // fraction in fraction sweeps, sentinel on the baseline row
  int n_selected = 0;
  double theta = 0.0;
  double eta = -1.0;
  double cpu_seconds = 0.0;
  double normalized_cpu = 1.0;
  double g_eta = 0.0;
  double l_t = 0.0;
  double efficiency = 0.0;
};

// CLI entry points; each writes its artifacts under run.out_dir.
FESolution run_solve(const RunCase& run);
ErrorReport run_estimate(const RunCase& run);
std::vector<SweepRow> run_sweep(const RunCase& run);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace eespt
