#pragma once

#include <map>
#include <string>
#include <vector>

#include "eespt/local_solver.hpp"
#include "eespt/tractions.hpp"

namespace eespt {

// Statically admissible stress recovered elementwise from equilibrated
// tractions (degree p+3 local Neumann solves).
struct AdmissibleStress {
  std::string provenance;  // "standard" or "enhanced(<criterion>, ...)"
  std::vector<ElementStress> stress;
  std::vector<double> weak_residual;  // per element, max over the local test basis
};

AdmissibleStress recover_admissible_stress(const Mesh& mesh, const Topology& topo,
                                           const TractionField& tractions,
                                           const ProblemDef& prob, int threads = 1,
                                           int extra_degree = 3);

struct ErrorReport {
  std::string method;  // standard | enhanced
  double theta = 0.0;
  std::vector<double> element_contribution;  // theta_E, theta^2 = sum theta_E^2
  std::vector<double> element_density;       // theta_E^2 / |E|
  double reference = -1.0;                   // < 0 when absent
  double effectivity = -1.0;
  std::map<std::string, double> timings_s;   // wall-clock per phase
  bool ridge_used = false;
};

// Constitutive relation error of (u_h, sigma_hat): theta and per element
// contributions by exact quadrature.
ErrorReport cre_estimate(const Mesh& mesh, const AdmissibleStress& admissible,
                         const FESolution& fe, const Material& mat);

double effectivity(double theta, double reference_error);

// theta_E^2 / max theta_E^2, in [0, 1], at least one entry equal to 1.
std::vector<double> estimate_ratio(const std::vector<double>& contributions);

struct EfficiencyFactor {
  double g_eta = 0.0;
  double l_t = 0.0;
  double value = 0.0;  // g_eta / l_t
};

EfficiencyFactor efficiency_factor(double eta, double eta_std, double t, double t_std);

// Energy norm of a polynomial admissible stress field.
double energy_norm_sigma_poly(const Mesh& mesh, const Material& mat,
                              const AdmissibleStress& admissible);

}  // namespace eespt
