#pragma once

#include <map>
#include <string>
#include <vector>

#include "eespt/elasticity.hpp"

namespace eespt {

struct EstimatorOptions {
  std::string method = "standard";  // standard | enhanced
  std::vector<std::string> criteria = {"estimate"};
  std::vector<double> fractions;   // selection by worst fraction
  std::vector<double> thresholds;  // or by criterion threshold
  int ref_levels = 2;
  int threads = 0;  // 0 = hardware
};

struct CaseConfig {
  // exactly one mesh source: bundled case, mesh file, or generator
  std::string case_name;
  std::map<std::string, std::string> case_params;
  std::string mesh_file;
  std::string generator;  // rectangle | box
  std::map<std::string, std::string> generator_params;

  bool has_material = false;
  Material material;
  std::map<std::string, DirichletBC> dirichlet;
  std::map<std::string, Vec3> neumann;
  bool has_bc = false;
  Vec3 body_force{0, 0, 0};

  EstimatorOptions estimator;
  std::string out_dir = "out";

  void validate() const;
};

CaseConfig load_config(const std::string& path);
CaseConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");

}  // namespace eespt
