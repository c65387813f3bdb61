#include "eespt/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace eespt {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string token;
  for (char ch : s) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!token.empty()) out.push_back(token);
      token.clear();
    } else {
      token += ch;
    }
  }
  if (!token.empty()) out.push_back(token);
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    size_t pos;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid number '" + s + "' for " + what);
  }
}

DirichletBC parse_dirichlet(const std::string& value, const std::string& label) {
  DirichletBC bc;
  auto tokens = split_list(value);
  if (tokens.empty()) throw ConfigError("empty Dirichlet spec for label " + label);
  bool named = value.find(':') != std::string::npos;
  if (named) {
    for (const auto& t : tokens) {
      auto pos = t.find(':');
      if (pos == std::string::npos)
        throw ConfigError("mixed Dirichlet spec for label " + label);
      std::string comp = t.substr(0, pos);
      double v = to_double(t.substr(pos + 1), "Dirichlet value");
      if (comp == "ux" || comp == "x") bc.component[0] = v;
      else if (comp == "uy" || comp == "y") bc.component[1] = v;
      else if (comp == "uz" || comp == "z") bc.component[2] = v;
      else throw ConfigError("unknown displacement component '" + comp + "'");
    }
  } else {
    for (size_t i = 0; i < tokens.size() && i < 3; ++i)
      bc.component[i] = to_double(tokens[i], "Dirichlet value");
  }
  return bc;
}

Vec3 parse_vec(const std::string& value, const std::string& what) {
  auto tokens = split_list(value);
  Vec3 v{0, 0, 0};
  if (tokens.empty() || tokens.size() > 3) throw ConfigError("expected 1-3 numbers for " + what);
  for (size_t i = 0; i < tokens.size(); ++i) v[i] = to_double(tokens[i], what);
  return v;
}

}  // namespace

void CaseConfig::validate() const {
  int sources = (!case_name.empty()) + (!mesh_file.empty()) + (!generator.empty());
  if (sources != 1)
    throw ConfigError("exactly one mesh source required ([case] name, [mesh] file or generator)");
  if (case_name.empty() && !has_bc)
    throw ConfigError("boundary conditions required unless a bundled case is used");
  if (estimator.method != "standard" && estimator.method != "enhanced")
    throw ConfigError("estimator method must be 'standard' or 'enhanced'");
  for (double f : estimator.fractions)
    if (f < 0.0 || f > 1.0) throw ConfigError("fractions must lie in [0, 1]");
  if (estimator.ref_levels < 0) throw ConfigError("ref_levels must be >= 0");
}

CaseConfig parse_config_text(const std::string& text, const std::string& origin) {
  CaseConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));

    if (section == "case") {
      if (key == "name") cfg.case_name = value;
      else cfg.case_params[key] = value;
    } else if (section == "mesh") {
      if (key == "file") cfg.mesh_file = value;
      else if (key == "generator") cfg.generator = value;
      else cfg.generator_params[key] = value;
    } else if (section == "material") {
      cfg.has_material = true;
      if (key == "young") cfg.material.young = to_double(value, "young");
      else if (key == "poisson") cfg.material.poisson = to_double(value, "poisson");
      else if (key == "mode") {
        if (value == "plane_stress") cfg.material.mode = MaterialMode::PlaneStress;
        else if (value == "solid") cfg.material.mode = MaterialMode::Solid3D;
        else throw ConfigError("material mode must be plane_stress or solid");
      } else
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown material key " + key);
    } else if (section == "dirichlet") {
      cfg.has_bc = true;
      cfg.dirichlet[key] = parse_dirichlet(value, key);
    } else if (section == "neumann") {
      cfg.has_bc = true;
      cfg.neumann[key] = parse_vec(value, "traction " + key);
    } else if (section == "body_force") {
      if (key == "value") cfg.body_force = parse_vec(value, "body force");
      else throw ConfigError("unknown body_force key " + key);
    } else if (section == "estimator") {
      if (key == "method") cfg.estimator.method = value;
      else if (key == "criterion" || key == "criteria") cfg.estimator.criteria = split_list(value);
      else if (key == "fractions") {
        cfg.estimator.fractions.clear();
        for (const auto& t : split_list(value))
          cfg.estimator.fractions.push_back(to_double(t, "fraction"));
      } else if (key == "thresholds") {
        cfg.estimator.thresholds.clear();
        for (const auto& t : split_list(value))
          cfg.estimator.thresholds.push_back(to_double(t, "threshold"));
      } else if (key == "ref_levels") {
        cfg.estimator.ref_levels = static_cast<int>(to_double(value, "ref_levels"));
      } else if (key == "threads") {
        cfg.estimator.threads = static_cast<int>(to_double(value, "threads"));
      } else
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown estimator key " + key);
    } else if (section == "output") {
      if (key == "dir") cfg.out_dir = value;
      else throw ConfigError("unknown output key " + key);
    } else {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown section [" + section +
                        "]");
    }
  }
  return cfg;
}

CaseConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

}  // namespace eespt
