#pragma once

#include <string>
#include <vector>

#include "plastopt/expr.hpp"
#include "plastopt/lab.hpp"

namespace plastopt {

struct MeshConfig {
  int nx = 0, ny = 0;
  double Lx = 0.0, Ly = 0.0;
  std::vector<TagRule> boundary;
};

// Parameters of the batch studies; each study reads only its own fields.
struct LabConfig {
  std::string study;
  std::vector<double> gammas{10.0, 100.0, 1000.0, 10000.0};
  std::vector<int> ks{4, 8, 16, 32};
  std::vector<double> deltas{0.2, 0.1, 0.05};
  std::vector<double> sizes{1e-1, 1e-2, 1e-3, 1e-4};
  int cells = 200;
  double length = 1.0;
};

// One self-contained run description; everything else is derived from it.
struct RunConfig {
  MeshConfig mesh;
  MaterialLaw law;
  Expr fx, fy;  // body force components, expressions in x, y, t
  Expr gx, gy;  // boundary traction
  Expr wx, wy;  // Dirichlet displacement
  double T = 1.0;
  int k = 4;
  RegularizationParam gamma{100.0};
  double delta = 0.1;
  Expr z0;  // initial phase, expression in x and y
  OptimizerConfig optimizer;
  std::vector<double> gamma_schedule;  // empty: single stage at `gamma`
  LabConfig lab;
  unsigned long long seed = 0;
  std::string output = "out";
};

// Parses and validates; throws ConfigError carrying every violation found,
// not just the first. Defaults are documented in the README schema table.
RunConfig parse_config_text(const std::string& text, const std::string& origin);
RunConfig parse_config(const std::string& path);

Mesh build_mesh(const MeshConfig& mc);
LoadProgram make_loads(const RunConfig& cfg);
NodalScalarField initial_phase(const Mesh& mesh, const RunConfig& cfg);

}  // namespace plastopt
