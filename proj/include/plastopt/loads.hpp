#pragma once

#include <functional>
#include <string>
#include <vector>

#include "plastopt/mesh.hpp"

namespace plastopt {

using SpaceTimeFn = std::function<void(double t, double x, double y, double out[2])>;
using SpaceFn = std::function<void(double x, double y, double out[2])>;

// Body force f, traction g on the Neumann part, Dirichlet displacement w,
// all vanishing at t = 0, over the horizon [0, T].
struct LoadProgram {
  SpaceTimeFn f;
  SpaceTimeFn g;
  SpaceTimeFn w;
  double T = 1.0;
};

// The three loads frozen at one time node.
struct StepLoads {
  SpaceFn f;
  SpaceFn g;
  SpaceFn w;
};

StepLoads sample_loads(const LoadProgram& loads, double t);

// Checks f(0)=g(0)=w(0)=0 by sampling every node, and T > 0.
std::vector<std::string> validate_loads(const LoadProgram& loads, const Mesh& mesh);

struct TimeGrid {
  int k = 1;
  double T = 1.0;
  double tau() const { return T / k; }
  double node(int i) const { return i * T / k; }
};

}  // namespace plastopt
