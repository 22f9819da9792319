#include "plastopt/loads.hpp"

#include <cmath>

namespace plastopt {

StepLoads sample_loads(const LoadProgram& loads, double t) {
  StepLoads out;
  out.f = [fn = loads.f, t](double x, double y, double* v) { fn(t, x, y, v); };
  out.g = [fn = loads.g, t](double x, double y, double* v) { fn(t, x, y, v); };
  out.w = [fn = loads.w, t](double x, double y, double* v) { fn(t, x, y, v); };
  return out;
}

std::vector<std::string> validate_loads(const LoadProgram& loads, const Mesh& mesh) {
  std::vector<std::string> out;
  if (!(loads.T > 0.0)) out.push_back("load horizon T must be positive");
  if (!loads.f || !loads.g || !loads.w) {
    out.push_back("all three loads (f, g, w) must be set");
    return out;
  }
  bool f_bad = false, g_bad = false, w_bad = false;
  for (const auto& node : mesh.nodes) {
    double v[2];
    loads.f(0.0, node[0], node[1], v);
    f_bad = f_bad || v[0] != 0.0 || v[1] != 0.0 || !std::isfinite(v[0]) || !std::isfinite(v[1]);
    loads.g(0.0, node[0], node[1], v);
    g_bad = g_bad || v[0] != 0.0 || v[1] != 0.0 || !std::isfinite(v[0]) || !std::isfinite(v[1]);
    loads.w(0.0, node[0], node[1], v);
    w_bad = w_bad || v[0] != 0.0 || v[1] != 0.0 || !std::isfinite(v[0]) || !std::isfinite(v[1]);
  }
  if (f_bad) out.push_back("body force must vanish at t = 0");
  if (g_bad) out.push_back("traction must vanish at t = 0");
  if (w_bad) out.push_back("Dirichlet displacement must vanish at t = 0");
  return out;
}

}  // namespace plastopt
