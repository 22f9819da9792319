#include "plastopt/fields.hpp"

namespace plastopt {

double l2_norm(const NodalVectorField& u) {
  const Mesh& m = *u.mesh();
  const double w = m.cell_weight();
  double acc = 0.0;
  for (int cell = 0; cell < m.n_cells(); ++cell)
    for (int q = 0; q < 4; ++q) {
      double val[2];
      u.value_at_quad(cell, q, val);
      acc += w * (val[0] * val[0] + val[1] * val[1]);
    }
  return std::sqrt(acc);
}

double h1_norm(const NodalVectorField& u) {
  const Mesh& m = *u.mesh();
  const auto& t = m.tables;
  const double w = m.cell_weight();
  double acc = 0.0;
  for (int cell = 0; cell < m.n_cells(); ++cell) {
    const auto& cn = m.cells[cell];
    for (int q = 0; q < 4; ++q) {
      double val[2] = {0.0, 0.0};
      double g[4] = {0.0, 0.0, 0.0, 0.0};
      for (int a = 0; a < 4; ++a) {
        const double u0 = u.data()[2 * cn[a]], u1 = u.data()[2 * cn[a] + 1];
        val[0] += t.value[q][a] * u0;
        val[1] += t.value[q][a] * u1;
        g[0] += t.grad_x[q][a] * u0;
        g[1] += t.grad_y[q][a] * u0;
        g[2] += t.grad_x[q][a] * u1;
        g[3] += t.grad_y[q][a] * u1;
      }
      acc += w * (val[0] * val[0] + val[1] * val[1] + g[0] * g[0] + g[1] * g[1] + g[2] * g[2] +
                  g[3] * g[3]);
    }
  }
  return std::sqrt(acc);
}

double l2_norm(const NodalScalarField& f) {
  const Mesh& m = *f.mesh();
  const double w = m.cell_weight();
  double acc = 0.0;
  for (int cell = 0; cell < m.n_cells(); ++cell)
    for (int q = 0; q < 4; ++q) {
      const double v = f.at_quad(cell, q);
      acc += w * v * v;
    }
  return std::sqrt(acc);
}

double h1_norm(const NodalScalarField& f) {
  const Mesh& m = *f.mesh();
  const auto& t = m.tables;
  const double w = m.cell_weight();
  double acc = 0.0;
  for (int cell = 0; cell < m.n_cells(); ++cell) {
    const auto& cn = m.cells[cell];
    for (int q = 0; q < 4; ++q) {
      double val = 0.0, gx = 0.0, gy = 0.0;
      for (int a = 0; a < 4; ++a) {
        val += t.value[q][a] * f[cn[a]];
        gx += t.grad_x[q][a] * f[cn[a]];
        gy += t.grad_y[q][a] * f[cn[a]];
      }
      acc += w * (val * val + gx * gx + gy * gy);
    }
  }
  return std::sqrt(acc);
}

double l2_norm(const QuadField<SymTensor>& f) {
  const double w = f.mesh()->cell_weight();
  double acc = 0.0;
  for (int k = 0; k < f.size(); ++k) acc += w * contract(f.flat(k), f.flat(k));
  return std::sqrt(acc);
}

double l2_norm(const QuadField<DevTensor>& f) {
  const double w = f.mesh()->cell_weight();
  double acc = 0.0;
  for (int k = 0; k < f.size(); ++k) acc += w * contract(f.flat(k), f.flat(k));
  return std::sqrt(acc);
}

}  // namespace plastopt
