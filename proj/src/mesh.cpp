#include "plastopt/mesh.hpp"

#include <cmath>
#include <string>

#include "plastopt/errors.hpp"

namespace plastopt {

namespace {

constexpr double kGauss = 0.5773502691896257645091488;  // 1/sqrt(3)
constexpr double kRefXi[4] = {-kGauss, kGauss, -kGauss, kGauss};
constexpr double kRefEta[4] = {-kGauss, -kGauss, kGauss, kGauss};

const char* side_name(Side s) {
  switch (s) {
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::bottom: return "bottom";
    case Side::top: return "top";
  }
  return "?";
}

}  // namespace

std::array<double, 2> Mesh::quad_point(int cell, int q) const {
  const int ci = cell % nx;
  const int cj = cell / nx;
  const double x0 = ci * hx, y0 = cj * hy;
  return {x0 + 0.5 * hx * (1.0 + kRefXi[q]), y0 + 0.5 * hy * (1.0 + kRefEta[q])};
}

Mesh build_rect_mesh(int nx, int ny, double Lx, double Ly, const std::vector<TagRule>& rules) {
  std::vector<std::string> violations;
  if (nx < 1 || ny < 1) violations.push_back("mesh resolution must be at least 1x1");
  if (!(Lx > 0.0) || !(Ly > 0.0)) violations.push_back("mesh extents must be positive");
  if (!violations.empty()) throw ConfigError(violations);

  Mesh m;
  m.nx = nx;
  m.ny = ny;
  m.Lx = Lx;
  m.Ly = Ly;
  m.hx = Lx / nx;
  m.hy = Ly / ny;

  m.nodes.resize((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) m.nodes[m.node_id(i, j)] = {i * m.hx, j * m.hy};

  m.cells.resize(nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      m.cells[j * nx + i] = {m.node_id(i, j), m.node_id(i + 1, j), m.node_id(i + 1, j + 1),
                             m.node_id(i, j + 1)};

  auto add_facet = [&m](int a, int b, int cell, Side side, double measure, double nx_, double ny_) {
    BoundaryFacet f;
    f.a = a;
    f.b = b;
    f.cell = cell;
    f.side = side;
    f.measure = measure;
    f.normal = {nx_, ny_};
    m.facets.push_back(f);
  };
  for (int i = 0; i < nx; ++i) {
    add_facet(m.node_id(i, 0), m.node_id(i + 1, 0), i, Side::bottom, m.hx, 0.0, -1.0);
    add_facet(m.node_id(i, ny), m.node_id(i + 1, ny), (ny - 1) * nx + i, Side::top, m.hx, 0.0, 1.0);
  }
  for (int j = 0; j < ny; ++j) {
    add_facet(m.node_id(0, j), m.node_id(0, j + 1), j * nx, Side::left, m.hy, -1.0, 0.0);
    add_facet(m.node_id(nx, j), m.node_id(nx, j + 1), j * nx + nx - 1, Side::right, m.hy, 1.0,
              0.0);
  }

  for (size_t r = 0; r < rules.size(); ++r) {
    const TagRule& rule = rules[r];
    int hits = 0;
    for (BoundaryFacet& f : m.facets) {
      if (f.side != rule.side) continue;
      const bool along_x = rule.side == Side::bottom || rule.side == Side::top;
      const double mid = along_x ? 0.5 * (m.nodes[f.a][0] + m.nodes[f.b][0])
                                 : 0.5 * (m.nodes[f.a][1] + m.nodes[f.b][1]);
      const double eps = 1e-12 * std::max(Lx, Ly);
      if (mid < rule.lo - eps || mid > rule.hi + eps) continue;
      if (f.tag != FacetTag::free) {
        violations.push_back("boundary rule " + std::to_string(r) + " (" + side_name(rule.side) +
                             " side) re-tags a facet already claimed by an earlier rule");
        continue;
      }
      f.tag = rule.tag;
      ++hits;
    }
    if (hits == 0)
      violations.push_back("boundary rule " + std::to_string(r) + " (" + side_name(rule.side) +
                           " side, range [" + std::to_string(rule.lo) + ", " +
                           std::to_string(rule.hi) + "]) covers no facet");
  }

  m.dirichlet_node.assign(m.n_nodes(), 0);
  bool any_dirichlet = false;
  for (const BoundaryFacet& f : m.facets)
    if (f.tag == FacetTag::dirichlet) {
      any_dirichlet = true;
      m.dirichlet_node[f.a] = 1;
      m.dirichlet_node[f.b] = 1;
    }
  if (!any_dirichlet)
    violations.push_back("the Dirichlet part of the boundary is empty; at least one facet must "
                         "be clamped");
  if (!violations.empty()) throw ConfigError(violations);

  for (int q = 0; q < 4; ++q) {
    const double xi = kRefXi[q], eta = kRefEta[q];
    const double nv[4] = {0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
                          0.25 * (1 + xi) * (1 + eta), 0.25 * (1 - xi) * (1 + eta)};
    const double dxi[4] = {-0.25 * (1 - eta), 0.25 * (1 - eta), 0.25 * (1 + eta),
                           -0.25 * (1 + eta)};
    const double deta[4] = {-0.25 * (1 - xi), -0.25 * (1 + xi), 0.25 * (1 + xi),
                            0.25 * (1 - xi)};
    for (int a = 0; a < 4; ++a) {
      m.tables.value[q][a] = nv[a];
      m.tables.grad_x[q][a] = dxi[a] * 2.0 / m.hx;
      m.tables.grad_y[q][a] = deta[a] * 2.0 / m.hy;
    }
    // Close the partition of unity and the zero row sums of the gradients in
    // the accumulation order of at_quad, so constant fields interpolate
    // bitwise with an exactly vanishing gradient. Keeps z in {0,1} an exact
    // critical set of the double well.
    m.tables.value[q][3] =
        1.0 - ((m.tables.value[q][0] + m.tables.value[q][1]) + m.tables.value[q][2]);
    m.tables.grad_x[q][3] =
        -((m.tables.grad_x[q][0] + m.tables.grad_x[q][1]) + m.tables.grad_x[q][2]);
    m.tables.grad_y[q][3] =
        -((m.tables.grad_y[q][0] + m.tables.grad_y[q][1]) + m.tables.grad_y[q][2]);
  }
  return m;
}

}  // namespace plastopt
