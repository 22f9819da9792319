#include "plastopt/assembly.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

#include "plastopt/dissipation.hpp"
#include "plastopt/errors.hpp"
#include "plastopt/threading.hpp"

namespace plastopt {

namespace {

constexpr double kGauss = 0.5773502691896257645091488;

// Strain of the Q1 basis function (local node a, component c) at Gauss point q,
// in orthonormal sym_basis coordinates.
void basis_strain_coords(const Mesh& mesh, int q, int a, int c, double out[3]) {
  const auto& t = mesh.tables;
  double g[4] = {0.0, 0.0, 0.0, 0.0};
  g[2 * c] = t.grad_x[q][a];
  g[2 * c + 1] = t.grad_y[q][a];
  sym_coords(symmetrize(2, g), out);
}

}  // namespace

void zero_dirichlet(const Mesh& mesh, Vector& v) {
  for (int node = 0; node < mesh.n_nodes(); ++node)
    if (mesh.dirichlet_node[node]) v[2 * node] = v[2 * node + 1] = 0.0;
}

CondensedState condense_state(const Mesh& mesh, const NodalScalarField& z,
                              const QuadField<DevTensor>& p_prev, RegularizationParam gamma,
                              const MaterialLaw& law, const NodalVectorField& u,
                              bool want_tangent) {
  CondensedState out;
  out.p = dev_quadfield(mesh);
  out.sigma = sym_quadfield(mesh);
  if (want_tangent) out.points.resize(4 * mesh.n_cells());

  const int n_cells = mesh.n_cells();
  std::atomic<int> failed_point{-1};

  const auto run_cell = [&](int cell) {
    for (int q = 0; q < 4; ++q) {
      try {
        LocalPlasticContext ctx{z.at_quad(cell, q), gamma, p_prev.at(cell, q), &law};
        const SymTensor E = u.strain_at_quad(cell, q);
        if (want_tangent) {
          CondensedPoint cp = condense_point(ctx, E);
          out.p.at(cell, q) = cp.p;
          out.sigma.at(cell, q) = cp.sigma;
          out.points[4 * cell + q] = cp;
        } else if (gamma.finite()) {
          const double mu = coeff(law, Coeff::mu, ctx.z);
          const DevTensor p = F_inverse(ctx, (2.0 * mu) * dev_project(E));
          out.p.at(cell, q) = p;
          out.sigma.at(cell, q) = elasticity_apply(law, ctx.z, E) - (2.0 * mu) * p.sym();
        } else {
          const ReturnMapResult rr = radial_return(ctx.z, law, ctx.P, E);
          out.p.at(cell, q) = rr.p;
          out.sigma.at(cell, q) = rr.sigma;
        }
      } catch (const NewtonDivergence&) {
        int expected = -1;
        failed_point.compare_exchange_strong(expected, 4 * cell + q);
      }
    }
  };

  if (exec_mode() == ExecMode::parallel) {
#pragma omp parallel for schedule(static)
    for (int cell = 0; cell < n_cells; ++cell) run_cell(cell);
  } else {
    for (int cell = 0; cell < n_cells; ++cell) run_cell(cell);
  }
  if (failed_point.load() >= 0)
    throw NewtonDivergence("pointwise plastic solve failed at quadrature point " +
                               std::to_string(failed_point.load()),
                           0, 0.0);
  return out;
}

Vector assemble_stress_divergence(const Mesh& mesh, const QuadField<SymTensor>& sigma) {
  if (sigma.mesh() != &mesh) throw std::invalid_argument("field assembled on a different mesh");
  Vector out = Vector::Zero(2 * mesh.n_nodes());
  const double w = mesh.cell_weight();
  double bc[4][8][3];  // uniform mesh: basis strains do not depend on the cell
  for (int q = 0; q < 4; ++q)
    for (int a = 0; a < 4; ++a)
      for (int c = 0; c < 2; ++c) basis_strain_coords(mesh, q, a, c, bc[q][2 * a + c]);
  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    const auto& cn = mesh.cells[cell];
    for (int q = 0; q < 4; ++q) {
      double sc[3];
      sym_coords(sigma.at(cell, q), sc);
      for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 2; ++c) {
          const double* b = bc[q][2 * a + c];
          out[2 * cn[a] + c] += w * (sc[0] * b[0] + sc[1] * b[1] + sc[2] * b[2]);
        }
    }
  }
  return out;
}

Vector assemble_body_load(const Mesh& mesh, const QuadField<double>& weight, const SpaceFn& f) {
  Vector out = Vector::Zero(2 * mesh.n_nodes());
  const double w = mesh.cell_weight();
  const auto& t = mesh.tables;
  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    const auto& cn = mesh.cells[cell];
    for (int q = 0; q < 4; ++q) {
      const auto xq = mesh.quad_point(cell, q);
      double fv[2];
      f(xq[0], xq[1], fv);
      const double s = w * weight.at(cell, q);
      for (int a = 0; a < 4; ++a) {
        out[2 * cn[a]] += s * t.value[q][a] * fv[0];
        out[2 * cn[a] + 1] += s * t.value[q][a] * fv[1];
      }
    }
  }
  return out;
}

Vector assemble_boundary_load(const Mesh& mesh, const SpaceFn& g) {
  Vector out = Vector::Zero(2 * mesh.n_nodes());
  for (const BoundaryFacet& f : mesh.facets) {
    if (f.tag != FacetTag::neumann) continue;
    const auto& pa = mesh.nodes[f.a];
    const auto& pb = mesh.nodes[f.b];
    for (int q = 0; q < 2; ++q) {
      const double s = q == 0 ? -kGauss : kGauss;
      const double xg = 0.5 * (pa[0] + pb[0]) + 0.5 * s * (pb[0] - pa[0]);
      const double yg = 0.5 * (pa[1] + pb[1]) + 0.5 * s * (pb[1] - pa[1]);
      double gv[2];
      g(xg, yg, gv);
      const double wq = 0.5 * f.measure;
      const double na = 0.5 * (1.0 - s), nb = 0.5 * (1.0 + s);
      out[2 * f.a] += wq * na * gv[0];
      out[2 * f.a + 1] += wq * na * gv[1];
      out[2 * f.b] += wq * nb * gv[0];
      out[2 * f.b + 1] += wq * nb * gv[1];
    }
  }
  return out;
}

SparseMat assemble_tangent_matrix(const Mesh& mesh, const std::vector<CondensedPoint>& points) {
  const int n_cells = mesh.n_cells();
  const double w = mesh.cell_weight();

  double bc[4][8][3];
  for (int q = 0; q < 4; ++q)
    for (int a = 0; a < 4; ++a)
      for (int c = 0; c < 2; ++c) basis_strain_coords(mesh, q, a, c, bc[q][2 * a + c]);

  // Per-cell 8x8 blocks first (parallel), then a serial scatter in cell order
  // so the result is bit-identical for any thread count.
  std::vector<std::array<double, 64>> local(n_cells);
  const auto run_cell = [&](int cell) {
    std::array<double, 64>& L = local[cell];
    L.fill(0.0);
    for (int q = 0; q < 4; ++q) {
      const CondensedPoint& cp = points[4 * cell + q];
      double kb[8][3];  // K . strain coords per column dof
      for (int col = 0; col < 8; ++col)
        for (int r = 0; r < 3; ++r)
          kb[col][r] = cp.K[r * 3] * bc[q][col][0] + cp.K[r * 3 + 1] * bc[q][col][1] +
                       cp.K[r * 3 + 2] * bc[q][col][2];
      for (int row = 0; row < 8; ++row)
        for (int col = 0; col < 8; ++col)
          L[8 * row + col] += w * (bc[q][row][0] * kb[col][0] + bc[q][row][1] * kb[col][1] +
                                   bc[q][row][2] * kb[col][2]);
    }
  };
  if (exec_mode() == ExecMode::parallel) {
#pragma omp parallel for schedule(static)
    for (int cell = 0; cell < n_cells; ++cell) run_cell(cell);
  } else {
    for (int cell = 0; cell < n_cells; ++cell) run_cell(cell);
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(64 * n_cells + 2 * mesh.n_nodes());
  for (int cell = 0; cell < n_cells; ++cell) {
    const auto& cn = mesh.cells[cell];
    for (int ra = 0; ra < 4; ++ra)
      for (int rc = 0; rc < 2; ++rc) {
        const int row = 2 * cn[ra] + rc;
        if (mesh.dirichlet_node[cn[ra]]) continue;
        for (int ca = 0; ca < 4; ++ca)
          for (int cc = 0; cc < 2; ++cc) {
            if (mesh.dirichlet_node[cn[ca]]) continue;
            trips.emplace_back(row, 2 * cn[ca] + cc,
                               local[cell][8 * (2 * ra + rc) + (2 * ca + cc)]);
          }
      }
  }
  for (int node = 0; node < mesh.n_nodes(); ++node)
    if (mesh.dirichlet_node[node]) {
      trips.emplace_back(2 * node, 2 * node, 1.0);
      trips.emplace_back(2 * node + 1, 2 * node + 1, 1.0);
    }
  SparseMat A(2 * mesh.n_nodes(), 2 * mesh.n_nodes());
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

StateSystem assemble_state_residual(const Mesh& mesh, const NodalScalarField& z,
                                    const QuadField<DevTensor>& p_prev,
                                    RegularizationParam gamma, const MaterialLaw& law,
                                    const StepLoads& loads, const NodalVectorField& u,
                                    bool want_jacobian) {
  StateSystem out;
  out.condensed = condense_state(mesh, z, p_prev, gamma, law, u, want_jacobian);
  out.residual = assemble_stress_divergence(mesh, out.condensed.sigma) -
                 assemble_body_load(mesh, coeff_at_quad(mesh, z, law, Coeff::ell), loads.f) -
                 assemble_boundary_load(mesh, loads.g);
  zero_dirichlet(mesh, out.residual);
  if (want_jacobian) out.jacobian = assemble_tangent_matrix(mesh, out.condensed.points);
  return out;
}

double incremental_energy(const Mesh& mesh, const NodalScalarField& z,
                          const QuadField<DevTensor>& p_prev, RegularizationParam gamma,
                          const MaterialLaw& law, const StepLoads& loads,
                          const NodalVectorField& u) {
  const double w = mesh.cell_weight();
  double acc = 0.0;
  for (int cell = 0; cell < mesh.n_cells(); ++cell)
    for (int q = 0; q < 4; ++q) {
      const double zq = z.at_quad(cell, q);
      LocalPlasticContext ctx{zq, gamma, p_prev.at(cell, q), &law};
      const SymTensor E = u.strain_at_quad(cell, q);
      DevTensor p(2);
      SymTensor sigma(2);
      if (gamma.finite()) {
        const double mu = coeff(law, Coeff::mu, zq);
        p = F_inverse(ctx, (2.0 * mu) * dev_project(E));
      } else {
        p = radial_return(zq, law, ctx.P, E).p;
      }
      const SymTensor eps = E - p.sym();
      const double dz = coeff(law, Coeff::d, zq);
      const double diss = gamma.finite() ? dz * h_gamma(p - ctx.P, gamma)
                                         : dz * abs_density(p - ctx.P);
      acc += w * (0.5 * contract(elasticity_apply(law, zq, eps), eps) +
                  0.5 * coeff(law, Coeff::h, zq) * contract(p, p) + diss);
    }
  const Vector body = assemble_body_load(mesh, coeff_at_quad(mesh, z, law, Coeff::ell), loads.f);
  const Vector bnd = assemble_boundary_load(mesh, loads.g);
  double work = 0.0;
  for (int k = 0; k < body.size(); ++k) work += (body[k] + bnd[k]) * u.data()[k];
  return acc - work;
}

QuadField<double> eval_at_quad(
    const Mesh& mesh, const std::function<double(int cell, int q, double x, double y)>& fn) {
  QuadField<double> out(mesh, 0.0);
  for (int cell = 0; cell < mesh.n_cells(); ++cell)
    for (int q = 0; q < 4; ++q) {
      const auto xq = mesh.quad_point(cell, q);
      out.at(cell, q) = fn(cell, q, xq[0], xq[1]);
    }
  return out;
}

QuadField<double> coeff_at_quad(const Mesh& mesh, const NodalScalarField& z,
                                const MaterialLaw& law, Coeff which) {
  QuadField<double> out(mesh, 0.0);
  for (int cell = 0; cell < mesh.n_cells(); ++cell)
    for (int q = 0; q < 4; ++q) out.at(cell, q) = coeff(law, which, z.at_quad(cell, q));
  return out;
}

SparseMat assemble_scalar_h1_matrix(const Mesh& mesh, double delta) {
  const auto& t = mesh.tables;
  const double w = mesh.cell_weight();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(16 * mesh.n_cells());
  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    const auto& cn = mesh.cells[cell];
    for (int q = 0; q < 4; ++q)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          const double v = w * (delta * (t.grad_x[q][a] * t.grad_x[q][b] +
                                         t.grad_y[q][a] * t.grad_y[q][b]) +
                                t.value[q][a] * t.value[q][b]);
          trips.emplace_back(cn[a], cn[b], v);
        }
  }
  SparseMat A(mesh.n_nodes(), mesh.n_nodes());
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

NodalScalarField h1_riesz_solve(const Mesh& mesh, double delta, const Vector& G) {
  const SparseMat A = assemble_scalar_h1_matrix(mesh, delta);
  Eigen::SimplicialLLT<SparseMat> llt(A);
  const Vector x = llt.solve(G);
  NodalScalarField out(mesh);
  for (int i = 0; i < mesh.n_nodes(); ++i) out[i] = x[i];
  return out;
}

// Defined here so the dissipation header stays mesh-free.
double dissipation_functional(const NodalScalarField& z, const QuadField<DevTensor>& increment,
                              RegularizationParam gamma, const MaterialLaw& law) {
  if (z.mesh() != increment.mesh() || z.mesh() == nullptr)
    throw std::invalid_argument("dissipation functional needs both fields on one mesh");
  const Mesh& mesh = *z.mesh();
  const double w = mesh.cell_weight();
  double acc = 0.0;
  for (int cell = 0; cell < mesh.n_cells(); ++cell)
    for (int q = 0; q < 4; ++q) {
      const double d = coeff(law, Coeff::d, z.at_quad(cell, q));
      const DevTensor& dq = increment.at(cell, q);
      acc += w * d * (gamma.finite() ? h_gamma(dq, gamma) : abs_density(dq));
    }
  return acc;
}

}  // namespace plastopt
