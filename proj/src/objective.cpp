#include "plastopt/objective.hpp"

#include <cmath>
#include <stdexcept>

#include "plastopt/local_return.hpp"
#include "plastopt/linsolve.hpp"
#include "plastopt/threading.hpp"

namespace plastopt {

namespace {

struct Kahan {
  double sum = 0.0, carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

double double_well_slope(double z) { return z * (1.0 - z) * (1.0 - z) - z * z * (1.0 - z); }

void check_trajectory(const Mesh& mesh, const NodalScalarField& z, const EvolutionState& state) {
  if (z.mesh() != &mesh) throw std::invalid_argument("phase field lives on a different mesh");
  if (static_cast<int>(state.steps.size()) != state.grid.k + 1)
    throw std::invalid_argument("trajectory length does not match its time grid");
  if (!state.steps.empty() && state.steps[0].p.mesh() != &mesh)
    throw std::invalid_argument("trajectory lives on a different mesh");
}

SpaceFn increment_of(const SpaceFn& now, const SpaceFn& before) {
  return [now, before](double x, double y, double* out) {
    double a[2], b[2];
    now(x, y, a);
    before(x, y, b);
    out[0] = a[0] - b[0];
    out[1] = a[1] - b[1];
  };
}

// Tangent operator of a converged forward step, rebuilt from the pointwise
// condensed blocks so the smoothing parameter can differ from the state's
// (used when pairing an exact-limit state with a smoothed dual system).
struct StepOperators {
  SparseMat K;
  std::vector<DevOperator> ops;  // index 4*cell + q
};

StepOperators step_operators(const Mesh& mesh, const NodalScalarField& z,
                             const EvolutionState& state, int i, const MaterialLaw& law,
                             RegularizationParam smoothing) {
  StepOperators out;
  out.ops.resize(4 * mesh.n_cells());
  std::vector<CondensedPoint> points(4 * mesh.n_cells());
  const int m = sym_dim(2);
  const auto run_cell = [&](int cell) {
    for (int q = 0; q < 4; ++q) {
      const double zq = z.at_quad(cell, q);
      const double two_mu = 2.0 * coeff(law, Coeff::mu, zq);
      LocalPlasticContext ctx{zq, smoothing, state.steps[i - 1].p.at(cell, q), &law};
      DevOperator& op = out.ops[4 * cell + q];
      op = plastic_operator(ctx, state.steps[i].p.at(cell, q));
      CondensedPoint& cp = points[4 * cell + q];
      cp.m = m;
      for (int b = 0; b < m; ++b) {
        const SymTensor Vb = sym_basis(2, b);
        const SymTensor col =
            elasticity_apply(law, zq, Vb) -
            (two_mu * dev_solve(op, two_mu * dev_project(Vb))).sym();
        for (int a = 0; a < m; ++a) cp.K[a * m + b] = contract(sym_basis(2, a), col);
      }
    }
  };
  if (exec_mode() == ExecMode::parallel) {
#pragma omp parallel for schedule(static)
    for (int cell = 0; cell < mesh.n_cells(); ++cell) run_cell(cell);
  } else {
    for (int cell = 0; cell < mesh.n_cells(); ++cell) run_cell(cell);
  }
  out.K = assemble_tangent_matrix(mesh, points);
  return out;
}

NodalVectorField field_from(const Mesh& mesh, const Vector& v) {
  NodalVectorField out(mesh);
  for (int k = 0; k < v.size(); ++k) out.data()[k] = v[k];
  return out;
}

}  // namespace

double modica_mortola(const Mesh& mesh, const NodalScalarField& z, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("interface width must be positive");
  const double w = mesh.cell_weight();
  Kahan acc;
  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    const auto& cn = mesh.cells[cell];
    for (int q = 0; q < 4; ++q) {
      double zv = 0.0, gx = 0.0, gy = 0.0;
      for (int a = 0; a < 4; ++a) {
        zv += mesh.tables.value[q][a] * z[cn[a]];
        gx += mesh.tables.grad_x[q][a] * z[cn[a]];
        gy += mesh.tables.grad_y[q][a] * z[cn[a]];
      }
      const double well = zv * zv * (1.0 - zv) * (1.0 - zv);
      acc.add(w * (0.5 * delta * (gx * gx + gy * gy) + well / (2.0 * delta)));
    }
  }
  return acc.sum;
}

ObjectiveBreakdown objective(const Mesh& mesh, const NodalScalarField& z,
                             const EvolutionState& state, const LoadProgram& loads,
                             const MaterialLaw& law, double delta) {
  check_trajectory(mesh, z, state);
  const int k = state.grid.k;
  const QuadField<double> ell = coeff_at_quad(mesh, z, law, Coeff::ell);

  ObjectiveBreakdown out;
  out.delta = delta;

  const StepLoads lk = sample_loads(loads, state.grid.node(k));
  const Vector terminal_load =
      assemble_body_load(mesh, ell, lk.f) + assemble_boundary_load(mesh, lk.g);
  for (int d = 0; d < terminal_load.size(); ++d)
    out.terminal += terminal_load[d] * state.steps[k].u.data()[d];

  Kahan inc;
  for (int j = 1; j <= k; ++j) {
    const StepLoads lj = sample_loads(loads, state.grid.node(j));
    const StepLoads lp = sample_loads(loads, state.grid.node(j - 1));
    const Vector dload = assemble_body_load(mesh, ell, increment_of(lj.f, lp.f)) +
                         assemble_boundary_load(mesh, increment_of(lj.g, lp.g));
    double s = 0.0;
    for (int d = 0; d < dload.size(); ++d) s += dload[d] * state.steps[j - 1].u.data()[d];
    inc.add(-s);
  }
  out.increments = inc.sum;
  out.mm = modica_mortola(mesh, z, delta);
  out.total = out.terminal + out.increments + out.mm;
  return out;
}

AdjointState solve_adjoint(const Mesh& mesh, const NodalScalarField& z,
                           const EvolutionState& state, const LoadProgram& loads,
                           const MaterialLaw& law, std::optional<RegularizationParam> smoothing) {
  check_trajectory(mesh, z, state);
  const RegularizationParam gamma = smoothing.value_or(state.gamma);
  if (!gamma.finite())
    throw std::invalid_argument("dual recursion needs a finite regularization parameter");
  const int k = state.grid.k;

  AdjointState adj;
  adj.ubar.assign(k + 2, NodalVectorField(mesh));
  adj.epsbar.assign(k + 2, sym_quadfield(mesh));
  adj.pbar.assign(k + 2, dev_quadfield(mesh));
  adj.rho.assign(k + 1, dev_quadfield(mesh));
  adj.pi.assign(k + 1, dev_quadfield(mesh));

  const QuadField<double> ell = coeff_at_quad(mesh, z, law, Coeff::ell);

  for (int i = k; i >= 1; --i) {
    const StepLoads li = sample_loads(loads, state.grid.node(i));
    const StepOperators so = step_operators(mesh, z, state, i, law, gamma);

    // Coupling with the later dual step: HP = d(z) hess_h(dp_i) pbar_{i+1},
    // entering the displacement system as the stress 2 mu A^{-1} HP.
    QuadField<DevTensor> hp = dev_quadfield(mesh);
    QuadField<SymTensor> coupling = sym_quadfield(mesh);
    for (int cell = 0; cell < mesh.n_cells(); ++cell)
      for (int q = 0; q < 4; ++q) {
        const double zq = z.at_quad(cell, q);
        const DevTensor dp = state.steps[i].p.at(cell, q) - state.steps[i - 1].p.at(cell, q);
        hp.at(cell, q) = coeff(law, Coeff::d, zq) *
                         hess_h_gamma_apply(dp, gamma, adj.pbar[i + 1].at(cell, q));
        coupling.at(cell, q) =
            (2.0 * coeff(law, Coeff::mu, zq) * dev_solve(so.ops[4 * cell + q], hp.at(cell, q)))
                .sym();
      }

    Vector rhs = assemble_body_load(mesh, ell, li.f) + assemble_boundary_load(mesh, li.g) +
                 assemble_stress_divergence(mesh, coupling);
    zero_dirichlet(mesh, rhs);
    SpdSolver solver;
    solver.factor(so.K);
    adj.ubar[i] = field_from(mesh, solver.solve(rhs));

    for (int cell = 0; cell < mesh.n_cells(); ++cell)
      for (int q = 0; q < 4; ++q) {
        const double zq = z.at_quad(cell, q);
        const double two_mu = 2.0 * coeff(law, Coeff::mu, zq);
        const DevTensor devE = dev_project(adj.ubar[i].strain_at_quad(cell, q));
        const DevTensor pbar =
            dev_solve(so.ops[4 * cell + q], two_mu * devE + hp.at(cell, q));
        adj.pbar[i].at(cell, q) = pbar;
        adj.epsbar[i].at(cell, q) = adj.ubar[i].strain_at_quad(cell, q) - pbar.sym();

        const DevTensor dp = state.steps[i].p.at(cell, q) - state.steps[i - 1].p.at(cell, q);
        adj.rho[i].at(cell, q) =
            dev_project(elasticity_apply(law, zq, state.steps[i].eps.at(cell, q))) -
            coeff(law, Coeff::h, zq) * state.steps[i].p.at(cell, q);
        adj.pi[i].at(cell, q) =
            coeff(law, Coeff::d, zq) *
            hess_h_gamma_apply(dp, gamma, pbar - adj.pbar[i + 1].at(cell, q));
      }
  }
  return adj;
}

ReducedGradient reduced_gradient(const Mesh& mesh, const NodalScalarField& z,
                                 const EvolutionState& state, const AdjointState& adjoint,
                                 const LoadProgram& loads, const MaterialLaw& law, double delta,
                                 DissipationGradientForm form) {
  check_trajectory(mesh, z, state);
  if (!state.gamma.finite() && form == DissipationGradientForm::smoothed_increments)
    throw std::invalid_argument(
        "smoothed-increment assembly needs a finite regularization parameter");
  const int k = state.grid.k;
  const double w = mesh.cell_weight();

  ReducedGradient out;
  out.functional = Vector::Zero(mesh.n_nodes());

  const StepLoads lk = sample_loads(loads, state.grid.node(k));
  for (int j = 1; j <= k; ++j) {
    const StepLoads lj = sample_loads(loads, state.grid.node(j));
    const StepLoads lp = sample_loads(loads, state.grid.node(j - 1));
    for (int cell = 0; cell < mesh.n_cells(); ++cell) {
      const auto& cn = mesh.cells[cell];
      for (int q = 0; q < 4; ++q) {
        const auto x = mesh.quad_point(cell, q);
        const double zq = z.at_quad(cell, q);
        const double ellp = coeff_prime(law, Coeff::ell, zq);

        double fj[2], fp[2], ub[2], uprev[2];
        lj.f(x[0], x[1], fj);
        lp.f(x[0], x[1], fp);
        adjoint.ubar[j].value_at_quad(cell, q, ub);
        state.steps[j - 1].u.value_at_quad(cell, q, uprev);

        // Duality terms carry the dual trajectory; the explicit term carries
        // the primal one (terminal contribution added after the loop).
        double s = ellp * ((fj[0] - fp[0]) * ub[0] + (fj[1] - fp[1]) * ub[1]);
        s -= ellp * ((fj[0] - fp[0]) * uprev[0] + (fj[1] - fp[1]) * uprev[1]);

        const SymTensor deps = state.steps[j].eps.at(cell, q) - state.steps[j - 1].eps.at(cell, q);
        s -= contract(elasticity_prime_apply(law, zq, deps), adjoint.epsbar[j].at(cell, q));

        const DevTensor dpj = state.steps[j].p.at(cell, q) - state.steps[j - 1].p.at(cell, q);
        s -= coeff_prime(law, Coeff::h, zq) * contract(dpj, adjoint.pbar[j].at(cell, q));

        const double dprime = coeff_prime(law, Coeff::d, zq);
        if (form == DissipationGradientForm::smoothed_increments) {
          DevTensor inc = grad_h_gamma(dpj, state.gamma);
          if (j > 1) {
            const DevTensor dpm =
                state.steps[j - 1].p.at(cell, q) - state.steps[j - 2].p.at(cell, q);
            inc = inc - grad_h_gamma(dpm, state.gamma);
          }
          s -= dprime * contract(inc, adjoint.pbar[j].at(cell, q));
        } else {
          DevTensor inc = adjoint.rho[j].at(cell, q);
          if (j > 1) inc = inc - adjoint.rho[j - 1].at(cell, q);
          s -= dprime / coeff(law, Coeff::d, zq) * contract(inc, adjoint.pbar[j].at(cell, q));
        }

        for (int a = 0; a < 4; ++a)
          out.functional[cn[a]] += w * mesh.tables.value[q][a] * s;
      }
    }
  }

  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    const auto& cn = mesh.cells[cell];
    for (int q = 0; q < 4; ++q) {
      const auto x = mesh.quad_point(cell, q);
      const double zq = z.at_quad(cell, q);

      double fk[2], uk[2];
      lk.f(x[0], x[1], fk);
      state.steps[k].u.value_at_quad(cell, q, uk);
      const double s = coeff_prime(law, Coeff::ell, zq) * (fk[0] * uk[0] + fk[1] * uk[1]);

      double gx = 0.0, gy = 0.0;
      for (int a = 0; a < 4; ++a) {
        gx += mesh.tables.grad_x[q][a] * z[cn[a]];
        gy += mesh.tables.grad_y[q][a] * z[cn[a]];
      }
      for (int a = 0; a < 4; ++a)
        out.functional[cn[a]] +=
            w * (mesh.tables.value[q][a] * (s + double_well_slope(zq) / delta) +
                 delta * (gx * mesh.tables.grad_x[q][a] + gy * mesh.tables.grad_y[q][a]));
    }
  }

  out.riesz = h1_riesz_solve(mesh, delta, out.functional);
  return out;
}

SensitivityState solve_forward_sensitivity(const Mesh& mesh, const NodalScalarField& z,
                                           const EvolutionState& state,
                                           const NodalScalarField& phi, const LoadProgram& loads,
                                           const MaterialLaw& law, double delta) {
  check_trajectory(mesh, z, state);
  if (!state.gamma.finite())
    throw std::invalid_argument("tangent recursion needs a finite regularization parameter");
  const int k = state.grid.k;

  SensitivityState sens;
  sens.v.assign(k + 1, NodalVectorField(mesh));
  sens.eta.assign(k + 1, sym_quadfield(mesh));
  sens.q.assign(k + 1, dev_quadfield(mesh));

  QuadField<double> phi_ellp(mesh, 0.0);
  for (int cell = 0; cell < mesh.n_cells(); ++cell)
    for (int q = 0; q < 4; ++q)
      phi_ellp.at(cell, q) =
          phi.at_quad(cell, q) * coeff_prime(law, Coeff::ell, z.at_quad(cell, q));

  for (int i = 1; i <= k; ++i) {
    const StepLoads li = sample_loads(loads, state.grid.node(i));
    const StepOperators so = step_operators(mesh, z, state, i, law, state.gamma);

    QuadField<DevTensor> source = dev_quadfield(mesh);  // S_i of the pointwise block
    QuadField<SymTensor> extra = sym_quadfield(mesh);
    for (int cell = 0; cell < mesh.n_cells(); ++cell)
      for (int q = 0; q < 4; ++q) {
        const double zq = z.at_quad(cell, q);
        const double ph = phi.at_quad(cell, q);
        const DevTensor dp = state.steps[i].p.at(cell, q) - state.steps[i - 1].p.at(cell, q);
        const SymTensor cprime_eps =
            elasticity_prime_apply(law, zq, state.steps[i].eps.at(cell, q));

        DevTensor S = ph * dev_project(cprime_eps);
        S = S - (ph * coeff_prime(law, Coeff::h, zq)) * state.steps[i].p.at(cell, q);
        S = S - (ph * coeff_prime(law, Coeff::d, zq)) * grad_h_gamma(dp, state.gamma);
        S = S + coeff(law, Coeff::d, zq) *
                    hess_h_gamma_apply(dp, state.gamma, sens.q[i - 1].at(cell, q));
        source.at(cell, q) = S;
        extra.at(cell, q) =
            (2.0 * coeff(law, Coeff::mu, zq) * dev_solve(so.ops[4 * cell + q], S)).sym() -
            ph * cprime_eps;
      }

    Vector rhs =
        assemble_body_load(mesh, phi_ellp, li.f) + assemble_stress_divergence(mesh, extra);
    zero_dirichlet(mesh, rhs);
    SpdSolver solver;
    solver.factor(so.K);
    sens.v[i] = field_from(mesh, solver.solve(rhs));

    for (int cell = 0; cell < mesh.n_cells(); ++cell)
      for (int q = 0; q < 4; ++q) {
        const double two_mu = 2.0 * coeff(law, Coeff::mu, z.at_quad(cell, q));
        const DevTensor devE = dev_project(sens.v[i].strain_at_quad(cell, q));
        sens.q[i].at(cell, q) =
            dev_solve(so.ops[4 * cell + q], two_mu * devE + source.at(cell, q));
        sens.eta[i].at(cell, q) =
            sens.v[i].strain_at_quad(cell, q) - sens.q[i].at(cell, q).sym();
      }
  }

  // Directional derivative: explicit phase-field terms against the primal
  // trajectory, load terms against the tangent one, and the interface part.
  const QuadField<double> ell = coeff_at_quad(mesh, z, law, Coeff::ell);
  const double w = mesh.cell_weight();
  Kahan dj;

  const StepLoads lk = sample_loads(loads, state.grid.node(k));
  const Vector terminal_load =
      assemble_body_load(mesh, ell, lk.f) + assemble_boundary_load(mesh, lk.g);
  {
    double s = 0.0;
    for (int d = 0; d < terminal_load.size(); ++d) s += terminal_load[d] * sens.v[k].data()[d];
    dj.add(s);
  }
  for (int cell = 0; cell < mesh.n_cells(); ++cell)
    for (int q = 0; q < 4; ++q) {
      const auto x = mesh.quad_point(cell, q);
      double fk[2], uk[2];
      lk.f(x[0], x[1], fk);
      state.steps[k].u.value_at_quad(cell, q, uk);
      dj.add(w * phi_ellp.at(cell, q) * (fk[0] * uk[0] + fk[1] * uk[1]));
    }

  for (int j = 1; j <= k; ++j) {
    const StepLoads lj = sample_loads(loads, state.grid.node(j));
    const StepLoads lp = sample_loads(loads, state.grid.node(j - 1));
    const SpaceFn df = increment_of(lj.f, lp.f);
    const Vector dload = assemble_body_load(mesh, ell, df) +
                         assemble_boundary_load(mesh, increment_of(lj.g, lp.g));
    double s = 0.0;
    for (int d = 0; d < dload.size(); ++d) s += dload[d] * sens.v[j - 1].data()[d];
    dj.add(-s);
    for (int cell = 0; cell < mesh.n_cells(); ++cell)
      for (int q = 0; q < 4; ++q) {
        const auto x = mesh.quad_point(cell, q);
        double dfv[2], up[2];
        df(x[0], x[1], dfv);
        state.steps[j - 1].u.value_at_quad(cell, q, up);
        dj.add(-w * phi_ellp.at(cell, q) * (dfv[0] * up[0] + dfv[1] * up[1]));
      }
  }

  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    const auto& cn = mesh.cells[cell];
    for (int q = 0; q < 4; ++q) {
      double zv = 0.0, gx = 0.0, gy = 0.0, pv = 0.0, px = 0.0, py = 0.0;
      for (int a = 0; a < 4; ++a) {
        zv += mesh.tables.value[q][a] * z[cn[a]];
        gx += mesh.tables.grad_x[q][a] * z[cn[a]];
        gy += mesh.tables.grad_y[q][a] * z[cn[a]];
        pv += mesh.tables.value[q][a] * phi[cn[a]];
        px += mesh.tables.grad_x[q][a] * phi[cn[a]];
        py += mesh.tables.grad_y[q][a] * phi[cn[a]];
      }
      dj.add(w * (delta * (gx * px + gy * py) + pv * double_well_slope(zv) / delta));
    }
  }

  sens.dJ = dj.sum;
  return sens;
}

OptimalityReport optimality_residuals(const Mesh& mesh, const NodalScalarField& z,
                                      const EvolutionState& state, const AdjointState& adjoint,
                                      const MaterialLaw& law) {
  check_trajectory(mesh, z, state);
  const int k = state.grid.k;
  const double w = mesh.cell_weight();
  OptimalityReport rep;
  Kahan flow, ortho, stick;
  for (int i = 1; i <= k; ++i)
    for (int cell = 0; cell < mesh.n_cells(); ++cell)
      for (int q = 0; q < 4; ++q) {
        const double dz = coeff(law, Coeff::d, z.at_quad(cell, q));
        const DevTensor dp = state.steps[i].p.at(cell, q) - state.steps[i - 1].p.at(cell, q);
        const DevTensor& rho = adjoint.rho[i].at(cell, q);
        const DevTensor dpbar = adjoint.pbar[i].at(cell, q) - adjoint.pbar[i + 1].at(cell, q);

        const double r_flow = std::abs(dz * frobenius_norm(dp) - contract(rho, dp));
        const double r_ortho = std::abs(contract(adjoint.pi[i].at(cell, q), dp));
        const double r_stick =
            std::max(dz - frobenius_norm(rho), 0.0) * frobenius_norm(dpbar);

        flow.add(w * r_flow);
        ortho.add(w * r_ortho);
        stick.add(w * r_stick);
        rep.flow_linf = std::max(rep.flow_linf, r_flow);
        rep.ortho_linf = std::max(rep.ortho_linf, r_ortho);
        rep.stick_linf = std::max(rep.stick_linf, r_stick);
      }
  rep.flow_l1 = flow.sum;
  rep.ortho_l1 = ortho.sum;
  rep.stick_l1 = stick.sum;
  return rep;
}

}  // namespace plastopt
