#include "plastopt/evolution.hpp"

#include <cassert>
#include <cmath>
#include <random>
#include <string>

#include "plastopt/errors.hpp"

namespace plastopt {

namespace {

// Compensated accumulation; the refinement studies compare tiny differences of
// these sums.
struct Kahan {
  double sum = 0.0, carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

void apply_dirichlet_values(const Mesh& mesh, const SpaceFn& w, NodalVectorField& u) {
  for (int node = 0; node < mesh.n_nodes(); ++node)
    if (mesh.dirichlet_node[node]) {
      double wv[2];
      w(mesh.nodes[node][0], mesh.nodes[node][1], wv);
      u(node, 0) = wv[0];
      u(node, 1) = wv[1];
    }
}

double stored_energy(const Mesh& mesh, const NodalScalarField& z, const MaterialLaw& law,
                     const QuadField<SymTensor>& eps, const QuadField<DevTensor>& p) {
  const double w = mesh.cell_weight();
  Kahan acc;
  for (int cell = 0; cell < mesh.n_cells(); ++cell)
    for (int q = 0; q < 4; ++q) {
      const double zq = z.at_quad(cell, q);
      const SymTensor& e = eps.at(cell, q);
      const DevTensor& pq = p.at(cell, q);
      acc.add(w * (0.5 * contract(elasticity_apply(law, zq, e), e) +
                   0.5 * coeff(law, Coeff::h, zq) * contract(pq, pq)));
    }
  return acc.sum;
}

double load_work(const Mesh& mesh, const NodalScalarField& z, const MaterialLaw& law,
                 const StepLoads& loads, const NodalVectorField& u) {
  const Vector body = assemble_body_load(mesh, coeff_at_quad(mesh, z, law, Coeff::ell), loads.f);
  const Vector bnd = assemble_boundary_load(mesh, loads.g);
  double acc = 0.0;
  for (int k = 0; k < body.size(); ++k) acc += (body[k] + bnd[k]) * u.data()[k];
  return acc;
}

}  // namespace

StepState solve_increment(const Mesh& mesh, const NodalScalarField& z, const StepState& prev,
                          const StepLoads& loads, RegularizationParam gamma,
                          const MaterialLaw& law, const NewtonOptions& opts,
                          const NodalVectorField* warm_start, NewtonReport* report) {
  NodalVectorField u = warm_start ? *warm_start : prev.u;
  apply_dirichlet_values(mesh, loads.w, u);

  Vector ext = assemble_body_load(mesh, coeff_at_quad(mesh, z, law, Coeff::ell), loads.f) +
               assemble_boundary_load(mesh, loads.g);
  zero_dirichlet(mesh, ext);
  const double ext_norm = ext.norm();

  StateSystem sys =
      assemble_state_residual(mesh, z, prev.p, gamma, law, loads, u, /*want_jacobian=*/true);
  double res = sys.residual.norm();
  const double scale = std::max(res, ext_norm);
  const double stop = std::max(opts.tol * scale, 1e-306);
  double merit = incremental_energy(mesh, z, prev.p, gamma, law, loads, u);

  NewtonReport local_report;
  local_report.residual_history.push_back(res);

  int it = 0;
  SpdSolver solver;
  while (res > stop) {
    if (it >= opts.max_iter)
      throw NewtonDivergence("displacement Newton stalled at residual " + std::to_string(res) +
                                 " (target " + std::to_string(stop) + ")",
                             it, res);
    solver.factor(sys.jacobian);
    const Vector du = solver.solve(-sys.residual);
    const double slope = sys.residual.dot(du);  // negative for a descent direction

    // Near convergence the predicted decrease sinks below the roundoff floor
    // of the energy; the tolerance keeps the (guaranteed descent) Newton step
    // from being rejected on noise.
    const double noise = 1e-14 * (1.0 + std::abs(merit));
    double t = 1.0;
    NodalVectorField u_trial = u;
    bool accepted = false;
    for (int bt = 0; bt <= opts.max_backtrack; ++bt) {
      for (int k = 0; k < du.size(); ++k) u_trial.data()[k] = u.data()[k] + t * du[k];
      const double merit_trial = incremental_energy(mesh, z, prev.p, gamma, law, loads, u_trial);
      if (merit_trial <= merit + opts.armijo_c * t * slope + noise ||
          (bt == opts.max_backtrack && merit_trial <= merit)) {
        u = u_trial;
        merit = merit_trial;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted)
      throw NewtonDivergence("energy line search failed after " +
                                 std::to_string(opts.max_backtrack) + " backtracks",
                             it, res);

    sys = assemble_state_residual(mesh, z, prev.p, gamma, law, loads, u, true);
    res = sys.residual.norm();
    ++it;
    local_report.residual_history.push_back(res);
  }

  local_report.iterations = it;
  local_report.final_residual = res;
  if (report) *report = local_report;

  StepState out;
  out.u = u;
  out.p = sys.condensed.p;
  out.eps = sym_quadfield(mesh);
  for (int cell = 0; cell < mesh.n_cells(); ++cell)
    for (int q = 0; q < 4; ++q)
      out.eps.at(cell, q) = u.strain_at_quad(cell, q) - out.p.at(cell, q).sym();
  assert(all_finite(out.u));
  return out;
}

EvolutionState solve_evolution(const Mesh& mesh, const NodalScalarField& z, const TimeGrid& grid,
                               const LoadProgram& loads, RegularizationParam gamma,
                               const MaterialLaw& law, const NewtonOptions& opts,
                               const EvolutionState* warm_start) {
  EvolutionState out;
  out.gamma = gamma;
  out.grid = grid;
  out.steps.reserve(grid.k + 1);

  StepState zero;
  zero.u = NodalVectorField(mesh);
  zero.eps = sym_quadfield(mesh);
  zero.p = dev_quadfield(mesh);
  out.steps.push_back(zero);

  const bool can_warm = warm_start && warm_start->grid.k == grid.k &&
                        static_cast<int>(warm_start->steps.size()) == grid.k + 1;
  for (int i = 1; i <= grid.k; ++i) {
    const StepLoads li = sample_loads(loads, grid.node(i));
    const NodalVectorField* ws = can_warm ? &warm_start->steps[i].u : nullptr;
    try {
      out.steps.push_back(
          solve_increment(mesh, z, out.steps.back(), li, gamma, law, opts, ws));
    } catch (const NewtonDivergence& e) {
      throw NewtonDivergence("time step " + std::to_string(i) + ": " + e.what(), e.iterations,
                             e.last_residual);
    }
    out.dissipation_increment.push_back(
        dissipation_functional(z, [&] {
          QuadField<DevTensor> inc = dev_quadfield(mesh);
          for (int c = 0; c < mesh.n_cells(); ++c)
            for (int q = 0; q < 4; ++q)
              inc.at(c, q) = out.steps[i].p.at(c, q) - out.steps[i - 1].p.at(c, q);
          return inc;
        }(), gamma, law));
  }
  return out;
}

double energy(const Mesh& mesh, const NodalScalarField& z, const MaterialLaw& law,
              const StepState& state, const StepLoads& loads) {
  return stored_energy(mesh, z, law, state.eps, state.p) -
         load_work(mesh, z, law, loads, state.u);
}

std::vector<double> energy_inequality_slack(const Mesh& mesh, const NodalScalarField& z,
                                            const MaterialLaw& law, const EvolutionState& state,
                                            const LoadProgram& loads) {
  const int k = state.grid.k;
  const double w = mesh.cell_weight();
  std::vector<double> slack;
  slack.reserve(k);

  Kahan work_bound;  // running sum of the per-step upper-bound terms
  Kahan dissipated;
  const double energy0 = energy(mesh, z, law, state.steps[0], sample_loads(loads, 0.0));

  for (int j = 1; j <= k; ++j) {
    const StepLoads lj = sample_loads(loads, state.grid.node(j));
    const StepLoads lprev = sample_loads(loads, state.grid.node(j - 1));

    // Nodal interpolant of the Dirichlet increment w_j - w_{j-1}; its strain
    // enters the competitor construction behind the bound.
    NodalVectorField dw(mesh);
    for (int node = 0; node < mesh.n_nodes(); ++node) {
      double a[2], b[2];
      lj.w(mesh.nodes[node][0], mesh.nodes[node][1], a);
      lprev.w(mesh.nodes[node][0], mesh.nodes[node][1], b);
      dw(node, 0) = a[0] - b[0];
      dw(node, 1) = a[1] - b[1];
    }

    double t_stress = 0.0, t_quad = 0.0;
    for (int cell = 0; cell < mesh.n_cells(); ++cell)
      for (int q = 0; q < 4; ++q) {
        const double zq = z.at_quad(cell, q);
        const SymTensor Edw = dw.strain_at_quad(cell, q);
        t_stress +=
            w * contract(elasticity_apply(law, zq, state.steps[j - 1].eps.at(cell, q)), Edw);
        t_quad += w * contract(elasticity_apply(law, zq, Edw), Edw);
      }

    const SpaceFn df = [fj = lj.f, fp = lprev.f](double x, double y, double* out) {
      double a[2], b[2];
      fj(x, y, a);
      fp(x, y, b);
      out[0] = a[0] - b[0];
      out[1] = a[1] - b[1];
    };
    const SpaceFn dg = [gj = lj.g, gp = lprev.g](double x, double y, double* out) {
      double a[2], b[2];
      gj(x, y, a);
      gp(x, y, b);
      out[0] = a[0] - b[0];
      out[1] = a[1] - b[1];
    };

    const QuadField<double> ell = coeff_at_quad(mesh, z, law, Coeff::ell);
    const Vector body_df = assemble_body_load(mesh, ell, df);
    const Vector body_fj = assemble_body_load(mesh, ell, lj.f);
    const Vector bnd_dg = assemble_boundary_load(mesh, dg);
    const Vector bnd_gj = assemble_boundary_load(mesh, lj.g);

    double t_loads = 0.0;
    const auto& uprev = state.steps[j - 1].u.data();
    const auto& dwv = dw.data();
    for (int kk = 0; kk < body_df.size(); ++kk)
      t_loads -= body_df[kk] * uprev[kk] + body_fj[kk] * dwv[kk] + bnd_dg[kk] * uprev[kk] +
                 bnd_gj[kk] * dwv[kk];

    work_bound.add(t_stress + t_quad + t_loads);
    dissipated.add(state.dissipation_increment[j - 1]);

    const double energy_j = energy(mesh, z, law, state.steps[j], lj);
    slack.push_back(energy0 + work_bound.sum - energy_j - dissipated.sum);
  }
  return slack;
}

double total_dissipation(const Mesh& mesh, const NodalScalarField& z, const MaterialLaw& law,
                         const EvolutionState& state) {
  Kahan acc;
  QuadField<DevTensor> inc = dev_quadfield(mesh);
  for (size_t i = 1; i < state.steps.size(); ++i) {
    for (int c = 0; c < mesh.n_cells(); ++c)
      for (int q = 0; q < 4; ++q)
        inc.at(c, q) = state.steps[i].p.at(c, q) - state.steps[i - 1].p.at(c, q);
    acc.add(dissipation_functional(z, inc, RegularizationParam::exact(), law));
  }
  return acc.sum;
}

double stability_violation(const Mesh& mesh, const NodalScalarField& z, const MaterialLaw& law,
                           RegularizationParam gamma, const StepState& prev,
                           const StepState& cur, const StepLoads& loads, int n_competitors,
                           double amplitude, unsigned long long seed) {
  QuadField<DevTensor> inc = dev_quadfield(mesh);
  for (int c = 0; c < mesh.n_cells(); ++c)
    for (int q = 0; q < 4; ++q) inc.at(c, q) = cur.p.at(c, q) - prev.p.at(c, q);
  const double own =
      energy(mesh, z, law, cur, loads) + dissipation_functional(z, inc, gamma, law);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst = -1e300;
  StepState comp;
  comp.u = NodalVectorField(mesh);
  comp.eps = sym_quadfield(mesh);
  comp.p = dev_quadfield(mesh);
  for (int trial = 0; trial < n_competitors; ++trial) {
    NodalVectorField du(mesh);
    for (int node = 0; node < mesh.n_nodes(); ++node)
      if (!mesh.dirichlet_node[node]) {
        du(node, 0) = amplitude * unit(rng);
        du(node, 1) = amplitude * unit(rng);
      }
    for (int kk = 0; kk < du.size(); ++kk) comp.u.data()[kk] = cur.u.data()[kk] + du.data()[kk];
    for (int c = 0; c < mesh.n_cells(); ++c)
      for (int q = 0; q < 4; ++q) {
        SymTensor dp_raw(2);
        dp_raw.set(0, 0, amplitude * unit(rng));
        dp_raw.set(0, 1, amplitude * unit(rng));
        dp_raw.set(1, 1, amplitude * unit(rng));
        const DevTensor dp = dev_project(dp_raw);
        comp.p.at(c, q) = cur.p.at(c, q) + dp;
        comp.eps.at(c, q) = cur.eps.at(c, q) + du.strain_at_quad(c, q) - dp.sym();
        inc.at(c, q) = comp.p.at(c, q) - prev.p.at(c, q);
      }
    const double other =
        energy(mesh, z, law, comp, loads) + dissipation_functional(z, inc, gamma, law);
    worst = std::max(worst, own - other);
  }
  return worst;
}

}  // namespace plastopt
