#include "plastopt/lab.hpp"

#include <algorithm>
#include <cmath>

#include "plastopt/assembly.hpp"

namespace plastopt {

namespace {

double triple_norm(const NodalVectorField& u, const QuadField<SymTensor>& eps,
                   const QuadField<DevTensor>& p) {
  return h1_norm(u) + l2_norm(eps) + l2_norm(p);
}

// Sum over time nodes of the per-node triple norm of the state difference.
double state_distance(const Mesh& mesh, const EvolutionState& a, const EvolutionState& b) {
  double acc = 0.0;
  for (int i = 0; i <= a.grid.k; ++i) {
    NodalVectorField du(mesh);
    for (int n = 0; n < du.size(); ++n)
      du.dof(n) = a.steps[i].u.dof(n) - b.steps[i].u.dof(n);
    QuadField<SymTensor> deps = sym_quadfield(mesh);
    QuadField<DevTensor> dp = dev_quadfield(mesh);
    for (int k = 0; k < deps.size(); ++k) {
      deps.flat(k) = a.steps[i].eps.flat(k) - b.steps[i].eps.flat(k);
      dp.flat(k) = a.steps[i].p.flat(k) - b.steps[i].p.flat(k);
    }
    acc += triple_norm(du, deps, dp);
  }
  return acc;
}

double well_slope(double z) {
  const double om = 1.0 - z;
  return z * om * om - z * z * om;
}

// Variation of the interface energy as a nodal functional.
Vector mm_functional(const Mesh& mesh, const NodalScalarField& z, double delta) {
  Vector G = Vector::Zero(mesh.n_nodes());
  const auto& t = mesh.tables;
  const double w = mesh.cell_weight();
  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    const auto& cn = mesh.cells[cell];
    for (int q = 0; q < 4; ++q) {
      double zq = 0.0, gx = 0.0, gy = 0.0;
      for (int a = 0; a < 4; ++a) {
        zq += t.value[q][a] * z[cn[a]];
        gx += t.grad_x[q][a] * z[cn[a]];
        gy += t.grad_y[q][a] * z[cn[a]];
      }
      const double slope = well_slope(zq) / delta;
      for (int a = 0; a < 4; ++a)
        G[cn[a]] +=
            w * (delta * (gx * t.grad_x[q][a] + gy * t.grad_y[q][a]) + slope * t.value[q][a]);
    }
  }
  return G;
}

double linf_slack(const Mesh& mesh, const NodalScalarField& z, const MaterialLaw& law,
                  const EvolutionState& st, const LoadProgram& loads) {
  double worst = 0.0;
  for (double s : energy_inequality_slack(mesh, z, law, st, loads))
    worst = std::max(worst, std::abs(s));
  return worst;
}

}  // namespace

LabBundle regression_fixture(int nx, int ny, int k, double gamma) {
  const double Lx = 2.0, Ly = 1.0;
  LabBundle b{build_rect_mesh(nx, ny, Lx, Ly,
                              {{Side::left, -1e9, 1e9, FacetTag::dirichlet},
                               {Side::right, Ly / 3.0, 2.0 * Ly / 3.0, FacetTag::neumann}}),
              {},
              {},
              {},
              TimeGrid{k, 1.0},
              RegularizationParam{gamma},
              0.1};

  b.law.mu1 = 1.0;
  b.law.lambda1 = 0.7;
  b.law.h1 = 0.5;
  b.law.d1 = 0.3;
  b.law.ell1 = 1.0;
  b.law.mu0 = 1e-3 * b.law.mu1;
  b.law.lambda0 = 1e-3 * b.law.lambda1;
  b.law.h0 = 1e-3 * b.law.h1;
  b.law.d0 = 1e-3 * b.law.d1;
  b.law.ell0 = 1e-3;

  b.loads.f = [](double, double, double, double* o) { o[0] = o[1] = 0.0; };
  b.loads.w = b.loads.f;
  b.loads.g = [](double t, double, double, double* o) {
    o[0] = 0.0;
    o[1] = -0.35 * t;
  };
  b.loads.T = 1.0;

  b.z = NodalScalarField(b.mesh);
  for (int j = 0; j <= b.mesh.ny; ++j)
    for (int i = 0; i <= b.mesh.nx; ++i) {
      const double x = i * b.mesh.hx, y = j * b.mesh.hy;
      b.z[b.mesh.node_id(i, j)] =
          0.6 + 0.3 * std::cos(1.7 * x - 0.3) * std::cos(2.4 * y + 0.5);
    }
  return b;
}

Table run_gamma_sweep(const LabBundle& bundle, const std::vector<double>& gammas) {
  Table t;
  t.title = "state distance to the exact-dissipation solution per smoothing";
  t.columns = {"gamma", "distance_sum_h1_l2_l2"};

  const EvolutionState exact = solve_evolution(bundle.mesh, bundle.z, bundle.grid,
                                               bundle.loads, RegularizationParam::exact(),
                                               bundle.law);
  bool monotone = true;
  double prev = std::numeric_limits<double>::infinity();
  for (const double g : gammas) {
    const RegularizationParam gamma =
        std::isfinite(g) ? RegularizationParam{g} : RegularizationParam::exact();
    const EvolutionState st =
        solve_evolution(bundle.mesh, bundle.z, bundle.grid, bundle.loads, gamma, bundle.law);
    const double dist = state_distance(bundle.mesh, st, exact);
    monotone = monotone && (dist <= prev);
    prev = dist;
    t.rows.push_back({g, dist});
  }
  t.summary["monotone_decreasing"] = monotone ? 1.0 : 0.0;
  t.summary["final_distance"] = t.rows.empty() ? 0.0 : t.rows.back()[1];
  return t;
}

Table run_timestep_sweep(const LabBundle& bundle, const std::vector<int>& ks) {
  Table t;
  t.title = "interpolant distances between successive time refinements";
  t.columns = {"k_coarse",      "k_fine",       "du_linf_h1", "du_h1_time",
               "deps_linf_l2",  "dp_linf_l2",   "slack_linf", "order_u"};

  std::vector<EvolutionState> states;
  for (const int k : ks)
    states.push_back(solve_evolution(bundle.mesh, bundle.z, TimeGrid{k, bundle.grid.T},
                                     bundle.loads, bundle.gamma, bundle.law));

  double prev_du = 0.0;
  bool monotone = true;
  double min_order = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m + 1 < states.size(); ++m) {
    const EvolutionState& coarse = states[m];
    const EvolutionState& fine = states[m + 1];
    const int kc = coarse.grid.k, kf = fine.grid.k;
    if (kf != 2 * kc) throw std::invalid_argument("time sweep expects doubling steps");

    // The two interpolants are compared on the fine grid; the coarse one is
    // affine there, so odd fine nodes read the midpoint of coarse neighbors.
    const double tau = fine.grid.tau();
    double du_linf = 0.0, deps_linf = 0.0, dp_linf = 0.0, du_h1t = 0.0;
    double prev_h1sq = 0.0;
    NodalVectorField e_prev(bundle.mesh);
    for (int j = 0; j <= kf; ++j) {
      NodalVectorField du(bundle.mesh);
      QuadField<SymTensor> deps = sym_quadfield(bundle.mesh);
      QuadField<DevTensor> dp = dev_quadfield(bundle.mesh);
      const int jc = j / 2;
      const bool mid = (j % 2) == 1;
      for (int n = 0; n < du.size(); ++n) {
        const double c = mid ? 0.5 * (coarse.steps[jc].u.dof(n) + coarse.steps[jc + 1].u.dof(n))
                             : coarse.steps[jc].u.dof(n);
        du.dof(n) = fine.steps[j].u.dof(n) - c;
      }
      for (int p = 0; p < deps.size(); ++p) {
        const SymTensor ec =
            mid ? 0.5 * (coarse.steps[jc].eps.flat(p) + coarse.steps[jc + 1].eps.flat(p))
                : coarse.steps[jc].eps.flat(p);
        const DevTensor pc =
            mid ? 0.5 * (coarse.steps[jc].p.flat(p) + coarse.steps[jc + 1].p.flat(p))
                : coarse.steps[jc].p.flat(p);
        deps.flat(p) = fine.steps[j].eps.flat(p) - ec;
        dp.flat(p) = fine.steps[j].p.flat(p) - pc;
      }
      const double h1 = h1_norm(du);
      du_linf = std::max(du_linf, h1);
      deps_linf = std::max(deps_linf, l2_norm(deps));
      dp_linf = std::max(dp_linf, l2_norm(dp));

      if (j > 0) {
        du_h1t += 0.5 * tau * (prev_h1sq + h1 * h1);
        NodalVectorField rate(bundle.mesh);
        for (int n = 0; n < rate.size(); ++n)
          rate.dof(n) = (du.dof(n) - e_prev.dof(n)) / tau;
        const double rh = h1_norm(rate);
        du_h1t += tau * rh * rh;
      }
      prev_h1sq = h1 * h1;
      e_prev = du;
    }
    du_h1t = std::sqrt(du_h1t);

    const double slack = linf_slack(bundle.mesh, bundle.z, bundle.law, coarse, bundle.loads);
    double order = 0.0;
    if (m > 0 && du_linf > 0.0) {
      order = std::log2(prev_du / du_linf);
      min_order = std::min(min_order, order);
      monotone = monotone && (du_linf < prev_du);
    }
    prev_du = du_linf;
    t.rows.push_back({double(kc), double(kf), du_linf, du_h1t, deps_linf, dp_linf, slack,
                      order});
  }
  t.summary["min_order_u"] = std::isfinite(min_order) ? min_order : 0.0;
  t.summary["monotone_decreasing"] = monotone ? 1.0 : 0.0;
  if (!t.rows.empty()) t.summary["last_slack"] = t.rows.back()[6];
  return t;
}

Table run_delta_sweep(const LabBundle& bundle, const std::vector<double>& deltas,
                      const OptimizerConfig& cfg) {
  Table t;
  t.title = "optimized design per interface width";
  t.columns = {"delta", "objective", "band_area", "iterations", "grad_norm", "converged"};

  bool width_monotone = true;
  double prev_width = std::numeric_limits<double>::infinity();
  for (const double delta : deltas) {
    OptimizerConfig c = cfg;
    c.delta = delta;
    const OptimizationResult r = optimize(bundle.mesh, bundle.z, bundle.grid, bundle.loads,
                                          bundle.gamma, bundle.law, c);
    double width = 0.0;
    const double w = bundle.mesh.cell_weight();
    for (int cell = 0; cell < bundle.mesh.n_cells(); ++cell)
      for (int q = 0; q < 4; ++q) {
        const double zq = r.z.at_quad(cell, q);
        if (zq > 0.05 && zq < 0.95) width += w;
      }
    width_monotone = width_monotone && (width <= prev_width);
    prev_width = width;
    const IterationRecord& last = r.trace.iters.back();
    t.rows.push_back({delta, last.J, width, double(r.trace.iters.size() - 1), last.grad_norm,
                      r.trace.converged ? 1.0 : 0.0});
  }
  t.summary["band_monotone"] = width_monotone ? 1.0 : 0.0;
  return t;
}

Table run_mm_profile_check(const std::vector<double>& deltas, int cells, double length) {
  Table t;
  t.title = "optimal transition profile energy against the sharp-interface constant";
  t.columns = {"delta", "energy_per_length", "rel_gap_to_sixth"};

  const double height = length / cells;
  const Mesh mesh = build_rect_mesh(cells, 1, length, height,
                                    {{Side::left, -1e9, 1e9, FacetTag::dirichlet}});

  double worst_small = 0.0;
  for (const double delta : deltas) {
    NodalScalarField z(mesh);
    std::vector<char> pinned(mesh.n_nodes(), 0);
    for (int j = 0; j <= mesh.ny; ++j)
      for (int i = 0; i <= mesh.nx; ++i) {
        const double x = i * mesh.hx;
        const int n = mesh.node_id(i, j);
        z[n] = 1.0 / (1.0 + std::exp(-(x - 0.5 * length) / delta));
        if (i == 0) {
          z[n] = 0.0;
          pinned[n] = 1;
        }
        if (i == mesh.nx) {
          z[n] = 1.0;
          pinned[n] = 1;
        }
      }

    // Pinned-end descent on the interface energy alone.
    double energy = modica_mortola(mesh, z, delta);
    double step = 1.0;
    for (int iter = 0; iter < 500; ++iter) {
      Vector G = mm_functional(mesh, z, delta);
      for (int n = 0; n < mesh.n_nodes(); ++n)
        if (pinned[n]) G[n] = 0.0;
      NodalScalarField dir = h1_riesz_solve(mesh, delta, G);
      double gn2 = 0.0;
      for (int n = 0; n < mesh.n_nodes(); ++n) {
        if (pinned[n]) dir[n] = 0.0;
        gn2 += G[n] * dir[n];
      }
      if (gn2 <= 1e-24) break;
      bool accepted = false;
      for (int bt = 0; bt < 40; ++bt) {
        NodalScalarField trial = z;
        for (int n = 0; n < mesh.n_nodes(); ++n) trial[n] -= step * dir[n];
        const double e_trial = modica_mortola(mesh, trial, delta);
        if (e_trial <= energy - 1e-4 * step * gn2) {
          z = trial;
          energy = e_trial;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
      step *= 1.5;
    }

    const double per_length = energy / height;
    const double gap = std::abs(per_length - 1.0 / 6.0) * 6.0;
    if (delta <= length / 50.0) worst_small = std::max(worst_small, gap);
    t.rows.push_back({delta, per_length, gap});
  }
  t.summary["worst_rel_gap_small_delta"] = worst_small;
  t.summary["within_two_percent"] = worst_small <= 0.02 ? 1.0 : 0.0;
  return t;
}

Table run_adjoint_bound_study(const LabBundle& bundle, const std::vector<int>& ks,
                              const std::vector<double>& gammas) {
  Table t;
  t.title = "max dual norm per grid refinement and smoothing";
  t.columns = {"k", "gamma", "max_norm"};

  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  std::vector<double> lx, ly, kx, ky;  // pooled log-log samples
  for (const int k : ks)
    for (const double g : gammas) {
      const EvolutionState st = solve_evolution(bundle.mesh, bundle.z,
                                                TimeGrid{k, bundle.grid.T}, bundle.loads,
                                                RegularizationParam{g}, bundle.law);
      const AdjointState adj =
          solve_adjoint(bundle.mesh, bundle.z, st, bundle.loads, bundle.law);
      double m = 0.0;
      for (int i = 1; i <= k; ++i)
        m = std::max(m, triple_norm(adj.ubar[i], adj.epsbar[i], adj.pbar[i]));
      lo = std::min(lo, m);
      hi = std::max(hi, m);
      lx.push_back(std::log(g));
      ly.push_back(std::log(m));
      kx.push_back(std::log(double(k)));
      ky.push_back(std::log(m));
      t.rows.push_back({double(k), g, m});
    }

  const auto slope = [](const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  t.summary["ratio_max_min"] = hi / lo;
  t.summary["slope_vs_gamma"] = slope(lx, ly);
  t.summary["slope_vs_k"] = slope(kx, ky);
  return t;
}

Table run_lipschitz_in_z_study(const LabBundle& bundle, const std::vector<double>& sizes) {
  Table t;
  t.title = "state sensitivity to sup-norm phase perturbations";
  t.columns = {"eps", "state_distance", "ratio", "skipped"};

  NodalScalarField psi(bundle.mesh);
  for (int j = 0; j <= bundle.mesh.ny; ++j)
    for (int i = 0; i <= bundle.mesh.nx; ++i) {
      const double x = i * bundle.mesh.hx, y = j * bundle.mesh.hy;
      psi[bundle.mesh.node_id(i, j)] = std::cos(2.1 * x + 0.3) * std::cos(1.3 * y - 0.8);
    }
  double sup = 0.0;
  for (double v : psi.data()) sup = std::max(sup, std::abs(v));
  for (int n = 0; n < bundle.mesh.n_nodes(); ++n) psi[n] /= sup;

  const EvolutionState base = solve_evolution(bundle.mesh, bundle.z, bundle.grid,
                                              bundle.loads, bundle.gamma, bundle.law);
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  for (const double e : sizes) {
    if (e == 0.0) {
      t.rows.push_back({0.0, 0.0, 0.0, 1.0});
      continue;
    }
    NodalScalarField ze = bundle.z;
    for (int n = 0; n < bundle.mesh.n_nodes(); ++n) ze[n] += e * psi[n];
    const EvolutionState st = solve_evolution(bundle.mesh, ze, bundle.grid, bundle.loads,
                                              bundle.gamma, bundle.law, {}, &base);
    const double dist = state_distance(bundle.mesh, st, base);
    const double ratio = dist / e;
    rmin = std::min(rmin, ratio);
    rmax = std::max(rmax, ratio);
    t.rows.push_back({e, dist, ratio, 0.0});
  }
  t.summary["ratio_min"] = std::isfinite(rmin) ? rmin : 0.0;
  t.summary["ratio_max"] = rmax;
  t.summary["ratio_spread"] = (rmin > 0.0 && std::isfinite(rmin)) ? rmax / rmin : 0.0;
  return t;
}

}  // namespace plastopt
