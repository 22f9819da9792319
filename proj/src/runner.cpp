#include "plastopt/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>

#include "plastopt/errors.hpp"
#include "plastopt/local_return.hpp"
#include "plastopt/threading.hpp"

namespace fs = std::filesystem;

namespace plastopt {

namespace {

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  double lap() {
    const auto t1 = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(t1 - t0).count();
    t0 = t1;
    return s;
  }
};

void add_artifact(Manifest& m, const fs::path& dir, const std::string& rel) {
  const fs::path p = dir / rel;
  m.artifacts.push_back({rel, static_cast<unsigned long long>(fs::file_size(p)),
                         hash_file(p.string())});
}

double slack_scale(const Mesh& mesh, const NodalScalarField& z, const MaterialLaw& law,
                   const EvolutionState& st, const LoadProgram& loads) {
  double scale = 1.0;
  for (int i = 0; i <= st.grid.k; ++i)
    scale = std::max(scale, std::abs(energy(mesh, z, law, st.steps[i],
                                            sample_loads(loads, st.grid.node(i)))));
  return scale;
}

// Forward run: per-node snapshots plus one trajectory table.
void do_forward(const RunConfig& cfg, const fs::path& dir, Manifest& m) {
  Stopwatch sw;
  const Mesh mesh = build_mesh(cfg.mesh);
  const NodalScalarField z = initial_phase(mesh, cfg);
  const LoadProgram loads = make_loads(cfg);
  const TimeGrid grid{cfg.k, cfg.T};
  m.wall_times.emplace_back("setup", sw.lap());

  const EvolutionState st = solve_evolution(mesh, z, grid, loads, cfg.gamma, cfg.law);
  m.wall_times.emplace_back("solve", sw.lap());

  Table traj;
  traj.title = "forward trajectory";
  traj.columns = {"t", "u_h1", "eps_l2", "p_l2", "dissipation_increment", "energy_slack"};
  const auto slack = energy_inequality_slack(mesh, z, cfg.law, st, loads);
  for (int i = 0; i <= grid.k; ++i)
    traj.rows.push_back({grid.node(i), h1_norm(st.steps[i].u), l2_norm(st.steps[i].eps),
                         l2_norm(st.steps[i].p),
                         i > 0 ? st.dissipation_increment[i - 1] : 0.0,
                         i > 0 ? slack[i - 1] : 0.0});
  double total_diss = 0.0, min_slack = 0.0;
  for (double d : st.dissipation_increment) total_diss += d;
  for (double s : slack) min_slack = std::min(min_slack, s);
  traj.summary["total_dissipation"] = total_diss;
  traj.summary["min_energy_slack"] = min_slack;
  write_csv((dir / "trajectory.csv").string(), traj);
  add_artifact(m, dir, "trajectory.csv");

  for (int i = 0; i <= grid.k; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "state_%03d.vtk", i);
    write_vtk((dir / name).string(), mesh, z, cfg.law, st.steps[i]);
    add_artifact(m, dir, name);
  }
  m.wall_times.emplace_back("write", sw.lap());

  m.summary.emplace_back("final_u_h1", h1_norm(st.steps.back().u));
  m.summary.emplace_back("final_p_l2", l2_norm(st.steps.back().p));
  m.summary.emplace_back("total_dissipation", total_diss);
  m.summary.emplace_back("min_energy_slack", min_slack);

  const double scale = slack_scale(mesh, z, cfg.law, st, loads);
  if (min_slack < -1e-8 * scale) {
    m.errors.push_back("energy inequality violated: slack " + format_float(min_slack) +
                       " at scale " + format_float(scale));
    m.exit_code = 2;
  }
}

void append_trace(Table& t, int stage, double gamma, const OptimizationTrace& trace) {
  for (const IterationRecord& r : trace.iters)
    t.rows.push_back({double(stage), gamma, double(r.iter), r.J, r.breakdown.terminal,
                      r.breakdown.increments, r.breakdown.mm, r.grad_norm, r.step,
                      double(r.backtracks), r.z_min, r.z_max});
}

void do_optimize(const RunConfig& cfg, const fs::path& dir, Manifest& m) {
  Stopwatch sw;
  const Mesh mesh = build_mesh(cfg.mesh);
  NodalScalarField z0 = initial_phase(mesh, cfg);
  const LoadProgram loads = make_loads(cfg);
  const TimeGrid grid{cfg.k, cfg.T};
  m.wall_times.emplace_back("setup", sw.lap());

  Table trace;
  trace.title = "descent trace";
  trace.columns = {"stage", "gamma", "iter", "J",          "terminal", "increments",
                   "mm",    "grad_norm", "step", "backtracks", "z_min",    "z_max"};

  NodalScalarField z_final;
  const EvolutionState* final_state = nullptr;
  RegularizationParam final_gamma = cfg.gamma;
  bool converged = false;

  OptimizationResult single;
  ContinuationResult cont;
  if (cfg.gamma_schedule.empty()) {
    if (!cfg.gamma.finite())
      throw ConfigError({"optimize mode needs a finite gamma or a gamma_schedule"});
    single = optimize(mesh, std::move(z0), grid, loads, cfg.gamma, cfg.law, cfg.optimizer);
    append_trace(trace, 0, cfg.gamma.gamma, single.trace);
    z_final = single.z;
    final_state = &single.state;
    converged = single.trace.converged;
    m.summary.emplace_back("stages", 1.0);
  } else {
    cont = gamma_continuation(mesh, std::move(z0), grid, loads, cfg.gamma_schedule, cfg.law,
                              cfg.optimizer);
    Table stages;
    stages.title = "continuation stages";
    stages.columns = {"stage", "gamma", "iterations", "J", "grad_norm", "converged",
                      "z_shift_h1"};
    for (std::size_t s = 0; s < cont.stages.size(); ++s) {
      const ContinuationStage& st = cont.stages[s];
      append_trace(trace, static_cast<int>(s), st.gamma, st.result.trace);
      const IterationRecord& last = st.result.trace.iters.back();
      stages.rows.push_back({double(s), st.gamma, double(st.result.trace.iters.size() - 1),
                             last.J, last.grad_norm,
                             st.result.trace.converged ? 1.0 : 0.0, st.z_shift_h1});
    }
    write_csv((dir / "stages.csv").string(), stages);
    add_artifact(m, dir, "stages.csv");
    z_final = cont.z;
    final_state = &cont.stages.back().result.state;
    final_gamma = RegularizationParam{cfg.gamma_schedule.back()};
    converged = cont.stages.back().result.trace.converged;
    m.summary.emplace_back("stages", double(cont.stages.size()));
    m.summary.emplace_back("J_exact_dissipation", cont.J_exact);
  }
  m.wall_times.emplace_back("optimize", sw.lap());

  write_csv((dir / "trace.csv").string(), trace);
  add_artifact(m, dir, "trace.csv");
  write_vtk((dir / "z_final.vtk").string(), mesh, z_final, cfg.law, final_state->steps.back());
  add_artifact(m, dir, "z_final.vtk");

  // Stationarity bookkeeping at the returned design.
  const AdjointState adj =
      solve_adjoint(mesh, z_final, *final_state, loads, cfg.law,
                    final_gamma.finite() ? std::optional<RegularizationParam>{}
                                         : std::optional<RegularizationParam>{
                                               RegularizationParam{1e4}});
  const OptimalityReport rep =
      optimality_residuals(mesh, z_final, *final_state, adj, cfg.law);
  m.wall_times.emplace_back("residuals", sw.lap());

  const IterationRecord& last_rec =
      (cfg.gamma_schedule.empty() ? single.trace : cont.stages.back().result.trace)
          .iters.back();
  m.summary.emplace_back("J_final", last_rec.J);
  m.summary.emplace_back("grad_norm_final", last_rec.grad_norm);
  m.summary.emplace_back("converged", converged ? 1.0 : 0.0);
  m.summary.emplace_back("flow_l1", rep.flow_l1);
  m.summary.emplace_back("ortho_l1", rep.ortho_l1);
  m.summary.emplace_back("stick_l1", rep.stick_l1);

  const double scale = slack_scale(mesh, z_final, cfg.law, *final_state, loads);
  double min_slack = 0.0;
  for (double s : energy_inequality_slack(mesh, z_final, cfg.law, *final_state, loads))
    min_slack = std::min(min_slack, s);
  if (min_slack < -1e-8 * scale) {
    m.errors.push_back("energy inequality violated at the final design: slack " +
                       format_float(min_slack));
    m.exit_code = 2;
  }
}

void do_lab(const RunConfig& cfg, const fs::path& dir, Manifest& m) {
  Stopwatch sw;
  const std::string& study = cfg.lab.study;
  if (study.empty())
    throw ConfigError({"lab.study: required for lab mode"});

  Table t;
  if (study == "mm_profile") {
    t = run_mm_profile_check(cfg.lab.deltas, cfg.lab.cells, cfg.lab.length);
  } else {
    LabBundle b{build_mesh(cfg.mesh), {}, make_loads(cfg), cfg.law,
                TimeGrid{cfg.k, cfg.T}, cfg.gamma, cfg.delta};
    b.z = initial_phase(b.mesh, cfg);
    if (study == "gamma_sweep") t = run_gamma_sweep(b, cfg.lab.gammas);
    else if (study == "timestep_sweep") t = run_timestep_sweep(b, cfg.lab.ks);
    else if (study == "delta_sweep") t = run_delta_sweep(b, cfg.lab.deltas, cfg.optimizer);
    else if (study == "adjoint_bounds") t = run_adjoint_bound_study(b, cfg.lab.ks, cfg.lab.gammas);
    else if (study == "lipschitz") t = run_lipschitz_in_z_study(b, cfg.lab.sizes);
    else throw ConfigError({"lab.study: unknown study '" + study + "'"});
  }
  m.wall_times.emplace_back("study", sw.lap());

  const std::string name = study + ".csv";
  write_csv((dir / name).string(), t);
  add_artifact(m, dir, name);
  for (const auto& [key, value] : t.summary) m.summary.emplace_back(key, value);
  m.wall_times.emplace_back("write", sw.lap());
}

// ---- self check fixture and properties ----

struct CheckFixture {
  Mesh mesh;
  NodalScalarField z;
  LoadProgram loads;
  MaterialLaw law;
  TimeGrid grid{3, 1.0};
  RegularizationParam gamma{100.0};
  double delta = 0.1;
};

CheckFixture check_fixture() {
  CheckFixture f{build_rect_mesh(4, 2, 2.0, 1.0,
                                 {{Side::left, -1e9, 1e9, FacetTag::dirichlet},
                                  {Side::right, -1e9, 1e9, FacetTag::neumann}}),
                 {}, {}, {}};
  f.law.mu1 = 1.0;
  f.law.lambda1 = 0.7;
  f.law.h1 = 0.5;
  f.law.d1 = 0.3;
  f.law.ell1 = 1.0;
  f.law.mu0 = 1e-3;
  f.law.lambda0 = 7e-4;
  f.law.h0 = 5e-4;
  f.law.d0 = 3e-4;
  f.law.ell0 = 1e-3;
  f.loads.f = [](double, double, double, double* o) { o[0] = o[1] = 0.0; };
  f.loads.w = f.loads.f;
  f.loads.g = [](double t, double, double, double* o) {
    o[0] = 0.0;
    o[1] = -0.3 * t;
  };
  f.z = NodalScalarField(f.mesh);
  for (int j = 0; j <= f.mesh.ny; ++j)
    for (int i = 0; i <= f.mesh.nx; ++i)
      f.z[f.mesh.node_id(i, j)] =
          0.55 + 0.3 * std::cos(1.3 * i * f.mesh.hx) * std::cos(0.9 * j * f.mesh.hy);
  return f;
}

DevTensor random_dev(std::mt19937_64& rng, double amp) {
  std::uniform_real_distribution<double> u(-amp, amp);
  double g[4] = {u(rng), u(rng), u(rng), u(rng)};
  return dev_project(symmetrize(2, g));
}

SymTensor random_sym(std::mt19937_64& rng, double amp) {
  std::uniform_real_distribution<double> u(-amp, amp);
  double g[4] = {u(rng), u(rng), u(rng), u(rng)};
  return symmetrize(2, g);
}

CheckResult check_smoothing_bounds(std::mt19937_64& rng) {
  double worst = 0.0;
  for (const double g : {1.0, 100.0}) {
    const RegularizationParam gamma{g};
    for (int s = 0; s < 500; ++s) {
      const DevTensor a = random_dev(rng, 1.5), b = random_dev(rng, 1.5);
      const double lip = std::abs(h_gamma(a, gamma) - h_gamma(b, gamma)) -
                         frobenius_norm(a - b);
      const double gap_lo = -(frobenius_norm(a) - h_gamma(a, gamma));
      const double gap_hi = frobenius_norm(a) - h_gamma(a, gamma) - 1.0 / g;
      const double grad = frobenius_norm(grad_h_gamma(a, gamma)) - 1.0;
      worst = std::max({worst, lip, gap_lo, gap_hi, grad});
    }
  }
  return {"smoothing bounds (Lipschitz, gap, gradient)", worst <= 1e-12,
          "worst excess " + format_float(worst)};
}

CheckResult check_return_map(std::mt19937_64& rng, const MaterialLaw& law) {
  std::uniform_real_distribution<double> uz(0.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < 200; ++s) {
    const double z = uz(rng);
    const DevTensor P = random_dev(rng, 0.5);
    const SymTensor E = random_sym(rng, 1.0);
    LocalPlasticContext ctx{z, RegularizationParam{1e8}, P, &law};
    const double mu = coeff(law, Coeff::mu, z);
    const DevTensor p_reg = F_inverse(ctx, (2.0 * mu) * dev_project(E));
    const DevTensor p_exact = radial_return(z, law, P, E).p;
    worst = std::max(worst,
                     frobenius_norm(p_reg - p_exact) / (1.0 + frobenius_norm(p_exact)));
  }
  return {"return-map equivalence at gamma 1e8", worst <= 1e-6,
          "worst normalized gap " + format_float(worst)};
}

CheckResult check_energy_bound(const CheckFixture& f, const EvolutionState& st) {
  const double scale = slack_scale(f.mesh, f.z, f.law, st, f.loads);
  double min_slack = 0.0;
  for (double s : energy_inequality_slack(f.mesh, f.z, f.law, st, f.loads))
    min_slack = std::min(min_slack, s);
  return {"energy inequality slack", min_slack >= -1e-8 * scale,
          "min slack " + format_float(min_slack)};
}

CheckResult check_stability(const CheckFixture& f, const EvolutionState& st,
                            unsigned long long seed) {
  const double scale = slack_scale(f.mesh, f.z, f.law, st, f.loads);
  double worst = -1e300;
  for (int i = 1; i <= f.grid.k; ++i)
    worst = std::max(worst, stability_violation(f.mesh, f.z, f.law, st.gamma,
                                                st.steps[i - 1], st.steps[i],
                                                sample_loads(f.loads, f.grid.node(i)), 20,
                                                0.1, seed + i));
  return {"incremental stability against competitors", worst <= 1e-9 * scale,
          "worst competitor margin " + format_float(worst)};
}

CheckResult check_duality(const CheckFixture& f, const EvolutionState& st,
                          std::mt19937_64& rng) {
  const AdjointState adj = solve_adjoint(f.mesh, f.z, st, f.loads, f.law);
  const ReducedGradient G =
      reduced_gradient(f.mesh, f.z, st, adj, f.loads, f.law, f.delta);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 3; ++rep) {
    NodalScalarField phi(f.mesh);
    for (int n = 0; n < f.mesh.n_nodes(); ++n) phi[n] = u(rng);
    const SensitivityState sens =
        solve_forward_sensitivity(f.mesh, f.z, st, phi, f.loads, f.law, f.delta);
    double pair = 0.0;
    for (int n = 0; n < f.mesh.n_nodes(); ++n) pair += G.functional[n] * phi[n];
    worst = std::max(worst, std::abs(pair - sens.dJ) /
                                std::max({1.0, std::abs(pair), std::abs(sens.dJ)}));
  }
  return {"adjoint gradient matches forward sensitivity", worst <= 1e-8,
          "worst relative gap " + format_float(worst)};
}

CheckResult check_gradient_fd(const CheckFixture& f, const EvolutionState& st,
                              std::mt19937_64& rng) {
  const AdjointState adj = solve_adjoint(f.mesh, f.z, st, f.loads, f.law);
  const ReducedGradient G =
      reduced_gradient(f.mesh, f.z, st, adj, f.loads, f.law, f.delta);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double t = 1e-5;
  double worst = 0.0;
  for (int rep = 0; rep < 2; ++rep) {
    NodalScalarField phi(f.mesh);
    for (int n = 0; n < f.mesh.n_nodes(); ++n) phi[n] = u(rng);
    double pair = 0.0;
    for (int n = 0; n < f.mesh.n_nodes(); ++n) pair += G.functional[n] * phi[n];
    double Jpm[2];
    for (int sgn = 0; sgn < 2; ++sgn) {
      NodalScalarField zt = f.z;
      for (int n = 0; n < f.mesh.n_nodes(); ++n) zt[n] += (sgn ? -t : t) * phi[n];
      const EvolutionState stt =
          solve_evolution(f.mesh, zt, f.grid, f.loads, f.gamma, f.law, {}, &st);
      Jpm[sgn] = objective(f.mesh, zt, stt, f.loads, f.law, f.delta).total;
    }
    const double fd = (Jpm[0] - Jpm[1]) / (2.0 * t);
    worst = std::max(worst, std::abs(pair - fd) / std::max(1.0, std::abs(fd)));
  }
  return {"gradient matches finite differences", worst <= 1e-3,
          "worst relative gap " + format_float(worst)};
}

CheckResult check_multiplier_identity(const CheckFixture& f, const EvolutionState& st) {
  const AdjointState adj = solve_adjoint(f.mesh, f.z, st, f.loads, f.law);
  double worst = 0.0;
  for (int i = 1; i <= f.grid.k; ++i)
    for (int cell = 0; cell < f.mesh.n_cells(); ++cell)
      for (int q = 0; q < 4; ++q) {
        const double zq = f.z.at_quad(cell, q);
        const DevTensor want =
            dev_project(elasticity_apply(f.law, zq, adj.epsbar[i].at(cell, q))) -
            coeff(f.law, Coeff::h, zq) * adj.pbar[i].at(cell, q);
        worst = std::max(worst, frobenius_norm(adj.pi[i].at(cell, q) - want));
      }
  return {"dual multiplier identity", worst <= 1e-10, "worst gap " + format_float(worst)};
}

CheckResult check_interface_flats(const CheckFixture& f) {
  const NodalScalarField z0(f.mesh, 0.0), z1(f.mesh, 1.0);
  const bool ok =
      modica_mortola(f.mesh, z0, f.delta) == 0.0 && modica_mortola(f.mesh, z1, f.delta) == 0.0;
  return {"interface energy vanishes on pure phases", ok, "exact zeros required"};
}

}  // namespace

std::vector<CheckResult> self_check(unsigned long long seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  const CheckFixture f = check_fixture();
  const EvolutionState st = solve_evolution(f.mesh, f.z, f.grid, f.loads, f.gamma, f.law);

  std::vector<CheckResult> out;
  out.push_back(check_smoothing_bounds(rng));
  out.push_back(check_return_map(rng, f.law));
  out.push_back(check_energy_bound(f, st));
  out.push_back(check_stability(f, st, seed));
  out.push_back(check_duality(f, st, rng));
  out.push_back(check_gradient_fd(f, st, rng));
  out.push_back(check_multiplier_identity(f, st));
  out.push_back(check_interface_flats(f));
  return out;
}

RunOutcome run_check(unsigned long long seed, const std::string& out_dir, std::ostream& log) {
  RunOutcome outcome;
  Manifest& m = outcome.manifest;
  m.mode = "check";
  m.build = build_description();
  m.threads = num_threads();

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  Stopwatch sw;

  std::vector<CheckResult> results;
  try {
    results = self_check(seed);
  } catch (const std::exception& e) {
    m.errors.push_back(e.what());
    m.exit_code = 2;
  }

  int failed = 0;
  std::ofstream report((dir / "check_report.txt").string(), std::ios::binary);
  for (const CheckResult& r : results) {
    failed += r.passed ? 0 : 1;
    const std::string line =
        std::string(r.passed ? "[ok]   " : "[FAIL] ") + r.name + " (" + r.detail + ")";
    log << line << "\n";
    report << line << "\n";
  }
  report.close();
  add_artifact(m, dir, "check_report.txt");
  m.wall_times.emplace_back("total", sw.lap());
  m.summary.emplace_back("checks", double(results.size()));
  m.summary.emplace_back("failed", double(failed));
  if (failed > 0 || results.empty()) m.exit_code = 2;

  outcome.manifest_path = (dir / "manifest.json").string();
  write_manifest(outcome.manifest_path, m);
  outcome.exit_code = m.exit_code;
  return outcome;
}

RunOutcome run(const RunConfig& cfg, const std::string& mode, const std::string& out_dir,
               const std::string& config_path) {
  RunOutcome outcome;
  Manifest& m = outcome.manifest;
  m.mode = mode == "lab" ? "lab:" + cfg.lab.study : mode;
  m.config_path = config_path;
  m.build = build_description();
  m.threads = num_threads();
  try {
    m.config_hash = hash_file(config_path);
  } catch (const std::exception&) {
    m.config_hash = "";
  }

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  Stopwatch total;

  try {
    if (mode == "forward") do_forward(cfg, dir, m);
    else if (mode == "optimize") do_optimize(cfg, dir, m);
    else if (mode == "lab") do_lab(cfg, dir, m);
    else throw std::invalid_argument("unknown mode '" + mode + "'");
  } catch (const ConfigError& e) {
    for (const auto& v : e.violations) m.errors.push_back(v);
    m.exit_code = 1;
  } catch (const std::exception& e) {
    m.errors.push_back(e.what());
    m.exit_code = 2;
  }

  m.wall_times.emplace_back("total", total.lap());
  outcome.manifest_path = (dir / "manifest.json").string();
  write_manifest(outcome.manifest_path, m);
  outcome.exit_code = m.exit_code;
  return outcome;
}

}  // namespace plastopt
