#include "plastopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plastopt/errors.hpp"

namespace plastopt {

std::vector<std::string> validate(const OptimizerConfig& cfg) {
  std::vector<std::string> bad;
  if (cfg.max_outer_iters < 0) bad.push_back("max_outer_iters must be nonnegative");
  if (!(cfg.armijo_c1 > 0.0 && cfg.armijo_c1 < 1.0))
    bad.push_back("armijo_c1 must lie in (0,1)");
  if (!(cfg.initial_step > 0.0)) bad.push_back("initial_step must be positive");
  if (!(cfg.shrink > 0.0 && cfg.shrink < 1.0)) bad.push_back("shrink must lie in (0,1)");
  if (!(cfg.grow >= 1.0)) bad.push_back("grow must be at least 1");
  if (cfg.max_backtrack < 0) bad.push_back("max_backtrack must be nonnegative");
  if (!(cfg.grad_tol >= 0.0)) bad.push_back("grad_tol must be nonnegative");
  if (!(cfg.delta > 0.0)) bad.push_back("delta must be positive");
  if (cfg.volume_penalty < 0.0) bad.push_back("volume_penalty must be nonnegative");
  return bad;
}

namespace {

void check_config(const OptimizerConfig& cfg) {
  std::vector<std::string> bad = validate(cfg);
  if (!bad.empty()) throw ConfigError(bad);
}

struct VolumeHook {
  double weight = 0.0;
  double target = 0.0;
  Vector shape;  // integral of each nodal basis function

  explicit VolumeHook(const Mesh& mesh, const OptimizerConfig& cfg)
      : weight(cfg.volume_penalty), target(cfg.volume_target) {
    if (weight == 0.0) return;
    shape = Vector::Zero(mesh.n_nodes());
    const double w = mesh.cell_weight();
    for (int cell = 0; cell < mesh.n_cells(); ++cell)
      for (int q = 0; q < 4; ++q)
        for (int a = 0; a < 4; ++a)
          shape[mesh.cells[cell][a]] += w * mesh.tables.value[q][a];
  }

  double volume(const NodalScalarField& z) const {
    double v = 0.0;
    for (int a = 0; a < z.size(); ++a) v += shape[a] * z[a];
    return v;
  }
  double penalty(const NodalScalarField& z) const {
    if (weight == 0.0) return 0.0;
    const double gap = volume(z) - target;
    return 0.5 * weight * gap * gap;
  }
  void add_gradient(const NodalScalarField& z, Vector& G) const {
    if (weight == 0.0) return;
    const double gap = volume(z) - target;
    G += (weight * gap) * shape;
  }
};

void record_range(const NodalScalarField& z, IterationRecord& r) {
  r.z_min = std::numeric_limits<double>::infinity();
  r.z_max = -r.z_min;
  for (double v : z.data()) {
    r.z_min = std::min(r.z_min, v);
    r.z_max = std::max(r.z_max, v);
  }
}

}  // namespace

OptimizationResult optimize(const Mesh& mesh, NodalScalarField z0, const TimeGrid& grid,
                            const LoadProgram& loads, RegularizationParam gamma,
                            const MaterialLaw& law, const OptimizerConfig& cfg) {
  check_config(cfg);
  if (!all_finite(z0)) throw std::invalid_argument("initial phase field is not finite");
  const VolumeHook hook(mesh, cfg);

  OptimizationResult out;
  out.z = std::move(z0);
  out.state = solve_evolution(mesh, out.z, grid, loads, gamma, law);
  ObjectiveBreakdown bd = objective(mesh, out.z, out.state, loads, law, cfg.delta);
  double J = bd.total + hook.penalty(out.z);

  double step = cfg.initial_step;
  for (int iter = 0; iter <= cfg.max_outer_iters; ++iter) {
    const AdjointState adj = solve_adjoint(mesh, out.z, out.state, loads, law);
    ReducedGradient grad = reduced_gradient(mesh, out.z, out.state, adj, loads, law, cfg.delta);
    hook.add_gradient(out.z, grad.functional);
    if (hook.weight != 0.0) grad.riesz = h1_riesz_solve(mesh, cfg.delta, grad.functional);

    // Squared weighted H1 norm of the Riesz representative; also the descent
    // rate of the step direction.
    double gn2 = 0.0;
    for (int a = 0; a < mesh.n_nodes(); ++a) gn2 += grad.functional[a] * grad.riesz[a];
    gn2 = std::max(gn2, 0.0);

    IterationRecord rec;
    rec.iter = iter;
    rec.J = J;
    rec.breakdown = bd;
    rec.grad_norm = std::sqrt(gn2);
    record_range(out.z, rec);

    if (rec.grad_norm <= cfg.grad_tol) {
      out.trace.iters.push_back(rec);
      out.trace.converged = true;
      out.trace.stop_reason = "gradient norm below tolerance";
      return out;
    }
    if (iter == cfg.max_outer_iters) {
      out.trace.iters.push_back(rec);
      out.trace.stop_reason = "iteration cap reached";
      return out;
    }

    bool accepted = false;
    double s = step;
    NodalScalarField z_trial;
    EvolutionState state_trial;
    ObjectiveBreakdown bd_trial;
    double J_trial = 0.0;
    for (int bt = 0; bt <= cfg.max_backtrack; ++bt) {
      z_trial = out.z;
      for (int a = 0; a < mesh.n_nodes(); ++a) {
        z_trial[a] -= s * grad.riesz[a];
        if (cfg.clamp) z_trial[a] = std::clamp(z_trial[a], 0.0, 1.0);
      }
      state_trial = solve_evolution(mesh, z_trial, grid, loads, gamma, law, {}, &out.state);
      bd_trial = objective(mesh, z_trial, state_trial, loads, law, cfg.delta);
      J_trial = bd_trial.total + hook.penalty(z_trial);
      if (J_trial <= J - cfg.armijo_c1 * s * gn2) {
        accepted = true;
        rec.backtracks = bt;
        break;
      }
      s *= cfg.shrink;
    }
    if (!accepted) {
      out.trace.iters.push_back(rec);
      out.trace.stop_reason = "line search exhausted its backtracks";
      return out;
    }

    rec.step = s;
    out.trace.iters.push_back(rec);
    out.z = std::move(z_trial);
    out.state = std::move(state_trial);
    bd = bd_trial;
    J = J_trial;
    step = s * cfg.grow;
  }
  return out;  // unreachable; the cap branch returns inside the loop
}

ContinuationResult gamma_continuation(const Mesh& mesh, NodalScalarField z0,
                                      const TimeGrid& grid, const LoadProgram& loads,
                                      const std::vector<double>& schedule,
                                      const MaterialLaw& law, const OptimizerConfig& cfg) {
  std::vector<std::string> bad;
  if (schedule.empty()) bad.push_back("smoothing schedule is empty");
  for (std::size_t m = 0; m < schedule.size(); ++m) {
    if (!(schedule[m] > 0.0) || !std::isfinite(schedule[m]))
      bad.push_back("schedule entry " + std::to_string(m) + " must be positive and finite");
    if (m > 0 && !(schedule[m] > schedule[m - 1]))
      bad.push_back("schedule must be strictly increasing at entry " + std::to_string(m));
  }
  if (!bad.empty()) throw ConfigError(bad);

  ContinuationResult out;
  NodalScalarField z = std::move(z0);
  for (std::size_t m = 0; m < schedule.size(); ++m) {
    ContinuationStage stage;
    stage.gamma = schedule[m];
    stage.result =
        optimize(mesh, z, grid, loads, RegularizationParam{schedule[m]}, law, cfg);
    if (m > 0) {
      NodalScalarField diff(mesh);
      for (int a = 0; a < mesh.n_nodes(); ++a) diff[a] = stage.result.z[a] - z[a];
      stage.z_shift_h1 = h1_norm(diff);
    }
    z = stage.result.z;
    out.stages.push_back(std::move(stage));
  }

  const OptimizationResult& last = out.stages.back().result;
  out.z = last.z;
  out.J_final = objective(mesh, out.z, last.state, loads, law, cfg.delta).total;

  const EvolutionState exact = solve_evolution(mesh, out.z, grid, loads,
                                               RegularizationParam::exact(), law, {},
                                               &last.state);
  out.J_exact = objective(mesh, out.z, exact, loads, law, cfg.delta).total;
  return out;
}

}  // namespace plastopt
