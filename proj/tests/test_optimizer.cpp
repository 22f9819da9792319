#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "plastopt/errors.hpp"
#include "plastopt/optimizer.hpp"

using namespace plastopt;

namespace {

std::vector<TagRule> left_clamp() {
  return {{Side::left, -1e9, 1e9, FacetTag::dirichlet},
          {Side::right, -1e9, 1e9, FacetTag::neumann}};
}

MaterialLaw base_law() {
  MaterialLaw law;
  law.mu1 = 1.0;
  law.lambda1 = 0.7;
  law.h1 = 0.5;
  law.d1 = 0.3;
  law.ell1 = 1.0;
  law.mu0 = 1e-3 * law.mu1;
  law.lambda0 = 1e-3 * law.lambda1;
  law.h0 = 1e-3 * law.h1;
  law.d0 = 1e-3 * law.d1;
  law.ell0 = 1e-3;
  return law;
}

LoadProgram zero_program() {
  LoadProgram lp;
  lp.f = [](double, double, double, double* o) { o[0] = o[1] = 0.0; };
  lp.g = lp.f;
  lp.w = lp.f;
  lp.T = 1.0;
  return lp;
}

LoadProgram traction_ramp(double amplitude) {
  LoadProgram lp = zero_program();
  lp.g = [amplitude](double t, double, double, double* o) {
    o[0] = 0.0;
    o[1] = -amplitude * t;
  };
  return lp;
}

NodalScalarField perturbed_half(const Mesh& m) {
  NodalScalarField z(m);
  for (int j = 0; j <= m.ny; ++j)
    for (int i = 0; i <= m.nx; ++i) {
      const double x = i * m.hx, y = j * m.hy;
      z[m.node_id(i, j)] = 0.5 + 0.2 * std::sin(3.1 * x + 0.4) * std::cos(2.2 * y);
    }
  return z;
}

// The Armijo inequality replayed from the stored trace: every accepted step
// must show the promised decrease against the recorded gradient norm.
void check_descent_records(const OptimizationTrace& tr, const OptimizerConfig& cfg) {
  for (std::size_t i = 0; i + 1 < tr.iters.size(); ++i) {
    const IterationRecord& r = tr.iters[i];
    CHECK(r.step > 0.0);
    CHECK(tr.iters[i + 1].J <= r.J - cfg.armijo_c1 * r.step * r.grad_norm * r.grad_norm);
  }
}

}  // namespace

TEST_CASE("configuration errors list every violation") {
  const Mesh m = build_rect_mesh(2, 2, 1.0, 1.0, left_clamp());
  OptimizerConfig cfg;
  cfg.armijo_c1 = 0.0;
  cfg.shrink = 1.2;
  cfg.delta = -0.1;
  try {
    optimize(m, NodalScalarField(m, 0.5), TimeGrid{1, 1.0}, zero_program(),
             RegularizationParam{50.0}, base_law(), cfg);
    FAIL("ConfigError expected");
  } catch (const ConfigError& e) {
    CHECK(e.violations.size() == 3);
  }

  OptimizerConfig good;
  try {
    gamma_continuation(m, NodalScalarField(m, 0.5), TimeGrid{1, 1.0}, zero_program(),
                       {10.0, 10.0, -3.0}, base_law(), good);
    FAIL("ConfigError expected");
  } catch (const ConfigError& e) {
    // the stalled entry, the negative entry, and the decrease it causes
    CHECK(e.violations.size() == 3);
  }
  CHECK_THROWS_AS(gamma_continuation(m, NodalScalarField(m, 0.5), TimeGrid{1, 1.0},
                                     zero_program(), {}, base_law(), good),
                  ConfigError);
}

TEST_CASE("interface-only descent stops at critical points of the double well") {
  const Mesh m = build_rect_mesh(6, 4, 1.5, 1.0, left_clamp());
  const LoadProgram none = zero_program();
  OptimizerConfig cfg;
  cfg.delta = 0.2;
  cfg.grad_tol = 1e-8;
  cfg.max_outer_iters = 400;

  // The flat half profile is itself critical: no iteration happens.
  const OptimizationResult flat = optimize(m, NodalScalarField(m, 0.5), TimeGrid{1, 1.0},
                                           none, RegularizationParam{50.0}, base_law(), cfg);
  CHECK(flat.trace.converged);
  CHECK(flat.trace.iters.size() == 1);
  CHECK(flat.trace.iters[0].J ==
        doctest::Approx(1.5 / (32.0 * cfg.delta)).epsilon(1e-13));

  // A perturbed start descends monotonically to a nearby critical point.
  const OptimizationResult r = optimize(m, perturbed_half(m), TimeGrid{1, 1.0}, none,
                                        RegularizationParam{50.0}, base_law(), cfg);
  CHECK(r.trace.converged);
  CHECK(r.trace.iters.size() > 1);
  check_descent_records(r.trace, cfg);
  CHECK(r.trace.iters.back().grad_norm <= cfg.grad_tol);
  CHECK(r.trace.iters.back().z_min >= -1e-6);
  CHECK(r.trace.iters.back().z_max <= 1.0 + 1e-6);
  // Without loads the objective is the interface energy of the iterate.
  CHECK(r.trace.iters.back().J == doctest::Approx(modica_mortola(m, r.z, cfg.delta)));
}

TEST_CASE("line search failure returns the best iterate with a diagnostic") {
  const Mesh m = build_rect_mesh(4, 3, 1.0, 1.0, left_clamp());
  OptimizerConfig cfg;
  cfg.delta = 0.2;
  cfg.initial_step = 1e6;
  cfg.max_backtrack = 0;
  const NodalScalarField z0 = perturbed_half(m);
  const OptimizationResult r = optimize(m, z0, TimeGrid{1, 1.0}, zero_program(),
                                        RegularizationParam{50.0}, base_law(), cfg);
  CHECK(!r.trace.converged);
  CHECK(r.trace.stop_reason == "line search exhausted its backtracks");
  for (int a = 0; a < m.n_nodes(); ++a) CHECK(r.z[a] == z0[a]);
}

TEST_CASE("single element elastic optimum matches a brute-force scan") {
  const Mesh m = build_rect_mesh(1, 1, 1.0, 1.0, left_clamp());
  MaterialLaw law = base_law();
  law.d1 = 1e9;
  law.d0 = 1e6;
  const LoadProgram loads = traction_ramp(0.4);
  const TimeGrid grid{1, 1.0};
  const RegularizationParam gamma{100.0};
  const double delta = 0.1;

  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s <= 1000; ++s) {
    const NodalScalarField zc(m, s / 1000.0);
    const EvolutionState st = solve_evolution(m, zc, grid, loads, gamma, law);
    best = std::min(best, objective(m, zc, st, loads, law, delta).total);
  }

  OptimizerConfig cfg;
  cfg.delta = delta;
  cfg.grad_tol = 1e-8;
  cfg.max_outer_iters = 300;
  const OptimizationResult r =
      optimize(m, NodalScalarField(m, 0.5), grid, loads, gamma, law, cfg);
  CHECK(r.trace.converged);
  const double J_opt = r.trace.iters.back().J;
  CHECK(std::abs(J_opt - best) <= 1e-6 * std::abs(best));
}

TEST_CASE("first descent rate is stable under mesh refinement") {
  const MaterialLaw law = base_law();
  const LoadProgram loads = traction_ramp(0.3);
  const TimeGrid grid{2, 1.0};
  const RegularizationParam gamma{80.0};
  const double delta = 0.15;

  std::vector<double> rates;
  for (const int n : {8, 16, 32}) {
    const Mesh m = build_rect_mesh(n, n / 2, 2.0, 1.0, left_clamp());
    const NodalScalarField z(m, 0.4);
    const EvolutionState st = solve_evolution(m, z, grid, loads, gamma, law);
    const AdjointState adj = solve_adjoint(m, z, st, loads, law);
    const ReducedGradient g = reduced_gradient(m, z, st, adj, loads, law, delta);
    double gn2 = 0.0;
    for (int a = 0; a < m.n_nodes(); ++a) gn2 += g.functional[a] * g.riesz[a];
    rates.push_back(gn2);
  }
  CHECK(std::abs(rates[2] - rates[1]) < std::abs(rates[1] - rates[0]));
  CHECK(rates[2] == doctest::Approx(rates[1]).epsilon(0.2));
}

TEST_CASE("volume hook pulls the iterate toward the target volume") {
  const Mesh m = build_rect_mesh(5, 4, 1.0, 1.0, left_clamp());
  OptimizerConfig cfg;
  cfg.delta = 0.2;
  cfg.volume_penalty = 5.0;
  cfg.volume_target = 0.25;  // area is 1, start volume is 0.5
  cfg.max_outer_iters = 150;
  cfg.grad_tol = 1e-7;
  const OptimizationResult r = optimize(m, NodalScalarField(m, 0.5), TimeGrid{1, 1.0},
                                        zero_program(), RegularizationParam{50.0},
                                        base_law(), cfg);
  double vol = 0.0;
  const double w = m.cell_weight();
  for (int cell = 0; cell < m.n_cells(); ++cell)
    for (int q = 0; q < 4; ++q) vol += w * r.z.at_quad(cell, q);
  CHECK(std::abs(vol - cfg.volume_target) < 0.5 * std::abs(0.5 - cfg.volume_target));
  check_descent_records(r.trace, cfg);
}

TEST_CASE("clamped iterates stay inside the unit box") {
  const Mesh m = build_rect_mesh(4, 3, 1.0, 1.0, left_clamp());
  OptimizerConfig cfg;
  cfg.delta = 0.05;
  cfg.clamp = true;
  cfg.initial_step = 4.0;
  cfg.max_outer_iters = 60;
  const OptimizationResult r = optimize(m, perturbed_half(m), TimeGrid{1, 1.0},
                                        zero_program(), RegularizationParam{50.0},
                                        base_law(), cfg);
  for (const IterationRecord& rec : r.trace.iters) {
    CHECK(rec.z_min >= 0.0);
    CHECK(rec.z_max <= 1.0);
  }
  for (double v : r.z.data()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("continuation stages warm-start and cross-check the exact limit") {
  const Mesh m = build_rect_mesh(6, 3, 2.0, 1.0, left_clamp());
  const MaterialLaw law = base_law();
  const LoadProgram loads = traction_ramp(0.35);
  const TimeGrid grid{3, 1.0};
  OptimizerConfig cfg;
  cfg.delta = 0.15;
  cfg.grad_tol = 1e-5;
  cfg.max_outer_iters = 120;

  const NodalScalarField z0(m, 0.5);
  const ContinuationResult c =
      gamma_continuation(m, z0, grid, loads, {20.0, 60.0}, law, cfg);
  REQUIRE(c.stages.size() == 2);
  CHECK(c.stages[0].z_shift_h1 == 0.0);
  CHECK(c.stages[1].z_shift_h1 >= 0.0);
  CHECK(std::abs(c.J_exact - c.J_final) <= 0.01 * std::abs(c.J_final));

  // A schedule of length one is plain descent at that smoothing.
  const ContinuationResult single = gamma_continuation(m, z0, grid, loads, {20.0}, law, cfg);
  const OptimizationResult direct =
      optimize(m, z0, grid, loads, RegularizationParam{20.0}, law, cfg);
  for (int a = 0; a < m.n_nodes(); ++a) CHECK(single.z[a] == direct.z[a]);
}
