#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "plastopt/lab.hpp"

using namespace plastopt;

namespace {

// Bundle with a huge yield stress: the response stays elastic, so every
// smoothing of the dissipation produces the same (zero-p) trajectory.
LabBundle elastic_bundle() {
  LabBundle b = regression_fixture(6, 3, 3, 100.0);
  b.law.d1 = 1e9;
  b.law.d0 = 1e6;
  return b;
}

double column(const Table& t, const std::string& name, std::size_t row) {
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    if (t.columns[c] == name) return t.rows[row][c];
  FAIL("missing column ", name);
  return 0.0;
}

}  // namespace

TEST_CASE("regression fixture has plastic flow and a strict interior phase") {
  LabBundle b = regression_fixture();
  REQUIRE(b.mesh.n_cells() == 12 * 6);
  double zmin = 1.0, zmax = 0.0;
  for (double v : b.z.data()) {
    zmin = std::min(zmin, v);
    zmax = std::max(zmax, v);
  }
  CHECK(zmin > 0.0);
  CHECK(zmax < 1.0);

  const EvolutionState st =
      solve_evolution(b.mesh, b.z, b.grid, b.loads, b.gamma, b.law);
  double pmax = 0.0;
  for (int k = 0; k < st.steps.back().p.size(); ++k)
    pmax = std::max(pmax, frobenius_norm(st.steps.back().p.flat(k)));
  CHECK(pmax > 1e-4);  // loads are strong enough to leave the elastic range
}

TEST_CASE("smoothing sweep distances decrease toward the exact limit") {
  const LabBundle b = regression_fixture();
  const Table t = run_gamma_sweep(b, {10.0, 100.0, 1000.0, 10000.0});
  REQUIRE(t.rows.size() == 4);
  CHECK(t.summary.at("monotone_decreasing") == 1.0);
  for (std::size_t m = 0; m + 1 < t.rows.size(); ++m)
    CHECK(column(t, "distance_sum_h1_l2_l2", m + 1) <
          column(t, "distance_sum_h1_l2_l2", m));
  CHECK(column(t, "distance_sum_h1_l2_l2", 0) > 0.0);
}

TEST_CASE("smoothing sweep is flat when no plastic flow occurs") {
  // Below yield the smoothing still creeps at scale 1/(d gamma); with the
  // huge d of the elastic bundle that residue sits under 1e-8.
  const Table t = run_gamma_sweep(elastic_bundle(), {10.0, 1000.0});
  for (std::size_t m = 0; m < t.rows.size(); ++m)
    CHECK(column(t, "distance_sum_h1_l2_l2", m) <= 1e-8);
}

TEST_CASE("time refinement converges with order at least one for u") {
  LabBundle b = regression_fixture();
  b.gamma = RegularizationParam::exact();
  const Table t = run_timestep_sweep(b, {4, 8, 16, 32});
  REQUIRE(t.rows.size() == 3);
  CHECK(t.summary.at("monotone_decreasing") == 1.0);
  CHECK(t.summary.at("min_order_u") >= 1.0);
  // The variational bound degrades like the time step.
  CHECK(column(t, "slack_linf", 2) < column(t, "slack_linf", 0));
}

TEST_CASE("fixed smoothing caps how far time refinement can converge") {
  // Once tau |p_dot| drops under 1/gamma the increments sit in the quadratic
  // range of the smoothing and the discrete evolution drifts away from the
  // rate-independent one, so refining past that point grows the distances.
  const LabBundle b = regression_fixture();  // gamma = 100
  const Table t = run_timestep_sweep(b, {4, 8, 16, 32});
  CHECK(t.summary.at("monotone_decreasing") == 0.0);
}

TEST_CASE("loads frozen after the first node make refinements agree exactly there") {
  LabBundle b = regression_fixture(6, 3, 2, 100.0);
  b.gamma = RegularizationParam::exact();  // no creep on the plateau
  // Full load already at the first fine node: every step on either grid then
  // starts from the zero state or repeats the same increment problem.
  const double t1 = 0.25 * b.grid.T;
  b.loads.g = [t1](double t, double, double, double* o) {
    o[0] = 0.0;
    o[1] = -0.35 * std::min(t, t1) / t1;
  };
  const EvolutionState coarse =
      solve_evolution(b.mesh, b.z, TimeGrid{2, b.grid.T}, b.loads, b.gamma, b.law);
  const EvolutionState fine =
      solve_evolution(b.mesh, b.z, TimeGrid{4, b.grid.T}, b.loads, b.gamma, b.law);
  // Nothing moves after the plateau starts: the states at t = T match tightly.
  double diff = 0.0;
  for (int n = 0; n < coarse.steps[2].u.size(); ++n)
    diff = std::max(diff, std::abs(coarse.steps[2].u.dof(n) - fine.steps[4].u.dof(n)));
  CHECK(diff < 1e-6);
}

TEST_CASE("profile energy approaches one sixth for resolved widths") {
  const Table t = run_mm_profile_check({0.1, 0.02, 0.01}, 200, 1.0);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.summary.at("within_two_percent") == 1.0);
  // delta = 0.1 on a unit strip feels the pinned ends; the small widths don't.
  CHECK(column(t, "rel_gap_to_sixth", 1) <= 0.02);
  CHECK(column(t, "rel_gap_to_sixth", 2) <= 0.02);
}

TEST_CASE("flat phases carry no interface energy on the strip") {
  const double height = 1.0 / 200.0;
  const Mesh mesh = build_rect_mesh(200, 1, 1.0, height,
                                    {{Side::left, -1e9, 1e9, FacetTag::dirichlet}});
  const NodalScalarField z(mesh, 0.0);
  CHECK(modica_mortola(mesh, z, 0.02) == 0.0);
}

TEST_CASE("dual norms stay bounded across refinement and smoothing") {
  const LabBundle b = regression_fixture();
  const Table t = run_adjoint_bound_study(b, {4, 8}, {10.0, 100.0, 1000.0});
  REQUIRE(t.rows.size() == 6);
  CHECK(t.summary.at("ratio_max_min") < 2.0);
  CHECK(std::abs(t.summary.at("slope_vs_gamma")) < 0.1);
  CHECK(std::abs(t.summary.at("slope_vs_k")) < 0.1);
}

TEST_CASE("adjoint study reports zeros without loads") {
  LabBundle b = regression_fixture(6, 3, 2, 100.0);
  b.loads.g = [](double, double, double, double* o) { o[0] = o[1] = 0.0; };
  const Table t = run_adjoint_bound_study(b, {2}, {100.0});
  CHECK(column(t, "max_norm", 0) == 0.0);
}

TEST_CASE("phase sensitivity ratios are stable across perturbation sizes") {
  const LabBundle b = regression_fixture(6, 3, 3, 100.0);
  const Table t = run_lipschitz_in_z_study(b, {1e-1, 1e-2, 1e-3, 1e-4});
  REQUIRE(t.rows.size() == 4);
  const double spread = t.summary.at("ratio_spread");
  CHECK(spread >= 1.0);
  CHECK(spread < 2.0);
  for (std::size_t m = 0; m < t.rows.size(); ++m) CHECK(column(t, "skipped", m) == 0.0);
}

TEST_CASE("zero perturbation sizes are skipped, not divided by") {
  const LabBundle b = regression_fixture(6, 3, 2, 100.0);
  const Table t = run_lipschitz_in_z_study(b, {0.0, 1e-2});
  CHECK(column(t, "skipped", 0) == 1.0);
  CHECK(column(t, "ratio", 0) == 0.0);
  CHECK(column(t, "skipped", 1) == 0.0);
  CHECK(std::isfinite(column(t, "ratio", 1)));
}

TEST_CASE("stronger smoothing curvature raises the sensitivity ratio") {
  LabBundle lo = regression_fixture(6, 3, 3, 10.0);
  LabBundle hi = regression_fixture(6, 3, 3, 1000.0);
  const Table a = run_lipschitz_in_z_study(lo, {1e-3});
  const Table b = run_lipschitz_in_z_study(hi, {1e-3});
  CHECK(column(b, "ratio", 0) >= column(a, "ratio", 0));
}

TEST_CASE("design sweep returns one converged row per width") {
  LabBundle b = regression_fixture(6, 3, 2, 100.0);
  OptimizerConfig cfg;
  cfg.max_outer_iters = 40;
  cfg.grad_tol = 1e-4;
  const Table t = run_delta_sweep(b, {0.2, 0.1}, cfg);
  REQUIRE(t.rows.size() == 2);
  for (std::size_t m = 0; m < t.rows.size(); ++m) {
    CHECK(column(t, "iterations", m) >= 1.0);
    CHECK(std::isfinite(column(t, "objective", m)));
    CHECK(column(t, "band_area", m) >= 0.0);
  }
}

TEST_CASE("tables are deterministic across repeated runs") {
  const LabBundle b = regression_fixture(6, 3, 2, 100.0);
  const Table a = run_gamma_sweep(b, {10.0, 100.0});
  const Table c = run_gamma_sweep(b, {10.0, 100.0});
  REQUIRE(a.rows.size() == c.rows.size());
  for (std::size_t m = 0; m < a.rows.size(); ++m)
    for (std::size_t j = 0; j < a.rows[m].size(); ++j) CHECK(a.rows[m][j] == c.rows[m][j]);
  CHECK(a.summary == c.summary);
}
