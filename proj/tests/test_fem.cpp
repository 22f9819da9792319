#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "plastopt/assembly.hpp"
#include "plastopt/dissipation.hpp"
#include "plastopt/errors.hpp"
#include "plastopt/fields.hpp"
#include "plastopt/linsolve.hpp"
#include "plastopt/loads.hpp"
#include "plastopt/mesh.hpp"
#include "plastopt/threading.hpp"

using namespace plastopt;

namespace {

std::vector<TagRule> left_clamp() {
  return {{Side::left, -1e9, 1e9, FacetTag::dirichlet},
          {Side::right, -1e9, 1e9, FacetTag::neumann}};
}

MaterialLaw contrasted_law() {
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

NodalScalarField wavy_z(const Mesh& mesh, double base = 0.55, double amp = 0.35) {
  NodalScalarField z(mesh, base);
  for (int n = 0; n < mesh.n_nodes(); ++n)
    z[n] = base + amp * std::sin(3.0 * mesh.nodes[n][0] + 2.0 * mesh.nodes[n][1]);
  return z;
}

}  // namespace

TEST_CASE("rectangle mesh basics") {
  const Mesh m = build_rect_mesh(1, 1, 1.0, 1.0, left_clamp());
  CHECK(m.n_nodes() == 4);
  CHECK(m.n_cells() == 1);
  double area = 0.0;
  for (int c = 0; c < m.n_cells(); ++c) area += 4.0 * m.cell_weight();
  CHECK(area == doctest::Approx(1.0).epsilon(1e-14));

  const Mesh m2 = build_rect_mesh(4, 4, 1.0, 1.0, left_clamp());
  int n_dirichlet = 0;
  double perimeter = 0.0;
  for (const auto& f : m2.facets) {
    perimeter += f.measure;
    if (f.tag == FacetTag::dirichlet) ++n_dirichlet;
  }
  CHECK(n_dirichlet == 4);
  CHECK(perimeter == doctest::Approx(2.0 * (1.0 + 1.0)).epsilon(1e-14));

  const Mesh m3 = build_rect_mesh(6, 3, 2.0, 1.5, left_clamp());
  double perim3 = 0.0;
  for (const auto& f : m3.facets) perim3 += f.measure;
  CHECK(perim3 == doctest::Approx(2.0 * (2.0 + 1.5)).epsilon(1e-13));
}

TEST_CASE("tag rules that cover nothing are reported together") {
  std::vector<TagRule> bad = {{Side::left, -1e9, 1e9, FacetTag::dirichlet},
                              {Side::top, 5.0, 6.0, FacetTag::neumann},
                              {Side::bottom, -3.0, -2.0, FacetTag::neumann}};
  CHECK_THROWS_AS(build_rect_mesh(4, 4, 1.0, 1.0, bad), ConfigError);
  try {
    build_rect_mesh(4, 4, 1.0, 1.0, bad);
  } catch (const ConfigError& e) {
    CHECK(e.violations.size() == 2);
  }

  // No Dirichlet part at all is rejected as well.
  std::vector<TagRule> no_d = {{Side::right, -1e9, 1e9, FacetTag::neumann}};
  CHECK_THROWS_AS(build_rect_mesh(2, 2, 1.0, 1.0, no_d), ConfigError);
}

TEST_CASE("gauss points and node numbering line up") {
  const Mesh m = build_rect_mesh(2, 2, 1.0, 1.0, left_clamp());
  CHECK(m.node_id(0, 0) == 0);
  CHECK(m.node_id(2, 2) == 8);
  // Quadrature integrates a bilinear exactly: int xy over [0,1]^2 = 1/4.
  double integral = 0.0;
  for (int c = 0; c < m.n_cells(); ++c)
    for (int q = 0; q < 4; ++q) {
      const auto x = m.quad_point(c, q);
      integral += m.cell_weight() * x[0] * x[1];
    }
  CHECK(integral == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("patch test: constant strain reproduces constant stress exactly") {
  std::vector<TagRule> all_d = {{Side::left, -1e9, 1e9, FacetTag::dirichlet},
                                {Side::right, -1e9, 1e9, FacetTag::dirichlet},
                                {Side::bottom, -1e9, 1e9, FacetTag::dirichlet},
                                {Side::top, -1e9, 1e9, FacetTag::dirichlet}};
  const Mesh m = build_rect_mesh(3, 4, 1.3, 0.9, all_d);
  MaterialLaw law = contrasted_law();
  law.d0 = law.d1 = 1e6;  // keep the response elastic
  const NodalScalarField z(m, 1.0);

  // u = A x with A = [[0.3, 0.1], [0.2, -0.4]]
  NodalVectorField u(m);
  for (int n = 0; n < m.n_nodes(); ++n) {
    const double x = m.nodes[n][0], y = m.nodes[n][1];
    u(n, 0) = 0.3 * x + 0.1 * y;
    u(n, 1) = 0.2 * x - 0.4 * y;
  }
  SymTensor E(2);
  E.set(0, 0, 0.3);
  E.set(0, 1, 0.15);
  E.set(1, 1, -0.4);
  const SymTensor sigma_exact = elasticity_apply(law, 1.0, E);

  const CondensedState cs =
      condense_state(m, z, dev_quadfield(m), RegularizationParam::exact(), law, u, false);
  for (int c = 0; c < m.n_cells(); ++c)
    for (int q = 0; q < 4; ++q) {
      CHECK(frobenius_norm(cs.p.at(c, q)) == 0.0);
      const SymTensor diff = cs.sigma.at(c, q) - sigma_exact;
      CHECK(frobenius_norm(diff) <= 1e-13);
    }

  // With the whole boundary clamped the interior residual of the exact affine
  // state vanishes to roundoff.
  StepLoads zero;
  zero.f = [](double, double, double* o) { o[0] = o[1] = 0.0; };
  zero.g = zero.f;
  zero.w = zero.f;
  const StateSystem sys =
      assemble_state_residual(m, z, dev_quadfield(m), RegularizationParam::exact(), law, zero, u,
                              false);
  CHECK(sys.residual.norm() <= 1e-12 * frobenius_norm(sigma_exact));
}

TEST_CASE("zero loads and zero displacement give a zero residual") {
  const Mesh m = build_rect_mesh(3, 3, 1.0, 1.0, left_clamp());
  const MaterialLaw law = contrasted_law();
  const NodalScalarField z = wavy_z(m);
  StepLoads zero;
  zero.f = [](double, double, double* o) { o[0] = o[1] = 0.0; };
  zero.g = zero.f;
  zero.w = zero.f;
  const NodalVectorField u(m);
  for (double gamma : {100.0, std::numeric_limits<double>::infinity()}) {
    const StateSystem sys = assemble_state_residual(m, z, dev_quadfield(m),
                                                    RegularizationParam{gamma}, law, zero, u,
                                                    false);
    CHECK(sys.residual.norm() == 0.0);
  }
}

TEST_CASE("tangent matrix is symmetric in the plastic regime") {
  const Mesh m = build_rect_mesh(4, 3, 2.0, 1.0, left_clamp());
  const MaterialLaw law = contrasted_law();
  const NodalScalarField z = wavy_z(m);
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  NodalVectorField u(m);
  for (int k = 0; k < u.size(); ++k) u.data()[k] = 0.8 * unit(rng);

  StepLoads zero;
  zero.f = [](double, double, double* o) { o[0] = o[1] = 0.0; };
  zero.g = zero.f;
  zero.w = zero.f;
  for (double gamma : {30.0, std::numeric_limits<double>::infinity()}) {
    const StateSystem sys = assemble_state_residual(m, z, dev_quadfield(m),
                                                    RegularizationParam{gamma}, law, zero, u,
                                                    true);
    const SparseMat diff = SparseMat(sys.jacobian.transpose()) - sys.jacobian;
    double max_diff = 0.0, max_val = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
      for (SparseMat::InnerIterator it(diff, k); it; ++it)
        max_diff = std::max(max_diff, std::abs(it.value()));
    for (int k = 0; k < sys.jacobian.outerSize(); ++k)
      for (SparseMat::InnerIterator it(sys.jacobian, k); it; ++it)
        max_val = std::max(max_val, std::abs(it.value()));
    CHECK(max_diff <= 1e-10 * max_val);
  }
}

TEST_CASE("residual is the gradient of the incremental energy") {
  const Mesh m = build_rect_mesh(3, 3, 1.0, 1.0, left_clamp());
  const MaterialLaw law = contrasted_law();
  const NodalScalarField z = wavy_z(m, 0.6, 0.3);
  const RegularizationParam gamma{50.0};

  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  QuadField<DevTensor> p_prev = dev_quadfield(m);
  for (int k = 0; k < p_prev.size(); ++k) {
    SymTensor s(2);
    s.set(0, 0, 0.1 * unit(rng));
    s.set(0, 1, 0.1 * unit(rng));
    s.set(1, 1, 0.1 * unit(rng));
    p_prev.flat(k) = dev_project(s);
  }
  NodalVectorField u(m);
  for (int k = 0; k < u.size(); ++k) u.data()[k] = 0.5 * unit(rng);

  StepLoads loads;
  loads.f = [](double x, double y, double* o) {
    o[0] = 0.2 * std::sin(x + y);
    o[1] = -0.1 * x;
  };
  loads.g = [](double x, double y, double* o) {
    o[0] = 0.3 * y;
    o[1] = -0.25;
    (void)x;
  };
  loads.w = [](double, double, double* o) { o[0] = o[1] = 0.0; };

  const StateSystem sys = assemble_state_residual(m, z, p_prev, gamma, law, loads, u, false);

  for (int trial = 0; trial < 5; ++trial) {
    NodalVectorField dir(m);
    for (int n = 0; n < m.n_nodes(); ++n)
      if (!m.dirichlet_node[n]) {
        dir(n, 0) = unit(rng);
        dir(n, 1) = unit(rng);
      }
    double slope = 0.0;
    for (int k = 0; k < u.size(); ++k) slope += sys.residual[k] * dir.data()[k];

    const double h = 1e-6;
    NodalVectorField up = u, um = u;
    for (int k = 0; k < u.size(); ++k) {
      up.data()[k] += h * dir.data()[k];
      um.data()[k] -= h * dir.data()[k];
    }
    const double fd = (incremental_energy(m, z, p_prev, gamma, law, loads, up) -
                       incremental_energy(m, z, p_prev, gamma, law, loads, um)) /
                      (2.0 * h);
    CHECK(slope == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("serial and parallel assembly agree bit for bit") {
  const Mesh m = build_rect_mesh(8, 6, 2.0, 1.0, left_clamp());
  const MaterialLaw law = contrasted_law();
  const NodalScalarField z = wavy_z(m);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  NodalVectorField u(m);
  for (int k = 0; k < u.size(); ++k) u.data()[k] = 0.6 * unit(rng);
  StepLoads zero;
  zero.f = [](double, double, double* o) { o[0] = o[1] = 0.0; };
  zero.g = zero.f;
  zero.w = zero.f;

  set_exec_mode(ExecMode::serial);
  const StateSystem a = assemble_state_residual(m, z, dev_quadfield(m), RegularizationParam{40.0},
                                                law, zero, u, true);
  set_exec_mode(ExecMode::parallel);
  const StateSystem b = assemble_state_residual(m, z, dev_quadfield(m), RegularizationParam{40.0},
                                                law, zero, u, true);
  set_exec_mode(ExecMode::parallel);

  REQUIRE(a.residual.size() == b.residual.size());
  CHECK(std::memcmp(a.residual.data(), b.residual.data(),
                    sizeof(double) * a.residual.size()) == 0);
  REQUIRE(a.jacobian.nonZeros() == b.jacobian.nonZeros());
  CHECK(std::memcmp(a.jacobian.valuePtr(), b.jacobian.valuePtr(),
                    sizeof(double) * a.jacobian.nonZeros()) == 0);
}

TEST_CASE("load functionals integrate constants exactly") {
  const Mesh m = build_rect_mesh(5, 4, 2.0, 1.0, left_clamp());
  QuadField<double> one(m, 1.0);
  const Vector body = assemble_body_load(m, one, [](double, double, double* o) {
    o[0] = 3.0;
    o[1] = -2.0;
  });
  double fx = 0.0, fy = 0.0;
  for (int n = 0; n < m.n_nodes(); ++n) {
    fx += body[2 * n];
    fy += body[2 * n + 1];
  }
  CHECK(fx == doctest::Approx(3.0 * 2.0).epsilon(1e-13));   // f_x times area
  CHECK(fy == doctest::Approx(-2.0 * 2.0).epsilon(1e-13));

  // Constant traction on the Neumann edge (the right edge, length 1).
  const Vector bnd = assemble_boundary_load(m, [](double, double, double* o) {
    o[0] = 0.0;
    o[1] = -1.5;
  });
  double gy = 0.0;
  for (int n = 0; n < m.n_nodes(); ++n) gy += bnd[2 * n + 1];
  CHECK(gy == doctest::Approx(-1.5 * 1.0).epsilon(1e-13));
}

TEST_CASE("scalar Riesz solve") {
  const Mesh m = build_rect_mesh(6, 6, 1.0, 1.0, left_clamp());
  const double delta = 0.07;

  SUBCASE("zero functional maps to zero") {
    Vector G = Vector::Zero(m.n_nodes());
    const NodalScalarField phi = h1_riesz_solve(m, delta, G);
    for (int n = 0; n < m.n_nodes(); ++n) CHECK(phi[n] == 0.0);
  }

  SUBCASE("the functional psi -> int psi returns the constant one") {
    QuadField<double> one(m, 1.0);
    Vector G = Vector::Zero(m.n_nodes());
    const double w = m.cell_weight();
    for (int c = 0; c < m.n_cells(); ++c)
      for (int q = 0; q < 4; ++q)
        for (int a = 0; a < 4; ++a) G[m.cells[c][a]] += w * m.tables.value[q][a];
    const NodalScalarField phi = h1_riesz_solve(m, delta, G);
    for (int n = 0; n < m.n_nodes(); ++n) CHECK(phi[n] == doctest::Approx(1.0).epsilon(1e-11));
  }

  SUBCASE("riesz map is symmetric") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Vector g1(m.n_nodes()), g2(m.n_nodes());
    for (int n = 0; n < m.n_nodes(); ++n) {
      g1[n] = unit(rng);
      g2[n] = unit(rng);
    }
    const NodalScalarField r1 = h1_riesz_solve(m, delta, g1);
    const NodalScalarField r2 = h1_riesz_solve(m, delta, g2);
    double a12 = 0.0, a21 = 0.0;
    for (int n = 0; n < m.n_nodes(); ++n) {
      a12 += g1[n] * r2[n];
      a21 += g2[n] * r1[n];
    }
    CHECK(a12 == doctest::Approx(a21).epsilon(1e-11));
  }
}

TEST_CASE("dissipation functional on fields") {
  const Mesh m = build_rect_mesh(4, 4, 1.0, 1.0, left_clamp());
  MaterialLaw law = contrasted_law();
  const NodalScalarField z(m, 0.5);
  const double dz = coeff(law, Coeff::d, 0.5);

  QuadField<DevTensor> inc = dev_quadfield(m);
  CHECK(dissipation_functional(z, inc, RegularizationParam{7.0}, law) == 0.0);
  CHECK(dissipation_functional(z, inc, RegularizationParam::exact(), law) == 0.0);

  // Constant increment of norm c on the unit square.
  const double c = 0.4;
  SymTensor s(2);
  s.set(0, 0, c / std::sqrt(2.0));
  s.set(1, 1, -c / std::sqrt(2.0));
  for (int k = 0; k < inc.size(); ++k) inc.flat(k) = dev_project(s);
  const double exact = dissipation_functional(z, inc, RegularizationParam::exact(), law);
  CHECK(exact == doctest::Approx(dz * c).epsilon(1e-13));
  const double reg = dissipation_functional(z, inc, RegularizationParam{3.0}, law);
  CHECK(reg == doctest::Approx(dz * h_gamma(dev_project(s), RegularizationParam{3.0})).epsilon(1e-13));
  CHECK(reg < exact);

  const Mesh other = build_rect_mesh(2, 2, 1.0, 1.0, left_clamp());
  const NodalScalarField z_other(other, 0.5);
  CHECK_THROWS_AS(dissipation_functional(z_other, inc, RegularizationParam{3.0}, law),
                  std::invalid_argument);
}

TEST_CASE("load program validation flags every violation") {
  const Mesh m = build_rect_mesh(2, 2, 1.0, 1.0, left_clamp());
  LoadProgram bad;
  bad.f = [](double t, double, double, double* o) {
    o[0] = 1.0;  // nonzero at t = 0
    o[1] = 0.0;
    (void)t;
  };
  bad.g = [](double t, double, double, double* o) { o[0] = o[1] = t; };
  bad.w = [](double t, double, double, double* o) {
    o[0] = 0.0;
    o[1] = 0.5;  // nonzero at t = 0
    (void)t;
  };
  bad.T = -1.0;
  const auto violations = validate_loads(bad, m);
  CHECK(violations.size() == 3);  // f(0) != 0, w(0) != 0, T <= 0

  LoadProgram good;
  good.f = [](double t, double, double, double* o) { o[0] = t; o[1] = 0.0; };
  good.g = [](double t, double, double, double* o) { o[0] = 0.0; o[1] = -t; };
  good.w = [](double, double, double, double* o) { o[0] = o[1] = 0.0; };
  good.T = 2.0;
  CHECK(validate_loads(good, m).empty());

  const StepLoads at = sample_loads(good, 0.75);
  double out[2];
  at.f(0.1, 0.2, out);
  CHECK(out[0] == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("sparse solver round trip") {
  const Mesh m = build_rect_mesh(6, 5, 1.0, 1.0, left_clamp());
  const SparseMat A = assemble_scalar_h1_matrix(m, 0.2);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vector x_ref(m.n_nodes());
  for (int n = 0; n < m.n_nodes(); ++n) x_ref[n] = unit(rng);
  const Vector b = A * x_ref;
  const Vector x = solve_spd(A, b);
  CHECK((x - x_ref).norm() <= 1e-10 * x_ref.norm());
}
