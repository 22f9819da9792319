#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "plastopt/dissipation.hpp"

using namespace plastopt;

namespace {

DevTensor random_dev(std::mt19937_64& rng, int n, double amp = 2.0) {
  std::uniform_real_distribution<double> u(-amp, amp);
  SymTensor M(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) M.set(i, j, u(rng));
  return dev_project(M);
}

DevTensor unit_dev(int n, double norm) {
  SymTensor M(n);
  M.set(0, 1, norm / std::sqrt(2.0));
  return dev_project(M);
}

}  // namespace

TEST_CASE("regularized density values") {
  const RegularizationParam g1{1.0};
  CHECK(h_gamma(DevTensor::zero(2), g1) == 0.0);
  CHECK(h_gamma(unit_dev(2, 0.75), g1) == doctest::Approx(0.25).epsilon(1e-12));
  const RegularizationParam g6{1e6};
  CHECK(h_gamma(unit_dev(3, 1.0), g6) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("gradient and hessian closed forms") {
  const RegularizationParam g1{1.0};
  CHECK(frobenius_norm(grad_h_gamma(DevTensor::zero(2), g1)) == 0.0);
  CHECK(frobenius_norm(grad_h_gamma(unit_dev(2, 0.75), g1)) == doctest::Approx(0.6));

  std::mt19937_64 rng(301);
  const DevTensor V = random_dev(rng, 2);
  const DevTensor HV = hess_h_gamma_apply(DevTensor::zero(2), g1, V);
  CHECK(frobenius_norm(HV - V) <= 1e-14);

  const RegularizationParam g3{3.0};
  const DevTensor HV3 = hess_h_gamma_apply(DevTensor::zero(3), g3, random_dev(rng, 3));
  CHECK(frobenius_norm(HV3) > 0.0);
}

TEST_CASE("gradient and hessian match finite differences") {
  std::mt19937_64 rng(302);
  for (int n : {2, 3}) {
    for (double gamma : {0.5, 1.0, 20.0}) {
      const RegularizationParam g{gamma};
      for (int trial = 0; trial < 50; ++trial) {
        const DevTensor Q = random_dev(rng, n);
        const DevTensor V = random_dev(rng, n, 1.0);
        const double step = 1e-5;
        const double fd_val =
            (h_gamma(Q + step * V, g) - h_gamma(Q - step * V, g)) / (2.0 * step);
        CHECK(contract(grad_h_gamma(Q, g), V) == doctest::Approx(fd_val).epsilon(1e-6));

        const DevTensor fd_grad =
            (1.0 / (2.0 * step)) * (grad_h_gamma(Q + step * V, g) - grad_h_gamma(Q - step * V, g));
        const DevTensor HV = hess_h_gamma_apply(Q, g, V);
        CHECK(frobenius_norm(HV - fd_grad) <= 1e-5 * std::max(1.0, frobenius_norm(HV)));
      }
    }
  }
}

TEST_CASE("lipschitz bounds and monotone convergence") {
  std::mt19937_64 rng(303);
  for (int n : {2, 3}) {
    for (double gamma : {0.5, 2.0, 100.0}) {
      const RegularizationParam g{gamma};
      for (int trial = 0; trial < 1000; ++trial) {
        const DevTensor Q1 = random_dev(rng, n);
        const DevTensor Q2 = random_dev(rng, n);
        const double dq = frobenius_norm(Q1 - Q2);
        CHECK(std::abs(h_gamma(Q1, g) - h_gamma(Q2, g)) <= dq + 1e-14);
        CHECK(frobenius_norm(grad_h_gamma(Q1, g) - grad_h_gamma(Q2, g)) <=
              2.0 * gamma * dq + 1e-14);
        CHECK(frobenius_norm(grad_h_gamma(Q1, g)) < 1.0);
      }
    }
    for (int trial = 0; trial < 200; ++trial) {
      const DevTensor Q = random_dev(rng, n);
      const double exact = abs_density(Q);
      double prev = -1.0;
      for (double gamma : {1.0, 4.0, 32.0, 1024.0}) {
        const double v = h_gamma(Q, RegularizationParam{gamma});
        CHECK(v >= prev - 1e-15);
        CHECK(v <= exact + 1e-15);
        CHECK(exact - v <= 1.0 / gamma + 1e-15);
        prev = v;
      }
    }
  }
}

TEST_CASE("hessian is positive semidefinite with norm at most 2 gamma") {
  std::mt19937_64 rng(304);
  for (int n : {2, 3}) {
    for (double gamma : {0.7, 5.0, 300.0}) {
      const RegularizationParam g{gamma};
      for (int trial = 0; trial < 500; ++trial) {
        const DevTensor Q = random_dev(rng, n);
        const DevTensor V = random_dev(rng, n);
        const double quad = contract(hess_h_gamma_apply(Q, g, V), V);
        const double v2 = contract(V, V);
        CHECK(quad >= -1e-14 * v2);
        CHECK(quad <= 2.0 * gamma * v2 + 1e-12);
      }
    }
  }
}

TEST_CASE("subdifferential membership") {
  MaterialLaw law;
  law.d0 = 0.5;
  law.d1 = 2.0;
  const double z = 1.0;  // d(z) = 2
  const DevTensor zero = DevTensor::zero(2);
  std::mt19937_64 rng(305);
  const DevTensor dir = unit_dev(2, 1.0);

  CHECK(subdiff_contains(zero, 0.5 * 2.0 * dir, z, law));
  CHECK(subdiff_contains(zero, 2.0 * dir, z, law));
  CHECK_FALSE(subdiff_contains(zero, 2.5 * dir, z, law));
  CHECK(subdiff_contains(dir, 2.0 * dir, z, law));
  CHECK_FALSE(subdiff_contains(dir, zero, z, law));
  CHECK_FALSE(subdiff_contains(dir, 2.0 * random_dev(rng, 2), z, law));
}
