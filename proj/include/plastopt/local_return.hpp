#pragma once

#include <array>

#include "plastopt/dissipation.hpp"
#include "plastopt/material.hpp"
#include "plastopt/tensor.hpp"

namespace plastopt {

// Everything a quadrature point needs for one incremental plastic solve.
struct LocalPlasticContext {
  double z = 0.0;
  RegularizationParam gamma;
  DevTensor P;  // plastic strain from the previous time step at this point
  const MaterialLaw* law = nullptr;
};

// F(Q) = (2 mu(z) + h(z)) Q + d(z) grad_h_gamma(Q - P). Finite gamma only.
DevTensor F_apply(const LocalPlasticContext& ctx, const DevTensor& Q);

// Solves F(Q) = R to |F(Q) - R| <= 1e-12 (1 + |R|). Damped full-tensor Newton;
// when R - (2mu+h)P and P are collinear the solve drops to a scalar equation.
// Throws NewtonDivergence after 50 iterations.
DevTensor F_inverse(const LocalPlasticContext& ctx, const DevTensor& R);

// Condensed stress b(E) = C(z)(E - p) with p = F^{-1}(dev projection of C(z)E);
// gamma = +inf routes through radial_return. b_tangent_apply is the exact
// derivative of b_apply in E, applied to V.
SymTensor b_apply(const LocalPlasticContext& ctx, const SymTensor& E);
SymTensor b_tangent_apply(const LocalPlasticContext& ctx, const SymTensor& E, const SymTensor& V);

struct ReturnMapResult {
  DevTensor p;
  SymTensor sigma;
};

// Exact (gamma = +inf) incremental problem. Trial T = dev(C(z)E) - (2mu+h)P;
// elastic if |T| <= d(z), otherwise p = P + (|T|-d)/(2mu+h) * T/|T|.
ReturnMapResult radial_return(double z, const MaterialLaw& law, const DevTensor& P,
                              const SymTensor& E);

// Row-major m x m dense block on the deviatoric subspace in the orthonormal
// basis of dev_basis(); m = dev_dim(n). A = (2mu+h) Id + d hess_h_gamma(p - P)
// evaluated at the forward solution p, i.e. the local Newton matrix DF(p).
struct DevOperator {
  int n = 0;
  int m = 0;
  std::array<double, 25> A{};
  std::array<double, 25> Ainv{};
};

DevOperator plastic_operator(const LocalPlasticContext& ctx, const DevTensor& p);
DevTensor dev_apply(const DevOperator& op, const DevTensor& x);
DevTensor dev_solve(const DevOperator& op, const DevTensor& rhs);

// One-stop evaluation for assembly: plastic strain, stress, and the consistent
// tangent as a dense block in the orthonormal sym_basis() coordinates.
struct CondensedPoint {
  DevTensor p;
  SymTensor sigma;
  int m = 0;                   // sym_dim(n)
  std::array<double, 36> K{};  // row-major m x m, K[a][b] = basis_a . dEb[basis_b]
};

CondensedPoint condense_point(const LocalPlasticContext& ctx, const SymTensor& E);

}  // namespace plastopt
