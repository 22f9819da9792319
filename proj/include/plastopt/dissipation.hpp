#pragma once

#include <cassert>
#include <cmath>
#include <limits>

#include "plastopt/material.hpp"
#include "plastopt/tensor.hpp"

namespace plastopt {

// gamma in (0, +inf]; +inf selects the exact nonsmooth density |.| and the
// closed-form return map, the finite values select h_gamma.
struct RegularizationParam {
  double gamma = std::numeric_limits<double>::infinity();

  bool finite() const { return std::isfinite(gamma); }
  static RegularizationParam exact() { return {}; }
};

// h_gamma(Q) = sqrt(|Q|^2 + 1/gamma^2) - 1/gamma. Requires finite gamma.
inline double h_gamma(const DevTensor& Q, RegularizationParam gamma) {
  assert(gamma.finite() && gamma.gamma > 0.0);
  const double inv = 1.0 / gamma.gamma;
  const double q2 = contract(Q, Q);
  // Rewritten as q2 / (sqrt(q2 + inv^2) + inv): exact at Q = 0, no cancellation.
  return q2 / (std::sqrt(q2 + inv * inv) + inv);
}

inline DevTensor grad_h_gamma(const DevTensor& Q, RegularizationParam gamma) {
  assert(gamma.finite() && gamma.gamma > 0.0);
  const double inv = 1.0 / gamma.gamma;
  const double root = std::sqrt(contract(Q, Q) + inv * inv);
  return (1.0 / root) * Q;
}

inline DevTensor hess_h_gamma_apply(const DevTensor& Q, RegularizationParam gamma,
                                    const DevTensor& V) {
  assert(gamma.finite() && gamma.gamma > 0.0);
  const double inv = 1.0 / gamma.gamma;
  const double denom = contract(Q, Q) + inv * inv;
  const double root = std::sqrt(denom);
  DevTensor out = V - (contract(Q, V) / denom) * Q;
  out *= 1.0 / root;
  return out;
}

inline double abs_density(const DevTensor& Q) { return frobenius_norm(Q); }

// Tests R in d(z) * subdifferential of |.| at Q_dot.
inline bool subdiff_contains(const DevTensor& Q_dot, const DevTensor& R, double z,
                             const MaterialLaw& law, double tol = 1e-9) {
  const double d = coeff(law, Coeff::d, z);
  const double rate = frobenius_norm(Q_dot);
  if (rate == 0.0) return frobenius_norm(R) <= d + tol;
  return frobenius_norm(R - (d / rate) * Q_dot) <= tol;
}

class Mesh;
class NodalScalarField;
template <class T>
class QuadField;

// Integral of d(z) h_gamma(increment) over the mesh; gamma = +inf integrates
// d(z) |increment| instead. Throws on mesh mismatch.
double dissipation_functional(const NodalScalarField& z, const QuadField<DevTensor>& increment,
                              RegularizationParam gamma, const MaterialLaw& law);

}  // namespace plastopt
