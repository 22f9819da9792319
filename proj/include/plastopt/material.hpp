#pragma once

#include <string>
#include <vector>

#include "plastopt/tensor.hpp"

namespace plastopt {

// Coefficient endpoints at z=0 (weak phase) and z=1 (strong phase).
// In between each coefficient follows the same C1 ramp, constant outside [0,1].
struct MaterialLaw {
  double mu0 = 1e-3, mu1 = 1.0;
  double lambda0 = 1e-3, lambda1 = 1.0;
  double h0 = 1e-3, h1 = 1.0;
  double d0 = 1e-3, d1 = 1.0;
  double ell0 = 1e-3, ell1 = 1.0;

  // Empty result means the law is usable; otherwise one message per violation.
  std::vector<std::string> validate() const;
};

enum class Coeff { mu, lambda, h, d, ell };

Coeff coeff_by_name(const std::string& name);

double coeff(const MaterialLaw& law, Coeff which, double z);
double coeff_prime(const MaterialLaw& law, Coeff which, double z);

// Uniform bounds over all z: alpha/beta cover {mu, lambda, h, d} endpoints.
double alpha(const MaterialLaw& law);
double beta(const MaterialLaw& law);
double alpha_C(const MaterialLaw& law);            // 2·min mu
double beta_C(const MaterialLaw& law, int n);      // 2·max mu + n·max lambda
double alpha_H(const MaterialLaw& law);            // min h
double beta_H(const MaterialLaw& law);             // max h

// C(z)E = 2 mu(z) E + lambda(z) (tr E) I and the z-derivative of the same.
SymTensor elasticity_apply(const MaterialLaw& law, double z, const SymTensor& E);
SymTensor elasticity_prime_apply(const MaterialLaw& law, double z, const SymTensor& E);

// H(z)Q = h(z) Q.
DevTensor hardening_apply(const MaterialLaw& law, double z, const DevTensor& Q);
DevTensor hardening_prime_apply(const MaterialLaw& law, double z, const DevTensor& Q);

}  // namespace plastopt
