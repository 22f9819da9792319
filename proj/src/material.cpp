#include "plastopt/material.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace plastopt {

namespace {

struct Endpoints {
  double c0, c1;
};

Endpoints endpoints(const MaterialLaw& law, Coeff which) {
  switch (which) {
    case Coeff::mu: return {law.mu0, law.mu1};
    case Coeff::lambda: return {law.lambda0, law.lambda1};
    case Coeff::h: return {law.h0, law.h1};
    case Coeff::d: return {law.d0, law.d1};
    case Coeff::ell: return {law.ell0, law.ell1};
  }
  throw std::logic_error("unreachable coefficient tag");
}

// Smoothstep ramp: C1, derivative 0 at both ends, so the constant
// extension outside [0,1] is automatic.
double ramp(double t) { return t * t * (3.0 - 2.0 * t); }
double ramp_prime(double t) { return 6.0 * t * (1.0 - t); }

}  // namespace

std::vector<std::string> MaterialLaw::validate() const {
  std::vector<std::string> out;
  auto check = [&out](const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v))
      out.push_back(std::string("material endpoint ") + name + " must be finite and > 0, got " +
                    std::to_string(v));
  };
  check("mu0", mu0);
  check("mu1", mu1);
  check("lambda0", lambda0);
  check("lambda1", lambda1);
  check("h0", h0);
  check("h1", h1);
  check("d0", d0);
  check("d1", d1);
  check("ell0", ell0);
  check("ell1", ell1);
  return out;
}

Coeff coeff_by_name(const std::string& name) {
  if (name == "mu") return Coeff::mu;
  if (name == "lambda") return Coeff::lambda;
  if (name == "h") return Coeff::h;
  if (name == "d") return Coeff::d;
  if (name == "ell") return Coeff::ell;
  throw std::invalid_argument("unknown material coefficient \"" + name +
                              "\"; expected one of mu, lambda, h, d, ell");
}

double coeff(const MaterialLaw& law, Coeff which, double z) {
  const Endpoints e = endpoints(law, which);
  const double t = std::clamp(z, 0.0, 1.0);
  return e.c0 + (e.c1 - e.c0) * ramp(t);
}

double coeff_prime(const MaterialLaw& law, Coeff which, double z) {
  if (z <= 0.0 || z >= 1.0) return 0.0;
  const Endpoints e = endpoints(law, which);
  return (e.c1 - e.c0) * ramp_prime(z);
}

double alpha(const MaterialLaw& law) {
  return std::min({law.mu0, law.mu1, law.lambda0, law.lambda1, law.h0, law.h1, law.d0, law.d1});
}

double beta(const MaterialLaw& law) {
  return std::max({law.mu0, law.mu1, law.lambda0, law.lambda1, law.h0, law.h1, law.d0, law.d1});
}

double alpha_C(const MaterialLaw& law) { return 2.0 * std::min(law.mu0, law.mu1); }

double beta_C(const MaterialLaw& law, int n) {
  return 2.0 * std::max(law.mu0, law.mu1) + n * std::max(law.lambda0, law.lambda1);
}

double alpha_H(const MaterialLaw& law) { return std::min(law.h0, law.h1); }

double beta_H(const MaterialLaw& law) { return std::max(law.h0, law.h1); }

SymTensor elasticity_apply(const MaterialLaw& law, double z, const SymTensor& E) {
  const double two_mu = 2.0 * coeff(law, Coeff::mu, z);
  const double lam = coeff(law, Coeff::lambda, z);
  SymTensor out = two_mu * E;
  const double add = lam * E.trace();
  for (int i = 0; i < E.dim(); ++i) out.add(i, i, add);
  return out;
}

SymTensor elasticity_prime_apply(const MaterialLaw& law, double z, const SymTensor& E) {
  const double two_mu_p = 2.0 * coeff_prime(law, Coeff::mu, z);
  const double lam_p = coeff_prime(law, Coeff::lambda, z);
  SymTensor out = two_mu_p * E;
  const double add = lam_p * E.trace();
  for (int i = 0; i < E.dim(); ++i) out.add(i, i, add);
  return out;
}

DevTensor hardening_apply(const MaterialLaw& law, double z, const DevTensor& Q) {
  return coeff(law, Coeff::h, z) * Q;
}

DevTensor hardening_prime_apply(const MaterialLaw& law, double z, const DevTensor& Q) {
  return coeff_prime(law, Coeff::h, z) * Q;
}

}  // namespace plastopt
