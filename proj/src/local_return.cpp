#include "plastopt/local_return.hpp"

#include <Eigen/Dense>

#include <cassert>
#include <cmath>

#include "plastopt/errors.hpp"

namespace plastopt {

namespace {

constexpr int kMaxIter = 50;
constexpr double kTolLocal = 1e-12;

using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 5, 5>;
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 5, 1>;

struct LocalCoeffs {
  double s;  // 2 mu(z) + h(z)
  double d;
  double mu;
  double lambda;
};

LocalCoeffs local_coeffs(const LocalPlasticContext& ctx) {
  assert(ctx.law != nullptr);
  const double mu = coeff(*ctx.law, Coeff::mu, ctx.z);
  return {2.0 * mu + coeff(*ctx.law, Coeff::h, ctx.z), coeff(*ctx.law, Coeff::d, ctx.z), mu,
          coeff(*ctx.law, Coeff::lambda, ctx.z)};
}

// g(y) = s y + d y / sqrt(y^2 + 1/gamma^2), increasing and concave on y >= 0,
// so Newton lands below the root after one step and then climbs monotonically.
double solve_radial_scalar(double s, double d, double gamma, double r) {
  if (r == 0.0) return 0.0;
  const double inv2 = 1.0 / (gamma * gamma);
  double y = std::max(0.0, (r - d) / s);
  double g = s * y + d * y / std::sqrt(y * y + inv2);
  for (int it = 0; it < kMaxIter; ++it) {
    const double res = g - r;
    if (std::abs(res) <= kTolLocal * (1.0 + r)) return y;
    const double root = std::sqrt(y * y + inv2);
    const double gp = s + d * inv2 / (root * root * root);
    double step = -res / gp;
    double y_next = y + step;
    if (y_next < 0.0) y_next = 0.5 * y;
    double g_next = s * y_next + d * y_next / std::sqrt(y_next * y_next + inv2);
    for (int halv = 0; halv < 60 && std::abs(g_next - r) > std::abs(res); ++halv) {
      y_next = 0.5 * (y + y_next);
      g_next = s * y_next + d * y_next / std::sqrt(y_next * y_next + inv2);
    }
    y = y_next;
    g = g_next;
  }
  throw NewtonDivergence("scalar plastic solve did not converge", kMaxIter,
                         std::abs(g - r) / (1.0 + r));
}

void dev_operator_coords(const LocalPlasticContext& ctx, const LocalCoeffs& c, const DevTensor& p,
                         SmallMat& A) {
  const int n = p.dim();
  const int m = dev_dim(n);
  const DevTensor gap = p - ctx.P;
  A.resize(m, m);
  for (int b = 0; b < m; ++b) {
    const DevTensor col = c.d * hess_h_gamma_apply(gap, ctx.gamma, dev_basis(n, b));
    for (int a = 0; a < m; ++a)
      A(a, b) = (a == b ? c.s : 0.0) + contract(dev_basis(n, a), col);
  }
}

SymTensor elasticity_at(const LocalCoeffs& c, const SymTensor& E) {
  SymTensor out = (2.0 * c.mu) * E;
  const double add = c.lambda * E.trace();
  for (int i = 0; i < E.dim(); ++i) out.add(i, i, add);
  return out;
}

}  // namespace

DevTensor F_apply(const LocalPlasticContext& ctx, const DevTensor& Q) {
  assert(ctx.gamma.finite());
  const LocalCoeffs c = local_coeffs(ctx);
  return c.s * Q + c.d * grad_h_gamma(Q - ctx.P, ctx.gamma);
}

DevTensor F_inverse(const LocalPlasticContext& ctx, const DevTensor& R) {
  assert(ctx.gamma.finite());
  const LocalCoeffs c = local_coeffs(ctx);
  const int n = R.dim();
  const DevTensor Rp = R - c.s * ctx.P;  // F(P + Y) = R reduces to an equation in Y with rhs Rp
  const double r = frobenius_norm(Rp);
  if (r == 0.0) return ctx.P;

  const double pn = frobenius_norm(ctx.P);
  const double rn = frobenius_norm(R);
  const bool collinear = pn == 0.0 || rn == 0.0 ||
                         std::abs(std::abs(contract(ctx.P, R)) - pn * rn) <= 1e-14 * pn * rn;
  if (collinear) {
    const double y = solve_radial_scalar(c.s, c.d, ctx.gamma.gamma, r);
    return ctx.P + (y / r) * Rp;
  }

  // Full-tensor damped Newton in the gap variable Y = Q - P, warm started from
  // the exact-density solution. Iterating in Y keeps the argument of grad_h
  // free of cancellation, which matters once |Y| ~ 1/gamma.
  const auto residual = [&](const DevTensor& Y) {
    return c.s * Y + c.d * grad_h_gamma(Y, ctx.gamma) - Rp;
  };
  DevTensor Y = (std::max(0.0, (r - c.d) / c.s) / r) * Rp;
  DevTensor G = residual(Y);
  double res = frobenius_norm(G);
  const int m = dev_dim(n);
  SmallMat A;
  SmallVec rhs(m), sol(m);
  double coords[5];
  for (int it = 0; it < kMaxIter; ++it) {
    if (res <= kTolLocal * (1.0 + rn)) return ctx.P + Y;
    A.resize(m, m);
    for (int b = 0; b < m; ++b) {
      const DevTensor col = c.d * hess_h_gamma_apply(Y, ctx.gamma, dev_basis(n, b));
      for (int a = 0; a < m; ++a)
        A(a, b) = (a == b ? c.s : 0.0) + contract(dev_basis(n, a), col);
    }
    dev_coords(G, coords);
    for (int k = 0; k < m; ++k) rhs(k) = -coords[k];
    sol = A.llt().solve(rhs);
    for (int k = 0; k < m; ++k) coords[k] = sol(k);
    const DevTensor step = dev_from_coords(n, coords);
    DevTensor Y_next = Y + step;
    DevTensor G_next = residual(Y_next);
    double res_next = frobenius_norm(G_next);
    for (int halv = 0; halv < 60 && res_next >= res; ++halv) {
      Y_next = 0.5 * (Y + Y_next);
      G_next = residual(Y_next);
      res_next = frobenius_norm(G_next);
    }
    Y = Y_next;
    G = G_next;
    res = res_next;
  }
  throw NewtonDivergence("tensor plastic solve did not converge", kMaxIter, res / (1.0 + rn));
}

SymTensor b_apply(const LocalPlasticContext& ctx, const SymTensor& E) {
  const LocalCoeffs c = local_coeffs(ctx);
  if (!ctx.gamma.finite()) return radial_return(ctx.z, *ctx.law, ctx.P, E).sigma;
  const DevTensor p = F_inverse(ctx, (2.0 * c.mu) * dev_project(E));
  return elasticity_at(c, E) - (2.0 * c.mu) * p.sym();
}

SymTensor b_tangent_apply(const LocalPlasticContext& ctx, const SymTensor& E, const SymTensor& V) {
  const LocalCoeffs c = local_coeffs(ctx);
  const DevTensor devV = dev_project(V);
  if (!ctx.gamma.finite()) {
    const DevTensor T = (2.0 * c.mu) * dev_project(E) - c.s * ctx.P;
    const double tn = frobenius_norm(T);
    if (tn <= c.d) return elasticity_at(c, V);
    const DevTensor That = (1.0 / tn) * T;
    const DevTensor dT = (2.0 * c.mu) * devV;
    const double along = contract(That, dT);
    const DevTensor dp =
        (along / c.s) * That + ((tn - c.d) / (c.s * tn)) * (dT - along * That);
    return elasticity_at(c, V) - (2.0 * c.mu) * dp.sym();
  }
  const DevTensor p = F_inverse(ctx, (2.0 * c.mu) * dev_project(E));
  const DevOperator op = plastic_operator(ctx, p);
  const DevTensor y = dev_solve(op, (2.0 * c.mu) * devV);
  return elasticity_at(c, V) - (2.0 * c.mu) * y.sym();
}

ReturnMapResult radial_return(double z, const MaterialLaw& law, const DevTensor& P,
                              const SymTensor& E) {
  LocalPlasticContext ctx{z, RegularizationParam::exact(), P, &law};
  const LocalCoeffs c = local_coeffs(ctx);
  const DevTensor T = (2.0 * c.mu) * dev_project(E) - c.s * P;
  const double tn = frobenius_norm(T);
  ReturnMapResult out;
  if (tn <= c.d) {
    out.p = P;
  } else {
    out.p = P + ((tn - c.d) / (c.s * tn)) * T;
  }
  out.sigma = elasticity_at(c, E) - (2.0 * c.mu) * out.p.sym();
  return out;
}

DevOperator plastic_operator(const LocalPlasticContext& ctx, const DevTensor& p) {
  assert(ctx.gamma.finite());
  const LocalCoeffs c = local_coeffs(ctx);
  const int n = p.dim();
  const int m = dev_dim(n);
  SmallMat A;
  dev_operator_coords(ctx, c, p, A);
  SmallMat Ainv = A.llt().solve(SmallMat::Identity(m, m));
  DevOperator op;
  op.n = n;
  op.m = m;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      op.A[a * m + b] = A(a, b);
      op.Ainv[a * m + b] = Ainv(a, b);
    }
  return op;
}

DevTensor dev_apply(const DevOperator& op, const DevTensor& x) {
  double in[5], out[5];
  dev_coords(x, in);
  for (int a = 0; a < op.m; ++a) {
    double acc = 0.0;
    for (int b = 0; b < op.m; ++b) acc += op.A[a * op.m + b] * in[b];
    out[a] = acc;
  }
  return dev_from_coords(op.n, out);
}

DevTensor dev_solve(const DevOperator& op, const DevTensor& rhs) {
  double in[5], out[5];
  dev_coords(rhs, in);
  for (int a = 0; a < op.m; ++a) {
    double acc = 0.0;
    for (int b = 0; b < op.m; ++b) acc += op.Ainv[a * op.m + b] * in[b];
    out[a] = acc;
  }
  return dev_from_coords(op.n, out);
}

CondensedPoint condense_point(const LocalPlasticContext& ctx, const SymTensor& E) {
  const LocalCoeffs c = local_coeffs(ctx);
  const int n = E.dim();
  const int m = sym_dim(n);
  CondensedPoint out;
  out.m = m;
  if (!ctx.gamma.finite()) {
    const ReturnMapResult rr = radial_return(ctx.z, *ctx.law, ctx.P, E);
    out.p = rr.p;
    out.sigma = rr.sigma;
    for (int b = 0; b < m; ++b) {
      const SymTensor col = b_tangent_apply(ctx, E, sym_basis(n, b));
      for (int a = 0; a < m; ++a) out.K[a * m + b] = contract(sym_basis(n, a), col);
    }
    return out;
  }
  out.p = F_inverse(ctx, (2.0 * c.mu) * dev_project(E));
  out.sigma = elasticity_at(c, E) - (2.0 * c.mu) * out.p.sym();
  const DevOperator op = plastic_operator(ctx, out.p);
  for (int b = 0; b < m; ++b) {
    const SymTensor Vb = sym_basis(n, b);
    const DevTensor y = dev_solve(op, (2.0 * c.mu) * dev_project(Vb));
    const SymTensor col = elasticity_at(c, Vb) - (2.0 * c.mu) * y.sym();
    for (int a = 0; a < m; ++a) out.K[a * m + b] = contract(sym_basis(n, a), col);
  }
  return out;
}

}  // namespace plastopt
