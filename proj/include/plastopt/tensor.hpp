#pragma once

// Symmetric and deviatoric second-order tensors for spatial dimension n in {2,3}.
// Storage is the dense upper triangle, row-major: n=2 -> [00,01,11],
// n=3 -> [00,01,02,11,12,22]. n is a runtime value, one binary covers both.

#include <array>
#include <cassert>
#include <cmath>

namespace plastopt {

namespace detail {
inline int tri_count(int n) { return n == 2 ? 3 : 6; }
inline int tri_index(int n, int i, int j) {
  if (i > j) { const int t = i; i = j; j = t; }
  return i * n - (i * (i - 1)) / 2 + (j - i);
}
}  // namespace detail

class SymTensor {
 public:
  SymTensor() = default;
  explicit SymTensor(int n) : n_(n) { assert(n == 2 || n == 3); }

  static SymTensor zero(int n) { return SymTensor(n); }
  static SymTensor identity(int n) {
    SymTensor t(n);
    for (int i = 0; i < n; ++i) t.set(i, i, 1.0);
    return t;
  }

  int dim() const { return n_; }
  int stored() const { return detail::tri_count(n_); }

  double operator()(int i, int j) const { return a_[detail::tri_index(n_, i, j)]; }
  void set(int i, int j, double v) { a_[detail::tri_index(n_, i, j)] = v; }
  void add(int i, int j, double v) { a_[detail::tri_index(n_, i, j)] += v; }

  // raw triangular entry access (row-major upper triangle)
  double comp(int k) const { return a_[k]; }
  double& comp(int k) { return a_[k]; }

  double trace() const {
    double t = 0;
    for (int i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
  }

  SymTensor& operator+=(const SymTensor& o) {
    assert(n_ == o.n_);
    for (int k = 0; k < stored(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  SymTensor& operator-=(const SymTensor& o) {
    assert(n_ == o.n_);
    for (int k = 0; k < stored(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  SymTensor& operator*=(double s) {
    for (int k = 0; k < stored(); ++k) a_[k] *= s;
    return *this;
  }

 private:
  int n_ = 2;
  std::array<double, 6> a_{};
};

inline SymTensor operator+(SymTensor a, const SymTensor& b) { a += b; return a; }
inline SymTensor operator-(SymTensor a, const SymTensor& b) { a -= b; return a; }
inline SymTensor operator*(double s, SymTensor a) { a *= s; return a; }
inline SymTensor operator-(SymTensor a) { a *= -1.0; return a; }

// full contraction A_ij B_ij; off-diagonal entries count twice
inline double contract(const SymTensor& A, const SymTensor& B) {
  assert(A.dim() == B.dim());
  const int n = A.dim();
  double diag = 0, off = 0;
  for (int i = 0; i < n; ++i) {
    diag += A(i, i) * B(i, i);
    for (int j = i + 1; j < n; ++j) off += A(i, j) * B(i, j);
  }
  return diag + 2.0 * off;
}

inline double frobenius_norm(const SymTensor& A) { return std::sqrt(contract(A, A)); }

// Deviatoric (trace-free symmetric) tensor. Constructors re-project instead of
// rejecting near-trace inputs: |trace| <= 1e-12 * max(1, frobenius_norm) holds
// after every constructor and operation.
class DevTensor {
 public:
  DevTensor() = default;
  explicit DevTensor(int n) : s_(n) {}
  explicit DevTensor(const SymTensor& s) : s_(s) { reproject(); }

  static DevTensor zero(int n) { return DevTensor(n); }

  int dim() const { return s_.dim(); }
  int stored() const { return s_.stored(); }
  const SymTensor& sym() const { return s_; }
  operator const SymTensor&() const { return s_; }

  double operator()(int i, int j) const { return s_(i, j); }
  double comp(int k) const { return s_.comp(k); }
  double trace() const { return s_.trace(); }

  DevTensor& operator+=(const DevTensor& o) { s_ += o.s_; reproject(); return *this; }
  DevTensor& operator-=(const DevTensor& o) { s_ -= o.s_; reproject(); return *this; }
  DevTensor& operator*=(double c) { s_ *= c; return *this; }

 private:
  void reproject() {
    const double m = s_.trace() / s_.dim();
    if (m != 0.0)
      for (int i = 0; i < s_.dim(); ++i) s_.add(i, i, -m);
  }
  SymTensor s_;
};

inline DevTensor operator+(DevTensor a, const DevTensor& b) { a += b; return a; }
inline DevTensor operator-(DevTensor a, const DevTensor& b) { a -= b; return a; }
inline DevTensor operator*(double c, DevTensor a) { a *= c; return a; }
inline DevTensor operator-(DevTensor a) { a *= -1.0; return a; }

inline double contract(const DevTensor& A, const DevTensor& B) { return contract(A.sym(), B.sym()); }
inline double frobenius_norm(const DevTensor& A) { return frobenius_norm(A.sym()); }

// M - (tr M / n) I
inline DevTensor dev_project(const SymTensor& M) { return DevTensor(M); }

// Eu = (G + G^T)/2 from a full row-major n x n gradient
inline SymTensor symmetrize(int n, const double* G) {
  SymTensor s(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) s.set(i, j, 0.5 * (G[i * n + j] + G[j * n + i]));
  return s;
}

// Orthonormal (Frobenius) bases of the symmetric and deviatoric subspaces,
// used for the small dense solves of the pointwise plastic operators.
inline int sym_dim(int n) { return n == 2 ? 3 : 6; }
inline int dev_dim(int n) { return n == 2 ? 2 : 5; }

const SymTensor& sym_basis(int n, int k);
const DevTensor& dev_basis(int n, int k);

inline void sym_coords(const SymTensor& A, double* c) {
  const int m = sym_dim(A.dim());
  for (int k = 0; k < m; ++k) c[k] = contract(A, sym_basis(A.dim(), k));
}
inline SymTensor sym_from_coords(int n, const double* c) {
  SymTensor A(n);
  for (int k = 0; k < sym_dim(n); ++k) A += c[k] * sym_basis(n, k);
  return A;
}
inline void dev_coords(const DevTensor& Q, double* c) {
  const int m = dev_dim(Q.dim());
  for (int k = 0; k < m; ++k) c[k] = contract(Q.sym(), dev_basis(Q.dim(), k).sym());
}
inline DevTensor dev_from_coords(int n, const double* c) {
  DevTensor Q(n);
  for (int k = 0; k < dev_dim(n); ++k) Q += c[k] * dev_basis(n, k);
  return Q;
}

}  // namespace plastopt
