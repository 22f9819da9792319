#pragma once

#include <memory>

#include "plastopt/assembly.hpp"

namespace plastopt {

// SPD solves: sparse Cholesky up to 2e5 dofs, Jacobi-preconditioned conjugate
// gradients beyond. The class form keeps the factorization for repeated rhs.
class SpdSolver {
 public:
  SpdSolver();
  ~SpdSolver();
  SpdSolver(SpdSolver&&) noexcept;
  SpdSolver& operator=(SpdSolver&&) noexcept;

  void factor(const SparseMat& A);
  Vector solve(const Vector& b) const;
  bool ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Vector solve_spd(const SparseMat& A, const Vector& b);

}  // namespace plastopt
