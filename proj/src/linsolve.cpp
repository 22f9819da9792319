#include "plastopt/linsolve.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/IterativeLinearSolvers>

#include <stdexcept>

namespace plastopt {

namespace {
constexpr int kDirectLimit = 200000;
}

struct SpdSolver::Impl {
  Eigen::SimplicialLLT<SparseMat> llt;
  Eigen::ConjugateGradient<SparseMat, Eigen::Lower | Eigen::Upper> cg;
  SparseMat A;  // kept for the iterative path
  bool direct = true;
  bool ready = false;
};

SpdSolver::SpdSolver() : impl_(new Impl) {}
SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

void SpdSolver::factor(const SparseMat& A) {
  impl_->direct = A.rows() <= kDirectLimit;
  if (impl_->direct) {
    impl_->llt.compute(A);
    if (impl_->llt.info() != Eigen::Success)
      throw std::runtime_error("sparse Cholesky factorization failed (matrix not SPD)");
  } else {
    impl_->A = A;
    impl_->cg.setTolerance(1e-13);
    impl_->cg.setMaxIterations(10 * A.rows());
    impl_->cg.compute(impl_->A);
  }
  impl_->ready = true;
}

Vector SpdSolver::solve(const Vector& b) const {
  if (!impl_->ready) throw std::logic_error("solve before factor");
  if (impl_->direct) return impl_->llt.solve(b);
  const Vector x = impl_->cg.solve(b);
  if (impl_->cg.info() != Eigen::Success)
    throw std::runtime_error("conjugate gradient did not reach tolerance");
  return x;
}

bool SpdSolver::ready() const { return impl_->ready; }

Vector solve_spd(const SparseMat& A, const Vector& b) {
  SpdSolver s;
  s.factor(A);
  return s.solve(b);
}

}  // namespace plastopt
