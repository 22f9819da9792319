#pragma once

#include <Eigen/Sparse>

#include <functional>
#include <vector>

#include "plastopt/fields.hpp"
#include "plastopt/loads.hpp"
#include "plastopt/local_return.hpp"

namespace plastopt {

using SparseMat = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

// Constrained dofs keep full-size systems: matrices get identity rows/columns,
// vectors get zeros. Both displacement components are pinned on Dirichlet nodes.
void zero_dirichlet(const Mesh& mesh, Vector& v);

// Pointwise condensed evaluation at every Gauss point for a displacement u:
// plastic strain, stress, and (optionally) the consistent tangent blocks.
struct CondensedState {
  QuadField<DevTensor> p;
  QuadField<SymTensor> sigma;
  std::vector<CondensedPoint> points;  // filled only when tangents were requested
};

CondensedState condense_state(const Mesh& mesh, const NodalScalarField& z,
                              const QuadField<DevTensor>& p_prev, RegularizationParam gamma,
                              const MaterialLaw& law, const NodalVectorField& u,
                              bool want_tangent);

// Linear functionals on the displacement space, returned unconstrained so they
// can be paired with fields that are nonzero on the Dirichlet part.
Vector assemble_stress_divergence(const Mesh& mesh, const QuadField<SymTensor>& sigma);
Vector assemble_body_load(const Mesh& mesh, const QuadField<double>& weight, const SpaceFn& f);
Vector assemble_boundary_load(const Mesh& mesh, const SpaceFn& g);

// Tangent stiffness from condensed point blocks; identity on Dirichlet dofs.
SparseMat assemble_tangent_matrix(const Mesh& mesh, const std::vector<CondensedPoint>& points);

// Residual of the condensed displacement equation at u (the gradient of the
// incremental energy), zeroed on Dirichlet dofs; Jacobian on request.
struct StateSystem {
  Vector residual;
  SparseMat jacobian;
  CondensedState condensed;
};

StateSystem assemble_state_residual(const Mesh& mesh, const NodalScalarField& z,
                                    const QuadField<DevTensor>& p_prev,
                                    RegularizationParam gamma, const MaterialLaw& law,
                                    const StepLoads& loads, const NodalVectorField& u,
                                    bool want_jacobian);

// Incremental energy at u with the plastic increment condensed out; the merit
// function for the Newton line search and the oracle for the residual.
double incremental_energy(const Mesh& mesh, const NodalScalarField& z,
                          const QuadField<DevTensor>& p_prev, RegularizationParam gamma,
                          const MaterialLaw& law, const StepLoads& loads,
                          const NodalVectorField& u);

// Helpers for quadrature-point evaluation of z-dependent weights.
QuadField<double> eval_at_quad(const Mesh& mesh,
                               const std::function<double(int cell, int q, double x, double y)>& fn);
QuadField<double> coeff_at_quad(const Mesh& mesh, const NodalScalarField& z,
                                const MaterialLaw& law, Coeff which);

// Scalar Q1 form delta (grad, grad) + (., .), unconstrained, and its solve.
SparseMat assemble_scalar_h1_matrix(const Mesh& mesh, double delta);
NodalScalarField h1_riesz_solve(const Mesh& mesh, double delta, const Vector& G);

}  // namespace plastopt
