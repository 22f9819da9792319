#pragma once

#include <optional>
#include <vector>

#include "plastopt/assembly.hpp"
#include "plastopt/evolution.hpp"

namespace plastopt {

// Interface regularizer: integral of delta/2 |grad z|^2 + z^2(1-z)^2/(2 delta),
// evaluated with the same Q1 gradients and Gauss rule as the rest of assembly.
double modica_mortola(const Mesh& mesh, const NodalScalarField& z, double delta);

struct ObjectiveBreakdown {
  double terminal = 0.0;    // final-time load work against u_k
  double increments = 0.0;  // minus the sum of load-increment work against u_{j-1}
  double mm = 0.0;          // interface regularizer
  double total = 0.0;       // terminal + increments + mm
  double delta = 0.0;
};

ObjectiveBreakdown objective(const Mesh& mesh, const NodalScalarField& z,
                             const EvolutionState& state, const LoadProgram& loads,
                             const MaterialLaw& law, double delta);

// Backward-in-time dual trajectory. Index i runs over [1, k+1]: entry k+1 is
// the zero terminal condition, entry 0 is unused. Multipliers are indexed
// [1, k] with entry 0 unused.
struct AdjointState {
  std::vector<NodalVectorField> ubar;
  std::vector<QuadField<SymTensor>> epsbar;  // E ubar_i - pbar_i
  std::vector<QuadField<DevTensor>> pbar;
  std::vector<QuadField<DevTensor>> rho;  // dev(C(z) eps_i) - h(z) p_i, from the forward state
  std::vector<QuadField<DevTensor>> pi;   // d(z) hess_h(dp_i)(pbar_i - pbar_{i+1})
};

// One linear solve per step, backward from i = k. The system matrix is the
// consistent tangent of the converged forward step, so the dual problem is
// solved in the same condensed displacement form as the forward one.
// Requires a finite regularization parameter.
// The dual Hessian defaults to the smoothing the state was solved with; pass
// an explicit finite value to pair an exact-limit state with a smoothed dual.
AdjointState solve_adjoint(const Mesh& mesh, const NodalScalarField& z,
                           const EvolutionState& state, const LoadProgram& loads,
                           const MaterialLaw& law,
                           std::optional<RegularizationParam> smoothing = {});

// The per-step dissipation term of the descent functional can be assembled
// from smoothed-gradient increments or, equivalently, from the stress
// multiplier increments (rho_j - rho_{j-1}) scaled by d'(z)/d(z). Both are
// kept so the equivalence stays testable.
enum class DissipationGradientForm { smoothed_increments, multiplier_increments };

struct ReducedGradient {
  Vector functional;       // coefficients of the descent functional on nodal hats
  NodalScalarField riesz;  // representative in the delta (grad,grad) + (,) inner product
};

ReducedGradient reduced_gradient(const Mesh& mesh, const NodalScalarField& z,
                                 const EvolutionState& state, const AdjointState& adjoint,
                                 const LoadProgram& loads, const MaterialLaw& law, double delta,
                                 DissipationGradientForm form =
                                     DissipationGradientForm::smoothed_increments);

// Tangent trajectory of the state under a phase-field perturbation phi, plus
// the directional derivative of the objective along phi. Index i in [0, k];
// entry 0 is identically zero. Linear in phi; serves as the independent
// derivative oracle for reduced_gradient.
struct SensitivityState {
  std::vector<NodalVectorField> v;
  std::vector<QuadField<SymTensor>> eta;  // E v_i - q_i
  std::vector<QuadField<DevTensor>> q;
  double dJ = 0.0;
};

SensitivityState solve_forward_sensitivity(const Mesh& mesh, const NodalScalarField& z,
                                           const EvolutionState& state,
                                           const NodalScalarField& phi, const LoadProgram& loads,
                                           const MaterialLaw& law, double delta);

// Complementarity measures of the stationarity system, aggregated over all
// time steps and quadrature points (L1 by quadrature, Linf pointwise):
//   flow:  d(z)|dp_i| - rho_i . dp_i           (flow-rule alignment)
//   ortho: |pi_i . dp_i|                        (dual multiplier orthogonality)
//   stick: (d(z) - |rho_i|)_+ |pbar_i - pbar_{i+1}|  (no dual motion off the yield surface)
struct OptimalityReport {
  double flow_l1 = 0.0, flow_linf = 0.0;
  double ortho_l1 = 0.0, ortho_linf = 0.0;
  double stick_l1 = 0.0, stick_linf = 0.0;
};

OptimalityReport optimality_residuals(const Mesh& mesh, const NodalScalarField& z,
                                      const EvolutionState& state, const AdjointState& adjoint,
                                      const MaterialLaw& law);

}  // namespace plastopt
