#pragma once

#include <vector>

#include "plastopt/assembly.hpp"
#include "plastopt/linsolve.hpp"

namespace plastopt {

struct StepState {
  NodalVectorField u;
  QuadField<SymTensor> eps;  // Eu - p at every Gauss point
  QuadField<DevTensor> p;
};

struct EvolutionState {
  std::vector<StepState> steps;               // indices 0..k
  std::vector<double> dissipation_increment;  // per step i=1..k, with the gamma used
  RegularizationParam gamma;
  TimeGrid grid;
};

struct NewtonOptions {
  double tol = 1e-10;  // relative to max(external load norm, initial residual)
  int max_iter = 40;
  int max_backtrack = 40;
  double armijo_c = 1e-4;
};

struct NewtonReport {
  int iterations = 0;
  double final_residual = 0.0;
  std::vector<double> residual_history;
};

// One incremental minimization: Newton on the condensed displacement equation
// with energy backtracking, then pointwise plastic recovery.
StepState solve_increment(const Mesh& mesh, const NodalScalarField& z, const StepState& prev,
                          const StepLoads& loads, RegularizationParam gamma,
                          const MaterialLaw& law, const NewtonOptions& opts = {},
                          const NodalVectorField* warm_start = nullptr,
                          NewtonReport* report = nullptr);

EvolutionState solve_evolution(const Mesh& mesh, const NodalScalarField& z, const TimeGrid& grid,
                               const LoadProgram& loads, RegularizationParam gamma,
                               const MaterialLaw& law, const NewtonOptions& opts = {},
                               const EvolutionState* warm_start = nullptr);

// Stored-minus-work energy of one step state at the given time's loads.
double energy(const Mesh& mesh, const NodalScalarField& z, const MaterialLaw& law,
              const StepState& state, const StepLoads& loads);

// Upper-bound work estimate minus (energy + accumulated dissipation), one value
// per time node i=1..k; nonnegative up to solver tolerance.
std::vector<double> energy_inequality_slack(const Mesh& mesh, const NodalScalarField& z,
                                            const MaterialLaw& law, const EvolutionState& state,
                                            const LoadProgram& loads);

// Accumulated exact dissipation sum_i D(z, p_i - p_{i-1}).
double total_dissipation(const Mesh& mesh, const NodalScalarField& z, const MaterialLaw& law,
                         const EvolutionState& state);

// Compares the accepted step against random admissible competitors
// (u + du, eps + E du - dp, p + dp) with du = 0 on the Dirichlet part.
// Returns the worst value of own_objective - competitor_objective (a positive
// result violates minimality).
double stability_violation(const Mesh& mesh, const NodalScalarField& z, const MaterialLaw& law,
                           RegularizationParam gamma, const StepState& prev,
                           const StepState& cur, const StepLoads& loads, int n_competitors,
                           double amplitude, unsigned long long seed);

}  // namespace plastopt
