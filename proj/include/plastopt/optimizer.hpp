#pragma once

#include <string>
#include <vector>

#include "plastopt/objective.hpp"

namespace plastopt {

struct OptimizerConfig {
  int max_outer_iters = 200;
  double armijo_c1 = 1e-4;    // sufficient-decrease fraction
  double initial_step = 1.0;
  double shrink = 0.5;        // backtracking factor
  double grow = 1.5;          // step recovery after an accepted iteration
  int max_backtrack = 30;
  double grad_tol = 1e-6;     // on the weighted H1 norm of the Riesz gradient
  double delta = 0.1;         // interface width of the regularizer
  bool clamp = false;         // project iterates to [0,1]; the laws are
                              // constant outside, so off by default
  double volume_penalty = 0.0;  // quadratic penalty weight on the z volume;
                                // zero disables the hook entirely
  double volume_target = 0.0;
};

struct IterationRecord {
  int iter = 0;
  double J = 0.0;  // value at the iterate before stepping
  ObjectiveBreakdown breakdown;
  double grad_norm = 0.0;
  double step = 0.0;  // accepted step length, 0 on the terminal record
  int backtracks = 0;
  double z_min = 0.0, z_max = 0.0;
};

struct OptimizationTrace {
  std::vector<IterationRecord> iters;
  bool converged = false;
  std::string stop_reason;
};

struct OptimizationResult {
  NodalScalarField z;
  EvolutionState state;  // forward trajectory at the returned z
  OptimizationTrace trace;
};

// One message per out-of-range field; empty means usable.
std::vector<std::string> validate(const OptimizerConfig& cfg);

// Armijo-backtracked descent along the negative Riesz gradient, re-solving the
// evolution per trial step with warm starts. Stops on the gradient tolerance
// or the iteration cap; a failed line search returns the best iterate with the
// reason recorded.
OptimizationResult optimize(const Mesh& mesh, NodalScalarField z0, const TimeGrid& grid,
                            const LoadProgram& loads, RegularizationParam gamma,
                            const MaterialLaw& law, const OptimizerConfig& cfg);

struct ContinuationStage {
  double gamma = 0.0;
  OptimizationResult result;
  double z_shift_h1 = 0.0;  // H1 distance to the previous stage's solution
};

struct ContinuationResult {
  std::vector<ContinuationStage> stages;
  NodalScalarField z;      // solution of the last stage
  double J_final = 0.0;    // objective at the last finite smoothing
  double J_exact = 0.0;    // objective of an exact-dissipation re-solve at z
};

// Runs optimize per schedule entry, warm-starting each stage from the
// previous solution, then cross-checks the final iterate against a forward
// solve with the exact dissipation density.
ContinuationResult gamma_continuation(const Mesh& mesh, NodalScalarField z0,
                                      const TimeGrid& grid, const LoadProgram& loads,
                                      const std::vector<double>& schedule,
                                      const MaterialLaw& law, const OptimizerConfig& cfg);

}  // namespace plastopt
