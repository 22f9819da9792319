#pragma once

#include <map>
#include <string>
#include <vector>

#include "plastopt/optimizer.hpp"

namespace plastopt {

// Study output: rows of numbers under self-describing column headers, plus a
// flat set of summary scalars for threshold checks.
struct Table {
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::map<std::string, double> summary;
};

// Everything a study needs about one problem instance.
struct LabBundle {
  Mesh mesh;
  NodalScalarField z;
  LoadProgram loads;
  MaterialLaw law;
  TimeGrid grid;
  RegularizationParam gamma;
  double delta = 0.1;
};

// Cantilever strip: left edge clamped, downward traction ramp on the middle
// third of the right edge, contrasted material, smooth z strictly inside
// (0,1). All quantitative study baselines refer to this fixture.
LabBundle regression_fixture(int nx = 12, int ny = 6, int k = 4, double gamma = 100.0);

// Distance of each smoothed state to the exact-dissipation solution, measured
// as the sum over time nodes of |u|_H1 + |eps|_L2 + |p|_L2 differences.
Table run_gamma_sweep(const LabBundle& bundle, const std::vector<double>& gammas);

// Piecewise-affine interpolant distances between runs at k and 2k, in
// L-infinity(0,T; H1) for u and discrete H1(0,T) / L2(0,T) norms for the
// strain fields, with empirical orders between successive refinements.
Table run_timestep_sweep(const LabBundle& bundle, const std::vector<int>& ks);

// Full optimization per interface width; reports objective, iterations, and
// the measured width of the transition band {0.05 < z < 0.95}.
Table run_delta_sweep(const LabBundle& bundle, const std::vector<double>& deltas,
                      const OptimizerConfig& cfg);

// Minimizes the interface energy over a thin strip with the phase pinned to 0
// and 1 at opposite ends; reports energy per unit interface length against
// the analytic limit 1/6.
Table run_mm_profile_check(const std::vector<double>& deltas, int cells = 200,
                           double length = 1.0);

// Max over time nodes of the dual norm sum |ubar|_H1 + |epsbar|_L2 +
// |pbar|_L2 per (k, gamma) cell, with log-log trend slopes in the summary.
Table run_adjoint_bound_study(const LabBundle& bundle, const std::vector<int>& ks,
                              const std::vector<double>& gammas);

// Measured state-to-phase sensitivity ratios |S(z+e psi) - S(z)| / e for a
// fixed direction psi with unit sup norm; zero sizes are reported as skipped.
Table run_lipschitz_in_z_study(const LabBundle& bundle, const std::vector<double>& sizes);

}  // namespace plastopt
