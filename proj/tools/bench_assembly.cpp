// Times the OpenMP kernels against the serial reference implementation and
// verifies that both produce bit-identical results (fixed-order accumulation
// makes that a hard guarantee, not a tolerance).
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "plastopt/evolution.hpp"
#include "plastopt/objective.hpp"
#include "plastopt/threading.hpp"

using namespace plastopt;

namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct BenchCase {
  Mesh mesh;
  NodalScalarField z;
  LoadProgram loads;
  MaterialLaw law;
  TimeGrid grid{2, 1.0};
  RegularizationParam gamma{100.0};
};

BenchCase make_case(int nx, int ny) {
  BenchCase b{build_rect_mesh(nx, ny, 2.0, 1.0,
                              {{Side::left, -1e9, 1e9, FacetTag::dirichlet},
                               {Side::right, -1e9, 1e9, FacetTag::neumann}}),
              {}, {}, {}};
  b.law.mu1 = 1.0;
  b.law.lambda1 = 0.7;
  b.law.h1 = 0.5;
  b.law.d1 = 0.3;
  b.loads.f = [](double, double, double, double* o) { o[0] = o[1] = 0.0; };
  b.loads.w = b.loads.f;
  b.loads.g = [](double t, double, double, double* o) {
    o[0] = 0.0;
    o[1] = -0.3 * t;
  };
  b.z = NodalScalarField(b.mesh);
  for (int j = 0; j <= b.mesh.ny; ++j)
    for (int i = 0; i <= b.mesh.nx; ++i)
      b.z[b.mesh.node_id(i, j)] =
          0.55 + 0.3 * std::cos(1.3 * i * b.mesh.hx) * std::cos(0.9 * j * b.mesh.hy);
  return b;
}

bool identical(const EvolutionState& a, const EvolutionState& b) {
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    for (int n = 0; n < a.steps[i].u.size(); ++n)
      if (a.steps[i].u.dof(n) != b.steps[i].u.dof(n)) return false;
    for (int k = 0; k < a.steps[i].p.size(); ++k) {
      if (frobenius_norm(a.steps[i].p.flat(k) - b.steps[i].p.flat(k)) != 0.0) return false;
      if (frobenius_norm(a.steps[i].eps.flat(k) - b.steps[i].eps.flat(k)) != 0.0)
        return false;
    }
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  int nx = 192, ny = 96, reps = 3;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string key = argv[i];
    const int v = std::atoi(argv[i + 1]);
    if (key == "--nx") nx = v;
    else if (key == "--ny") ny = v;
    else if (key == "--reps") reps = v;
    else {
      std::fprintf(stderr, "usage: bench_assembly [--nx N] [--ny N] [--reps N]\n");
      return 1;
    }
  }

  const BenchCase b = make_case(nx, ny);
  std::printf("mesh %dx%d (%d dofs), k=%d, threads=%d\n", nx, ny,
              2 * b.mesh.n_nodes(), b.grid.k, num_threads());

  EvolutionState ref;
  double best[2] = {1e300, 1e300};
  for (int mode = 0; mode < 2; ++mode) {
    set_exec_mode(mode == 0 ? ExecMode::serial : ExecMode::parallel);
    EvolutionState st;
    for (int r = 0; r < reps; ++r) {
      const double t0 = now_s();
      st = solve_evolution(b.mesh, b.z, b.grid, b.loads, b.gamma, b.law);
      best[mode] = std::min(best[mode], now_s() - t0);
    }
    if (mode == 0) ref = st;
    else if (!identical(ref, st)) {
      std::printf("FAIL: parallel result differs from the serial reference\n");
      return 2;
    }
  }
  set_exec_mode(ExecMode::parallel);

  std::printf("serial   best of %d: %8.3f s\n", reps, best[0]);
  std::printf("parallel best of %d: %8.3f s  (speedup %.2fx)\n", reps, best[1],
              best[0] / best[1]);
  std::printf("bit-identity: ok\n");
  return 0;
}
