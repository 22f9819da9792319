#pragma once

#include <string>
#include <utility>
#include <vector>

#include "plastopt/evolution.hpp"
#include "plastopt/lab.hpp"

namespace plastopt {

// Round-trip-exact decimal text for a double (17 significant digits).
std::string format_float(double v);

// FNV-1a, 64 bit, of a byte string; stable across platforms.
unsigned long long fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);
std::string hash_file(const std::string& path);  // throws std::runtime_error

// Study table as CSV: "# title", a header row, data rows, then the summary
// scalars as "# summary key value" trailer lines.
void write_csv(const std::string& path, const Table& t);

// Legacy ASCII VTK of one trajectory snapshot: point data u (3-vector, zero
// third component) and z, cell data |p| and |sigma| averaged over the four
// Gauss points.
void write_vtk(const std::string& path, const Mesh& mesh, const NodalScalarField& z,
               const MaterialLaw& law, const StepState& step);

struct Artifact {
  std::string path;   // relative to the manifest directory
  unsigned long long bytes = 0;
  std::string hash;
};

struct Manifest {
  std::string mode;
  std::string config_path;
  std::string config_hash;
  int threads = 1;
  std::string build;  // compiler and library versions
  std::vector<Artifact> artifacts;
  std::vector<std::pair<std::string, double>> wall_times;  // seconds, insertion order
  std::vector<std::pair<std::string, double>> summary;
  std::vector<std::string> errors;
  int exit_code = 0;
};

void write_manifest(const std::string& path, const Manifest& m);

std::string build_description();

}  // namespace plastopt
