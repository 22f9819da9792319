#include "plastopt/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <Eigen/Core>

#include "plastopt/material.hpp"

namespace plastopt {

std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

unsigned long long fnv1a64(const std::string& bytes) {
  unsigned long long h = 1469598103934665603ull;
  for (const unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

std::string fnv1a64_hex(const std::string& bytes) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", fnv1a64(bytes));
  return buf;
}

std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "' for hashing");
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a64_hex(ss.str());
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: one newline convention
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

void escape_json(std::ostream& os, const std::string& s) {
  os << '"';
  for (const char ch : s) {
    switch (ch) {
      case '"': os << "\\\""; break;
      case '\\': os << "\\\\"; break;
      case '\n': os << "\\n"; break;
      case '\t': os << "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          os << buf;
        } else {
          os << ch;
        }
    }
  }
  os << '"';
}

}  // namespace

void write_csv(const std::string& path, const Table& t) {
  std::ofstream out = open_out(path);
  out << "# " << t.title << "\n";
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    out << t.columns[c] << (c + 1 < t.columns.size() ? "," : "\n");
  for (const auto& row : t.rows)
    for (std::size_t c = 0; c < row.size(); ++c)
      out << format_float(row[c]) << (c + 1 < row.size() ? "," : "\n");
  for (const auto& [key, value] : t.summary)
    out << "# summary " << key << " " << format_float(value) << "\n";
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void write_vtk(const std::string& path, const Mesh& mesh, const NodalScalarField& z,
               const MaterialLaw& law, const StepState& step) {
  std::ofstream out = open_out(path);
  out << "# vtk DataFile Version 3.0\n";
  out << "plastopt snapshot\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";

  out << "POINTS " << mesh.n_nodes() << " double\n";
  for (const auto& n : mesh.nodes)
    out << format_float(n[0]) << " " << format_float(n[1]) << " 0\n";

  out << "CELLS " << mesh.n_cells() << " " << 5 * mesh.n_cells() << "\n";
  for (const auto& cn : mesh.cells)
    out << "4 " << cn[0] << " " << cn[1] << " " << cn[2] << " " << cn[3] << "\n";
  out << "CELL_TYPES " << mesh.n_cells() << "\n";
  for (int i = 0; i < mesh.n_cells(); ++i) out << "9\n";  // VTK_QUAD

  out << "POINT_DATA " << mesh.n_nodes() << "\n";
  out << "VECTORS displacement double\n";
  for (int n = 0; n < mesh.n_nodes(); ++n)
    out << format_float(step.u(n, 0)) << " " << format_float(step.u(n, 1)) << " 0\n";
  out << "SCALARS phase double 1\n";
  out << "LOOKUP_TABLE default\n";
  for (int n = 0; n < mesh.n_nodes(); ++n) out << format_float(z[n]) << "\n";

  out << "CELL_DATA " << mesh.n_cells() << "\n";
  out << "SCALARS plastic_norm double 1\n";
  out << "LOOKUP_TABLE default\n";
  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    double acc = 0.0;
    for (int q = 0; q < 4; ++q) acc += frobenius_norm(step.p.at(cell, q));
    out << format_float(0.25 * acc) << "\n";
  }
  out << "SCALARS stress_norm double 1\n";
  out << "LOOKUP_TABLE default\n";
  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    double acc = 0.0;
    for (int q = 0; q < 4; ++q) {
      const double zq = z.at_quad(cell, q);
      acc += frobenius_norm(elasticity_apply(law, zq, step.eps.at(cell, q)));
    }
    out << format_float(0.25 * acc) << "\n";
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void write_manifest(const std::string& path, const Manifest& m) {
  std::ofstream out = open_out(path);
  out << "{\n";
  out << "  \"mode\": ";
  escape_json(out, m.mode);
  out << ",\n  \"config\": ";
  escape_json(out, m.config_path);
  out << ",\n  \"config_hash\": ";
  escape_json(out, m.config_hash);
  out << ",\n  \"build\": ";
  escape_json(out, m.build);
  out << ",\n  \"threads\": " << m.threads;
  out << ",\n  \"exit_code\": " << m.exit_code;

  out << ",\n  \"artifacts\": [";
  for (std::size_t i = 0; i < m.artifacts.size(); ++i) {
    out << (i ? ",\n    " : "\n    ") << "{\"path\": ";
    escape_json(out, m.artifacts[i].path);
    out << ", \"bytes\": " << m.artifacts[i].bytes << ", \"hash\": ";
    escape_json(out, m.artifacts[i].hash);
    out << "}";
  }
  out << (m.artifacts.empty() ? "]" : "\n  ]");

  out << ",\n  \"wall_times_s\": {";
  for (std::size_t i = 0; i < m.wall_times.size(); ++i) {
    out << (i ? ", " : "");
    escape_json(out, m.wall_times[i].first);
    out << ": " << format_float(m.wall_times[i].second);
  }
  out << "}";

  out << ",\n  \"summary\": {";
  for (std::size_t i = 0; i < m.summary.size(); ++i) {
    out << (i ? ", " : "");
    escape_json(out, m.summary[i].first);
    out << ": " << format_float(m.summary[i].second);
  }
  out << "}";

  out << ",\n  \"errors\": [";
  for (std::size_t i = 0; i < m.errors.size(); ++i) {
    out << (i ? ", " : "");
    escape_json(out, m.errors[i]);
  }
  out << "]\n}\n";
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string build_description() {
  std::ostringstream ss;
  ss << "plastopt 1.0.0; eigen " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "."
     << EIGEN_MINOR_VERSION << "; compiler " << __VERSION__;
#ifdef _OPENMP
  ss << "; openmp " << _OPENMP;
#endif
  return ss.str();
}

}  // namespace plastopt
