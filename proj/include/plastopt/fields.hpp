#pragma once

#include <cassert>
#include <cmath>
#include <vector>

#include "plastopt/mesh.hpp"
#include "plastopt/tensor.hpp"

namespace plastopt {

class NodalScalarField {
 public:
  NodalScalarField() = default;
  explicit NodalScalarField(const Mesh& m, double init = 0.0)
      : mesh_(&m), v_(m.n_nodes(), init) {}

  const Mesh* mesh() const { return mesh_; }
  int size() const { return static_cast<int>(v_.size()); }
  double& operator[](int node) { return v_[node]; }
  double operator[](int node) const { return v_[node]; }
  std::vector<double>& data() { return v_; }
  const std::vector<double>& data() const { return v_; }

  double at_quad(int cell, int q) const {
    const auto& cn = mesh_->cells[cell];
    const auto& t = mesh_->tables;
    return t.value[q][0] * v_[cn[0]] + t.value[q][1] * v_[cn[1]] + t.value[q][2] * v_[cn[2]] +
           t.value[q][3] * v_[cn[3]];
  }

 private:
  const Mesh* mesh_ = nullptr;
  std::vector<double> v_;
};

// Two components per node, dof layout [2*node + component].
class NodalVectorField {
 public:
  NodalVectorField() = default;
  explicit NodalVectorField(const Mesh& m, double init = 0.0)
      : mesh_(&m), v_(2 * m.n_nodes(), init) {}

  const Mesh* mesh() const { return mesh_; }
  int size() const { return static_cast<int>(v_.size()); }
  double& operator()(int node, int c) { return v_[2 * node + c]; }
  double operator()(int node, int c) const { return v_[2 * node + c]; }
  double& dof(int k) { return v_[k]; }
  double dof(int k) const { return v_[k]; }
  std::vector<double>& data() { return v_; }
  const std::vector<double>& data() const { return v_; }

  // Symmetric gradient of the interpolant at a Gauss point.
  SymTensor strain_at_quad(int cell, int q) const {
    const auto& cn = mesh_->cells[cell];
    const auto& t = mesh_->tables;
    double g[4] = {0.0, 0.0, 0.0, 0.0};  // du0/dx, du0/dy, du1/dx, du1/dy
    for (int a = 0; a < 4; ++a) {
      const double u0 = v_[2 * cn[a]], u1 = v_[2 * cn[a] + 1];
      g[0] += t.grad_x[q][a] * u0;
      g[1] += t.grad_y[q][a] * u0;
      g[2] += t.grad_x[q][a] * u1;
      g[3] += t.grad_y[q][a] * u1;
    }
    return symmetrize(2, g);
  }

  void value_at_quad(int cell, int q, double out[2]) const {
    const auto& cn = mesh_->cells[cell];
    const auto& t = mesh_->tables;
    out[0] = out[1] = 0.0;
    for (int a = 0; a < 4; ++a) {
      out[0] += t.value[q][a] * v_[2 * cn[a]];
      out[1] += t.value[q][a] * v_[2 * cn[a] + 1];
    }
  }

 private:
  const Mesh* mesh_ = nullptr;
  std::vector<double> v_;
};

// Per-quadrature-point storage, 4 points per cell, index cell*4 + q.
template <class T>
class QuadField {
 public:
  QuadField() = default;
  QuadField(const Mesh& m, const T& init) : mesh_(&m), v_(4 * m.n_cells(), init) {}

  const Mesh* mesh() const { return mesh_; }
  int size() const { return static_cast<int>(v_.size()); }
  T& at(int cell, int q) { return v_[4 * cell + q]; }
  const T& at(int cell, int q) const { return v_[4 * cell + q]; }
  T& flat(int k) { return v_[k]; }
  const T& flat(int k) const { return v_[k]; }

 private:
  const Mesh* mesh_ = nullptr;
  std::vector<T> v_;
};

inline QuadField<DevTensor> dev_quadfield(const Mesh& m) {
  return QuadField<DevTensor>(m, DevTensor::zero(2));
}
inline QuadField<SymTensor> sym_quadfield(const Mesh& m) {
  return QuadField<SymTensor>(m, SymTensor::zero(2));
}

inline bool all_finite(const NodalScalarField& f) {
  for (double x : f.data())
    if (!std::isfinite(x)) return false;
  return true;
}
inline bool all_finite(const NodalVectorField& f) {
  for (double x : f.data())
    if (!std::isfinite(x)) return false;
  return true;
}

// Discrete norms used by the convergence studies: nodal L2/H1 via the same
// quadrature as assembly.
double l2_norm(const NodalVectorField& u);
double h1_norm(const NodalVectorField& u);  // sqrt(L2^2 + |grad|^2)
double l2_norm(const NodalScalarField& f);
double h1_norm(const NodalScalarField& f);
double l2_norm(const QuadField<SymTensor>& f);
double l2_norm(const QuadField<DevTensor>& f);

}  // namespace plastopt
