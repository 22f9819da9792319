#include "plastopt/tensor.hpp"

#include <vector>

namespace plastopt {

namespace {

std::vector<SymTensor> make_sym_basis(int n) {
  std::vector<SymTensor> b;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    SymTensor t(n);
    t.set(i, i, 1.0);
    b.push_back(t);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      SymTensor t(n);
      t.set(i, j, inv_sqrt2);
      b.push_back(t);
    }
  return b;
}

std::vector<DevTensor> make_dev_basis(int n) {
  std::vector<DevTensor> b;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  {
    SymTensor t(n);
    t.set(0, 0, inv_sqrt2);
    t.set(1, 1, -inv_sqrt2);
    b.emplace_back(t);
  }
  if (n == 3) {
    const double inv_sqrt6 = 1.0 / std::sqrt(6.0);
    SymTensor t(n);
    t.set(0, 0, inv_sqrt6);
    t.set(1, 1, inv_sqrt6);
    t.set(2, 2, -2.0 * inv_sqrt6);
    b.emplace_back(t);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      SymTensor t(n);
      t.set(i, j, inv_sqrt2);
      b.emplace_back(t);
    }
  return b;
}

}  // namespace

const SymTensor& sym_basis(int n, int k) {
  static const std::vector<SymTensor> b2 = make_sym_basis(2);
  static const std::vector<SymTensor> b3 = make_sym_basis(3);
  return n == 2 ? b2[k] : b3[k];
}

const DevTensor& dev_basis(int n, int k) {
  static const std::vector<DevTensor> b2 = make_dev_basis(2);
  static const std::vector<DevTensor> b3 = make_dev_basis(3);
  return n == 2 ? b2[k] : b3[k];
}

}  // namespace plastopt
