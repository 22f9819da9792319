#pragma once

#include <array>
#include <vector>

namespace plastopt {

enum class FacetTag { free, dirichlet, neumann };
enum class Side { left, right, bottom, top };

// Selects boundary facets by side and by the coordinate range along that side
// (x for bottom/top, y for left/right). A facet is covered when its midpoint
// lies in [lo, hi].
struct TagRule {
  Side side;
  double lo;
  double hi;
  FacetTag tag;
};

struct BoundaryFacet {
  int a, b;           // endpoint node ids, ordered along the boundary
  int cell;
  Side side;
  FacetTag tag = FacetTag::free;
  double measure;
  std::array<double, 2> normal;
};

// Reference-element tables for the 2x2 Gauss rule, shared by every cell of the
// uniform mesh: values[q][a] and physical gradients grad_x/grad_y[q][a].
struct Q1Tables {
  double value[4][4];
  double grad_x[4][4];
  double grad_y[4][4];
};

// Structured quadrilateral mesh of [0,Lx] x [0,Ly]. Cells are numbered
// row-major, connectivity is counterclockwise (bl, br, tr, tl).
struct Mesh {
  int nx = 0, ny = 0;
  double Lx = 0.0, Ly = 0.0;
  double hx = 0.0, hy = 0.0;
  std::vector<std::array<double, 2>> nodes;
  std::vector<std::array<int, 4>> cells;
  std::vector<BoundaryFacet> facets;
  std::vector<char> dirichlet_node;  // per node, both displacement components pinned
  Q1Tables tables;

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_cells() const { return static_cast<int>(cells.size()); }
  int node_id(int i, int j) const { return j * (nx + 1) + i; }
  double cell_weight() const { return 0.25 * hx * hy; }  // Gauss weight x Jacobian

  // 2x2 Gauss point in physical coordinates.
  std::array<double, 2> quad_point(int cell, int q) const;
};

// Throws ConfigError listing every violated rule (empty cover, double tag,
// missing Dirichlet part).
Mesh build_rect_mesh(int nx, int ny, double Lx, double Ly, const std::vector<TagRule>& rules);

}  // namespace plastopt
