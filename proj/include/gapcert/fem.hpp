#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gapcert/mesh.hpp"

namespace gapcert {

/// Compressed sparse row matrix with both triangles stored.
struct CsrMatrix {
  std::size_t rows = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<int> col;
  std::vector<double> val;

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  double at(std::size_t r, std::size_t c) const;
  std::size_t nonzeros() const { return val.size(); }
};

/// P1 stiffness and consistent mass matrices with Dirichlet nodes
/// eliminated. Interior unknowns follow the mesh vertex order.
struct AssembledSystem {
  CsrMatrix stiffness;
  CsrMatrix mass;
  std::vector<int> interior_to_vertex;
  std::vector<int> vertex_to_interior;  // −1 on the boundary
  /// Sum of every entry of the unrestricted mass matrix (= domain area).
  double full_mass_total = 0.0;

  std::size_t size() const { return stiffness.rows; }
};

/// Exact element matrices of the linear Lagrange triangle.
struct ElementMatrices {
  double stiffness[3][3];
  double mass[3][3];
};
ElementMatrices p1_element(const Point& a, const Point& b, const Point& c);

/// Throws std::invalid_argument when the mesh has no interior vertex.
AssembledSystem assemble(const Mesh& m);

}  // namespace gapcert
