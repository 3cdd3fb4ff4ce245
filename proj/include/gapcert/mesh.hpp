#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "gapcert/geometry.hpp"

namespace gapcert {

inline constexpr int kMaxMeshLevel = 12;

/// Uniform midpoint refinement of a single triangle. Level L has 4^L
/// elements, all similar to the parent, on a structured (i, j) lattice with
/// N = 2^L: vertex (i, j) sits at v0 + (i/N)(v1 − v0) + (j/N)(v2 − v0).
/// Vertices are stored row by row (j outer, i inner).
struct Mesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> elements;  // counter-clockwise
  std::vector<char> boundary;                // one flag per vertex
  int level = 0;

  std::size_t interior_count() const;
};

/// Throws std::invalid_argument for level outside [0, 12] or area < 1e-14.
Mesh build_mesh(const VertexTriangle& t, int level);
Mesh build_mesh(const Triangle& t, int level);

/// Number of vertices of the level-L lattice: (2^L + 1)(2^L + 2)/2.
std::size_t lattice_vertex_count(int level);

/// Number of interior vertices of the level-L lattice: (2^L − 1)(2^L − 2)/2.
std::size_t lattice_interior_count(int level);

/// Linear interpolation of an interior nodal vector from level L to level
/// L + 1 (boundary values are zero). Nested P1 spaces make this exact.
std::vector<double> prolongate_interior(std::span<const double> coarse, int coarse_level);

}  // namespace gapcert
