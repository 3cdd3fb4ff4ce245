#include "gapcert/mesh.hpp"

#include <stdexcept>
#include <string>

namespace gapcert {

namespace {

// Offset of lattice row j when rows have N + 1 − j vertices.
std::size_t row_offset(std::size_t j, std::size_t n) { return j * (n + 1) - j * (j - 1) / 2; }

// Offset of interior row j (j ≥ 1) when interior rows have N − 1 − j entries.
std::size_t interior_row_offset(std::size_t j, std::size_t n) {
  // Σ_{r=1}^{j-1} (N − 1 − r)
  return (j - 1) * (n - 1) - (j - 1) * j / 2;
}

}  // namespace

std::size_t Mesh::interior_count() const {
  std::size_t c = 0;
  for (char b : boundary) c += b ? 0 : 1;
  return c;
}

std::size_t lattice_vertex_count(int level) {
  const std::size_t n = std::size_t{1} << level;
  return (n + 1) * (n + 2) / 2;
}

std::size_t lattice_interior_count(int level) {
  const std::size_t n = std::size_t{1} << level;
  return n < 2 ? 0 : (n - 1) * (n - 2) / 2;
}

Mesh build_mesh(const VertexTriangle& t, int level) {
  if (level < 0 || level > kMaxMeshLevel) {
    throw std::invalid_argument("mesh level must lie in [0, " + std::to_string(kMaxMeshLevel) +
                                "], got " + std::to_string(level));
  }
  if (!(t.area() >= 1e-14)) throw std::invalid_argument("degenerate triangle (area < 1e-14)");

  // Orient counter-clockwise so every element has positive signed area.
  VertexTriangle tri = t;
  if (tri.signed_area() < 0.0) std::swap(tri.v[1], tri.v[2]);
  const Point o = tri.v[0];
  const Point e1 = tri.v[1] - o;
  const Point e2 = tri.v[2] - o;

  const int n = 1 << level;
  Mesh m;
  m.level = level;
  m.vertices.reserve(lattice_vertex_count(level));
  m.boundary.reserve(lattice_vertex_count(level));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i + j <= n; ++i) {
      const double s = static_cast<double>(i) / n;
      const double r = static_cast<double>(j) / n;
      m.vertices.push_back({o.x + s * e1.x + r * e2.x, o.y + s * e1.y + r * e2.y});
      m.boundary.push_back(i == 0 || j == 0 || i + j == n ? 1 : 0);
    }
  }

  const auto idx = [n](int i, int j) { return static_cast<int>(row_offset(j, n)) + i; };
  m.elements.reserve(std::size_t{1} << (2 * level));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i + j < n; ++i) {
      m.elements.push_back({idx(i, j), idx(i + 1, j), idx(i, j + 1)});
      if (i + j + 1 < n) m.elements.push_back({idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)});
    }
  }
  return m;
}

Mesh build_mesh(const Triangle& t, int level) { return build_mesh(t.vertices(), level); }

std::vector<double> prolongate_interior(std::span<const double> coarse, int coarse_level) {
  if (coarse.size() != lattice_interior_count(coarse_level)) {
    throw std::invalid_argument("prolongate_interior: vector length does not match level");
  }
  const std::size_t nc = std::size_t{1} << coarse_level;
  const std::size_t nf = 2 * nc;
  // Coarse lattice value with zero boundary.
  const auto cval = [&](std::size_t i, std::size_t j) -> double {
    if (i == 0 || j == 0 || i + j >= nc) return 0.0;
    return coarse[interior_row_offset(j, nc) + (i - 1)];
  };
  std::vector<double> fine(lattice_interior_count(coarse_level + 1));
  for (std::size_t j = 1; j + 2 <= nf; ++j) {
    for (std::size_t i = 1; i + j + 1 <= nf; ++i) {
      double v;
      const bool ie = i % 2 == 0;
      const bool je = j % 2 == 0;
      if (ie && je) {
        v = cval(i / 2, j / 2);
      } else if (!ie && je) {
        v = 0.5 * (cval(i / 2, j / 2) + cval(i / 2 + 1, j / 2));
      } else if (ie && !je) {
        v = 0.5 * (cval(i / 2, j / 2) + cval(i / 2, j / 2 + 1));
      } else {
        // Midpoint of the diagonal edge (i+1, j) – (i, j+1) in coarse units.
        v = 0.5 * (cval(i / 2 + 1, j / 2) + cval(i / 2, j / 2 + 1));
      }
      fine[interior_row_offset(j, nf) + (i - 1)] = v;
    }
  }
  return fine;
}

}  // namespace gapcert
