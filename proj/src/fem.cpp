#include "gapcert/fem.hpp"

#include <algorithm>
#include <stdexcept>

namespace gapcert {

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += val[k] * x[static_cast<std::size_t>(col[k])];
    y[r] = s;
  }
}

double CsrMatrix::at(std::size_t r, std::size_t c) const {
  const auto first = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[r]);
  const auto last = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[r + 1]);
  const auto it = std::lower_bound(first, last, static_cast<int>(c));
  return (it != last && *it == static_cast<int>(c)) ? val[static_cast<std::size_t>(it - col.begin())] : 0.0;
}

ElementMatrices p1_element(const Point& a, const Point& b, const Point& c) {
  // Gradients of the barycentric functions are rot90(opposite edge) / (2·area).
  const double area2 = cross(a, b, c);
  const double area = 0.5 * std::abs(area2);
  const Point e[3] = {c - b, a - c, b - a};
  ElementMatrices em{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      em.stiffness[i][j] = (e[i].x * e[j].x + e[i].y * e[j].y) / (4.0 * area);
      em.mass[i][j] = area / 12.0 * (i == j ? 2.0 : 1.0);
    }
  }
  return em;
}

AssembledSystem assemble(const Mesh& m) {
  AssembledSystem s;
  s.vertex_to_interior.assign(m.vertices.size(), -1);
  for (std::size_t v = 0; v < m.vertices.size(); ++v) {
    if (!m.boundary[v]) {
      s.vertex_to_interior[v] = static_cast<int>(s.interior_to_vertex.size());
      s.interior_to_vertex.push_back(static_cast<int>(v));
    }
  }
  const std::size_t n = s.interior_to_vertex.size();
  if (n == 0) throw std::invalid_argument("assemble: mesh has no interior vertices");

  // Sparsity pattern: row r collects the interior neighbours of r.
  std::vector<std::vector<int>> pattern(n);
  for (const auto& el : m.elements) {
    for (int a : el) {
      const int ra = s.vertex_to_interior[static_cast<std::size_t>(a)];
      if (ra < 0) continue;
      auto& row = pattern[static_cast<std::size_t>(ra)];
      for (int b : el) {
        const int cb = s.vertex_to_interior[static_cast<std::size_t>(b)];
        if (cb >= 0 && std::find(row.begin(), row.end(), cb) == row.end()) row.push_back(cb);
      }
    }
  }
  CsrMatrix k;
  k.rows = n;
  k.row_ptr.resize(n + 1, 0);
  for (std::size_t r = 0; r < n; ++r) {
    std::sort(pattern[r].begin(), pattern[r].end());
    k.row_ptr[r + 1] = k.row_ptr[r] + pattern[r].size();
  }
  k.col.reserve(k.row_ptr[n]);
  for (const auto& row : pattern) k.col.insert(k.col.end(), row.begin(), row.end());
  k.val.assign(k.col.size(), 0.0);
  CsrMatrix mass = k;

  const auto slot = [&](int r, int c) {
    const auto first = k.col.begin() + static_cast<std::ptrdiff_t>(k.row_ptr[static_cast<std::size_t>(r)]);
    const auto last = k.col.begin() + static_cast<std::ptrdiff_t>(k.row_ptr[static_cast<std::size_t>(r) + 1]);
    return static_cast<std::size_t>(std::lower_bound(first, last, c) - k.col.begin());
  };

  for (const auto& el : m.elements) {
    const Point& a = m.vertices[static_cast<std::size_t>(el[0])];
    const Point& b = m.vertices[static_cast<std::size_t>(el[1])];
    const Point& c = m.vertices[static_cast<std::size_t>(el[2])];
    const ElementMatrices em = p1_element(a, b, c);
    for (const auto& row : em.mass) s.full_mass_total += row[0] + row[1] + row[2];
    for (int i = 0; i < 3; ++i) {
      const int r = s.vertex_to_interior[static_cast<std::size_t>(el[static_cast<std::size_t>(i)])];
      if (r < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int cc = s.vertex_to_interior[static_cast<std::size_t>(el[static_cast<std::size_t>(j)])];
        if (cc < 0) continue;
        const std::size_t at = slot(r, cc);
        k.val[at] += em.stiffness[i][j];
        mass.val[at] += em.mass[i][j];
      }
    }
  }
  s.stiffness = std::move(k);
  s.mass = std::move(mass);
  return s;
}

}  // namespace gapcert
