#include "gapcert/deformation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include "gapcert/lame.hpp"
#include "gapcert/quadrature.hpp"

namespace gapcert::deform {

namespace {

constexpr double kK = 0.5 * kSqrt3;  // apex height of the equilateral triangle

void require_no_collapse(double k, Direction d, double t) {
  if (!(k > 0.0)) throw std::invalid_argument("apex height must be positive");
  if (!(t >= 0.0)) throw std::invalid_argument("deformation magnitude must be non-negative");
  if (!(k + t * d.b > 0.0)) throw std::invalid_argument("deformation collapses the triangle (k + t*b <= 0)");
}

const std::vector<QuadratureNode>& rule(int degree) {
  thread_local int cached_degree = -1;
  thread_local std::vector<QuadratureNode> r;
  if (degree != cached_degree) {
    r = composite_rule(lame::equilateral(), degree, 4);
    cached_degree = degree;
  }
  return r;
}

double apply(const SecondOrderOperator& op, const lame::Jet& j) {
  return op.cxx * j.fxx + op.cxy * j.fxy + op.cyy * j.fyy;
}

// Directional part of the closed form.
double closed_I(double al, double be, double a, double b) {
  const double pi2 = kPi * kPi;
  const double x = al * al - be * be + 2.0 * kSqrt3 * al * be;
  const double y = be * be - al * al + 2.0 * al * be / kSqrt3;
  return -((25600.0 * pi2 + x * 59049.0) / (1800.0 * kSqrt3)) * b - (6561.0 / 200.0) * y * a;
}

double objective(double s, double a) { return closed_I(std::cos(s), std::sin(s), a, -std::sqrt(std::max(0.0, 1.0 - a * a))); }

}  // namespace

Direction make_direction(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b) || std::abs(a * a + b * b - 1.0) > 1e-14) {
    throw std::invalid_argument("deformation direction must be a unit vector");
  }
  return {a, b};
}

Direction direction_from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }

bool preserves_diameter(Direction d) { return d.a >= 0.0 && d.a + kSqrt3 * d.b <= 1e-15; }

Mat2 deformation_matrix(Point apex, Direction d, double t) {
  require_no_collapse(apex.y, d, t);
  return {{{1.0, t * d.a / apex.y}, {0.0, 1.0 + t * d.b / apex.y}}};
}

Point deformed_equilateral_apex(Direction d, double t) {
  require_no_collapse(kK, d, t);
  return {0.5 + t * d.a, kK + t * d.b};
}

InverseMetric inverse_metric(double k, Direction d, double t) {
  require_no_collapse(k, d, t);
  const double den = (k + t * d.b) * (k + t * d.b);
  return {(k * k + 2.0 * d.b * k * t + t * t) / den, -t * d.a * k / den, k * k / den};
}

GammaBounds gamma_bounds(double k, Direction d, double t) {
  const InverseMetric g = inverse_metric(k, d, t);
  const double mean = 0.5 * (g.A + g.D);
  const double half = 0.5 * std::sqrt((g.A - g.D) * (g.A - g.D) + 4.0 * g.B * g.B);
  return {mean - half, mean + half};
}

double gamma_spread(double k, Direction d, double t) {
  require_no_collapse(k, d, t);
  const double den = (k + t * d.b) * (k + t * d.b);
  return t * std::sqrt(4.0 * k * k + t * t + 4.0 * d.b * k * t) / den;
}

PerturbationOperators perturbation_operator_coeffs(Direction d, double t) {
  const double r = kSqrt3 + 2.0 * t * d.b;
  if (!(r > 0.0)) throw std::invalid_argument("deformation collapses the triangle (sqrt(3) + 2tb <= 0)");
  if (!(t >= 0.0)) throw std::invalid_argument("deformation magnitude must be non-negative");
  const double r2 = r * r;
  PerturbationOperators p;
  const InverseMetric g = inverse_metric(kK, d, t);
  p.laplacian = {g.A, 2.0 * g.B, g.D};
  p.L1 = {0.0, -4.0 * kSqrt3 * d.a / r2, -4.0 * kSqrt3 * d.b / r2};
  p.L2 = {4.0 * d.a * d.a / r2, 0.0, -4.0 * d.b * d.b / r2};
  p.L = {p.L1.cxx + t * p.L2.cxx, p.L1.cxy + t * p.L2.cxy, p.L1.cyy + t * p.L2.cyy};
  return p;
}

double lambda1_slope(Direction d, int quad_degree) {
  const auto L1 = perturbation_operator_coeffs(d, 0.0).L1;
  double s = 0.0;
  for (const auto& q : rule(quad_degree)) {
    const lame::Jet p = lame::phi1_sum().jet(q.p.x, q.p.y);
    s += q.w * p.f * apply(L1, p);
  }
  return -s;
}

double slope_gap_I(SecondCoeffs c, Direction d) { return closed_I(c.alpha, c.beta, d.a, d.b); }

double slope_gap_I_quadrature(SecondCoeffs c, Direction d, int quad_degree) {
  const auto L1 = perturbation_operator_coeffs(d, 0.0).L1;
  double s = 0.0;
  for (const auto& q : rule(quad_degree)) {
    const lame::Jet p = lame::phi1_sum().jet(q.p.x, q.p.y);
    const lame::Jet u = lame::u_basis().jet(q.p.x, q.p.y);
    const lame::Jet v = lame::v_basis().jet(q.p.x, q.p.y);
    lame::Jet f;
    f.f = c.alpha * u.f + c.beta * v.f;
    f.fxx = c.alpha * u.fxx + c.beta * v.fxx;
    f.fxy = c.alpha * u.fxy + c.beta * v.fxy;
    f.fyy = c.alpha * u.fyy + c.beta * v.fyy;
    s += q.w * (-f.f * apply(L1, f) + p.f * apply(L1, p));
  }
  return s;
}

double prop_minimum() { return (25600.0 * kPi * kPi - 236196.0) / (3600.0 * kSqrt3); }

MinimizeResult minimize_I(int grid, int threads) {
  if (grid < 2) throw std::invalid_argument("minimize_I grid must be >= 2");
  threads = std::max(1, threads);
  const double amax = 0.5 * kSqrt3;
  const auto n = static_cast<std::size_t>(grid);
  std::vector<double> av(n), bv(n);
  for (std::size_t k = 0; k < n; ++k) {
    av[k] = amax * static_cast<double>(k) / static_cast<double>(n - 1);
    bv[k] = -std::sqrt(1.0 - av[k] * av[k]);
  }

  struct Best {
    double v = INFINITY;
    std::size_t is = 0, ia = 0;
  };
  std::vector<Best> best(static_cast<std::size_t>(threads));
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        Best b;
        for (std::size_t is = static_cast<std::size_t>(w); is < n; is += static_cast<std::size_t>(threads)) {
          const double s = 2.0 * kPi * static_cast<double>(is) / static_cast<double>(n);
          const double al = std::cos(s), be = std::sin(s);
          for (std::size_t ia = 0; ia < n; ++ia) {
            const double v = closed_I(al, be, av[ia], bv[ia]);
            if (v < b.v) b = {v, is, ia};
          }
        }
        best[static_cast<std::size_t>(w)] = b;
      });
    }
  }
  Best b = best[0];
  for (const auto& c : best) {
    if (c.v < b.v || (c.v == b.v && (c.is < b.is || (c.is == b.is && c.ia < b.ia)))) b = c;
  }

  MinimizeResult r;
  r.grid_value = b.v;
  r.evaluations = n * n;
  double s = 2.0 * kPi * static_cast<double>(b.is) / static_cast<double>(n);
  double a = av[b.ia];
  double v = b.v;
  // Coordinate descent with shrinking steps; a stays in [0, √3/2].
  double hs = 2.0 * kPi / static_cast<double>(n), ha = amax / static_cast<double>(n - 1);
  while (hs > 1e-13 || ha > 1e-13) {
    bool moved = false;
    for (const double ds : {hs, -hs}) {
      const double w = objective(s + ds, a);
      ++r.evaluations;
      if (w < v) {
        v = w;
        s += ds;
        moved = true;
      }
    }
    for (const double da : {ha, -ha}) {
      const double an = std::clamp(a + da, 0.0, amax);
      const double w = objective(s, an);
      ++r.evaluations;
      if (w < v) {
        v = w;
        a = an;
        moved = true;
      }
    }
    if (!moved) {
      hs *= 0.5;
      ha *= 0.5;
    }
  }
  // φ and −φ give the same I; report the representative with s ∈ [0, π).
  s = std::fmod(s, kPi);
  if (s < 0.0) s += kPi;
  r.value = v;
  r.s = s;
  r.coeffs = {std::cos(s), std::sin(s)};
  r.direction = {a, -std::sqrt(std::max(0.0, 1.0 - a * a))};
  return r;
}

}  // namespace gapcert::deform
