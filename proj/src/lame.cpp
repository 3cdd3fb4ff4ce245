#include "gapcert/lame.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace gapcert::lame {

namespace {

const double kC1 = 2.0 * std::sqrt(2.0) / std::pow(3.0, 0.75);
const double kC2 = 2.0 / std::pow(3.0, 0.75);
constexpr double kW = 2.0 * kPi / 3.0;

// Wave c · trig((2π/3)(p·x + q·√3·y)).
PlaneWave lattice_wave(double c, double p, double q, bool sine) { return {c, kW * p, kW * q * kSqrt3, sine}; }

WaveSum second_basis(bool sine) {
  return WaveSum({lattice_wave(kC2, 5, -1, sine), lattice_wave(-kC2, 5, 1, sine), lattice_wave(kC2, -1, 3, sine),
                  lattice_wave(-kC2, -1, -3, sine), lattice_wave(kC2, -4, -2, sine),
                  lattice_wave(-kC2, -4, 2, sine)});
}

// Interior sample points: a barycentric lattice with all weights ≥ 1/(k+1).
std::vector<Point> interior_samples(int k) {
  const VertexTriangle t = equilateral();
  std::vector<Point> out;
  for (int a = 1; a < k; ++a) {
    for (int b = 1; a + b < k; ++b) {
      const double s = static_cast<double>(a) / k, r = static_cast<double>(b) / k;
      out.push_back(t.v[0] + s * (t.v[1] - t.v[0]) + r * (t.v[2] - t.v[0]));
    }
  }
  return out;
}

}  // namespace

VertexTriangle equilateral() { return VertexTriangle({{{0.0, 0.0}, {1.0, 0.0}, {0.5, 0.5 * kSqrt3}}}); }

bool admissible(LamePair p) {
  return (p.m + p.n) % 3 == 0 && p.m != 2 * p.n && p.n != 2 * p.m && p.m != -p.n;
}

long long quadratic_index(LamePair p) {
  const long long m = p.m, n = p.n;
  return m * m - m * n + n * n;
}

double eigenvalue_of_pair(LamePair p) {
  if (!admissible(p)) throw std::invalid_argument(fmt::format("pair ({}, {}) is not admissible", p.m, p.n));
  return 16.0 * kPi * kPi / 27.0 * static_cast<double>(quadratic_index(p));
}

std::array<LamePair, 6> orbit(LamePair p) {
  const int m = p.m, n = p.n;
  return {{{-n, m - n}, {-n, -m}, {n - m, -m}, {n - m, n}, {m, n}, {m, m - n}}};
}

WaveSum orbit_sum(LamePair p, bool sine) {
  std::vector<PlaneWave> w;
  double sign = 1.0;
  for (const auto& q : orbit(p)) {
    w.push_back({sign, kW * q.n, kW * (2.0 * q.m - q.n) / kSqrt3, sine});
    sign = -sign;
  }
  return WaveSum(std::move(w));
}

std::vector<EquilateralEigenvalue> distinct_spectrum(int count) {
  if (count < 1) throw std::invalid_argument("distinct_spectrum needs count >= 1");
  // m² − mn + n² ≥ (3/4)·max(|m|, |n|)², so every pair outside the box
  // |m|, |n| ≤ M has index ≥ (3/4)(M + 1)².
  int M = 6;
  std::map<long long, std::vector<LamePair>> by_index;
  for (;;) {
    by_index.clear();
    const long long limit = 3 * static_cast<long long>(M + 1) * (M + 1);  // 4 × bound
    for (int m = -M; m <= M; ++m) {
      for (int n = -M; n <= M; ++n) {
        const LamePair p{m, n};
        if (admissible(p) && 4 * quadratic_index(p) < limit) by_index[quadratic_index(p)].push_back(p);
      }
    }
    if (static_cast<int>(by_index.size()) >= count) break;
    M *= 2;
  }

  const auto samples = interior_samples(23);
  std::vector<EquilateralEigenvalue> out;
  for (const auto& [q, pairs] : by_index) {
    if (static_cast<int>(out.size()) == count) break;
    Eigen::MatrixXd F(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(2 * pairs.size()));
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const WaveSum s = orbit_sum(pairs[k], true), c = orbit_sum(pairs[k], false);
      for (std::size_t r = 0; r < samples.size(); ++r) {
        F(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(2 * k)) = s(samples[r].x, samples[r].y);
        F(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(2 * k + 1)) = c(samples[r].x, samples[r].y);
      }
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(F);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > 1e-8 * std::max(1.0, sv(0))) ++rank;
    }
    if (rank == 0) continue;
    EquilateralEigenvalue e;
    e.index = q;
    e.value = 16.0 * kPi * kPi / 27.0 * static_cast<double>(q);
    e.multiplicity = rank;
    e.representative_pairs = pairs;
    out.push_back(std::move(e));
  }
  return out;
}

double WaveSum::operator()(double x, double y) const {
  double s = 0.0;
  for (const auto& w : waves_) {
    const double th = w.kx * x + w.ky * y;
    s += w.c * (w.sine ? std::sin(th) : std::cos(th));
  }
  return s;
}

Jet WaveSum::jet(double x, double y) const {
  Jet j;
  for (const auto& w : waves_) {
    const double th = w.kx * x + w.ky * y;
    const double sn = std::sin(th), cs = std::cos(th);
    // f = c·T(θ), f' = c·T'(θ), f'' = −c·T(θ).
    const double f = w.sine ? sn : cs;
    const double d = w.sine ? cs : -sn;
    j.f += w.c * f;
    j.fx += w.c * w.kx * d;
    j.fy += w.c * w.ky * d;
    j.fxx -= w.c * w.kx * w.kx * f;
    j.fxy -= w.c * w.kx * w.ky * f;
    j.fyy -= w.c * w.ky * w.ky * f;
  }
  return j;
}

const char* form_name(Form f) {
  switch (f) {
    case Form::phi1_sum: return "phi1_sum";
    case Form::phi1_product: return "phi1_product";
    case Form::u: return "u";
    case Form::v: return "v";
    case Form::A3_printed: return "A3_printed";
    case Form::A3: return "A3";
  }
  return "?";
}

const WaveSum& phi1_sum() {
  static const WaveSum s({{kC1, 0.0, 4.0 * kPi / kSqrt3, true},
                          {-kC1, 2.0 * kPi, 2.0 * kPi / kSqrt3, true},
                          {kC1, 2.0 * kPi, -2.0 * kPi / kSqrt3, true}});
  return s;
}

double phi1_product(double x, double y) {
  return kC1 * std::sin(2.0 * kPi * y / kSqrt3) * std::sin(kPi * (x + y / kSqrt3)) *
         std::sin(kPi * (x - y / kSqrt3));
}

double phi1_form_ratio() {
  const double x = 0.5, y = kSqrt3 / 6.0;
  return phi1_sum()(x, y) / phi1_product(x, y);
}

const WaveSum& u_basis() {
  static const WaveSum s = second_basis(false);
  return s;
}

const WaveSum& v_basis() {
  static const WaveSum s = second_basis(true);
  return s;
}

const WaveSum& third_printed() {
  static const WaveSum s({lattice_wave(2.0 * kC2, 6, 4, true), lattice_wave(-2.0 * kC2, 6, 2, true),
                          lattice_wave(-2.0 * kC2, 0, 2 * kPi, true)});
  return s;
}

const WaveSum& third_reconstructed() {
  static const WaveSum s = [] {
    auto w = orbit_sum({6, 6}, true).waves();
    for (auto& p : w) p.c *= kC2;
    return WaveSum(std::move(w));
  }();
  return s;
}

double evaluate(Form f, double x, double y) {
  switch (f) {
    case Form::phi1_sum: return phi1_sum()(x, y);
    case Form::phi1_product: return phi1_product(x, y);
    case Form::u: return u_basis()(x, y);
    case Form::v: return v_basis()(x, y);
    case Form::A3_printed: return third_printed()(x, y);
    case Form::A3: return third_reconstructed()(x, y);
  }
  return 0.0;
}

FormulaCheck check_eigenfunction(Form form, double lambda) {
  const auto f = [form](double x, double y) { return evaluate(form, x, y); };
  const VertexTriangle t = equilateral();
  FormulaCheck c;

  double inner_max = 0.0;
  double res_sq = 0.0, norm_sq = 0.0;
  // Fourth-order central differences.
  const double h = 1e-3;
  for (const Point p : interior_samples(40)) {
    const double v = f(p.x, p.y);
    const auto d2 = [&](double dx, double dy) {
      return (-f(p.x + 2 * dx, p.y + 2 * dy) + 16 * f(p.x + dx, p.y + dy) - 30 * v + 16 * f(p.x - dx, p.y - dy) -
              f(p.x - 2 * dx, p.y - 2 * dy)) /
             (12 * h * h);
    };
    const double lap = d2(h, 0.0) + d2(0.0, h);
    res_sq += (lap + lambda * v) * (lap + lambda * v);
    norm_sq += lambda * lambda * v * v;
    inner_max = std::max(inner_max, std::abs(v));
  }
  c.residual = norm_sq > 0.0 ? std::sqrt(res_sq / norm_sq) : INFINITY;

  double edge_max = 0.0;
  const int ne = 400;
  for (int e = 0; e < 3; ++e) {
    const Point a = t.v[static_cast<std::size_t>(e)], b = t.v[static_cast<std::size_t>((e + 1) % 3)];
    for (int k = 0; k <= ne; ++k) {
      const Point p = a + (static_cast<double>(k) / ne) * (b - a);
      edge_max = std::max(edge_max, std::abs(f(p.x, p.y)));
    }
  }
  c.boundary_max = inner_max > 0.0 ? edge_max / inner_max : INFINITY;
  c.l2_norm_sq = integrate(composite_rule(t, 10, 4), [&](double x, double y) { return f(x, y) * f(x, y); });
  c.dirichlet_ok = c.boundary_max < 1e-10;
  c.eigen_ok = c.residual < 1e-6;
  return c;
}

ThirdEigenfunctionReport check_third_eigenfunction() {
  const double l3 = eigenvalue_of_pair({6, 6});
  ThirdEigenfunctionReport r;
  r.printed = check_eigenfunction(Form::A3_printed, l3);
  r.reconstructed = check_eigenfunction(Form::A3, l3);
  r.printed_consistent = r.printed.dirichlet_ok && r.printed.eigen_ok;
  return r;
}

bool IntegralReport::all_ok() const {
  return std::all_of(entries.begin(), entries.end(), [](const IntegralCheck& e) { return e.status != "fail"; });
}

namespace {

struct Spec {
  std::string name;
  double paper;
  std::function<double(const Jet&, const Jet&, const Jet&)> integrand;  // φ₁, u, v
  double corrected = NAN;  // typo candidate
  std::string corrected_note;
};

std::vector<Spec> integral_specs() {
  const double pi2 = kPi * kPi, pi4 = pi2 * pi2;
  const double q = 6561.0 / 800.0;
  std::vector<Spec> s;
  const auto add = [&](std::string n, double v, std::function<double(const Jet&, const Jet&, const Jet&)> f) {
    s.push_back({std::move(n), v, std::move(f), NAN, {}});
  };
  add("phi1^2", 1.0, [](const Jet& p, const Jet&, const Jet&) { return p.f * p.f; });
  add("phi1_x^2", 8 * pi2 / 3, [](const Jet& p, const Jet&, const Jet&) { return p.fx * p.fx; });
  add("phi1_y^2", 8 * pi2 / 3, [](const Jet& p, const Jet&, const Jet&) { return p.fy * p.fy; });
  add("phi1_x*phi1_y", 0.0, [](const Jet& p, const Jet&, const Jet&) { return p.fx * p.fy; });
  add("phi1_xy^2", 32 * pi4 / 9, [](const Jet& p, const Jet&, const Jet&) { return p.fxy * p.fxy; });
  add("phi1_yy^2", 32 * pi4 / 3, [](const Jet& p, const Jet&, const Jet&) { return p.fyy * p.fyy; });
  add("phi1_xx^2", 32 * pi4 / 3, [](const Jet& p, const Jet&, const Jet&) { return p.fxx * p.fxx; });
  add("phi1", std::pow(3.0, 0.75) / (std::sqrt(2.0) * kPi), [](const Jet& p, const Jet&, const Jet&) { return p.f; });
  add("phi1_xx*phi1_xy", 0.0, [](const Jet& p, const Jet&, const Jet&) { return p.fxx * p.fxy; });
  add("phi1_yy*phi1_xy", 0.0, [](const Jet& p, const Jet&, const Jet&) { return p.fyy * p.fxy; });

  add("u^2", 1.0, [](const Jet&, const Jet& u, const Jet&) { return u.f * u.f; });
  add("v^2", 1.0, [](const Jet&, const Jet&, const Jet& v) { return v.f * v.f; });
  add("u*v", 0.0, [](const Jet&, const Jet& u, const Jet& v) { return u.f * v.f; });
  add("u*phi1", 0.0, [](const Jet& p, const Jet& u, const Jet&) { return u.f * p.f; });
  add("v*phi1", 0.0, [](const Jet& p, const Jet&, const Jet& v) { return v.f * p.f; });
  add("u_x^2", -q + 56 * pi2 / 9, [](const Jet&, const Jet& u, const Jet&) { return u.fx * u.fx; });
  add("v_y^2", -q + 56 * pi2 / 9, [](const Jet&, const Jet&, const Jet& v) { return v.fy * v.fy; });
  add("u_x*u_y", -q * kSqrt3, [](const Jet&, const Jet& u, const Jet&) { return u.fx * u.fy; });
  add("v_x*v_y", q * kSqrt3, [](const Jet&, const Jet&, const Jet& v) { return v.fx * v.fy; });
  add("u_y*v_y", q * kSqrt3, [](const Jet&, const Jet& u, const Jet& v) { return u.fy * v.fy; });
  add("u_x*v_y", q, [](const Jet&, const Jet& u, const Jet& v) { return u.fx * v.fy; });
  add("u_x*v_x", -q * kSqrt3, [](const Jet&, const Jet& u, const Jet& v) { return u.fx * v.fx; });
  add("u_y^2", q + 56 * pi2 / 9, [](const Jet&, const Jet& u, const Jet&) { return u.fy * u.fy; });
  add("v_x^2", q + 56 * pi2 / 9, [](const Jet&, const Jet&, const Jet& v) { return v.fx * v.fx; });
  add("u_xy^2", -5103 * pi2 / 200 + 1568 * pi4 / 81, [](const Jet&, const Jet& u, const Jet&) { return u.fxy * u.fxy; });
  add("u_yy^2", 5103 * pi2 / 40 + 1568 * pi4 / 27, [](const Jet&, const Jet& u, const Jet&) { return u.fyy * u.fyy; });
  add("u_xx^2", 7 * pi2 * (-59049 + 44800 * pi2) / 5400,
      [](const Jet&, const Jet& u, const Jet&) { return u.fxx * u.fxx; });
  add("v_xx^2", 7 * pi2 * (59049 + 44800 * pi2) / 5400,
      [](const Jet&, const Jet&, const Jet& v) { return v.fxx * v.fxx; });
  add("v_xy^2", 5103 * pi2 / 200 + 1568 * pi4 / 81, [](const Jet&, const Jet&, const Jet& v) { return v.fxy * v.fxy; });
  add("v_yy^2", -5103 * pi2 / 40 + 1568 * pi4 / 27, [](const Jet&, const Jet&, const Jet& v) { return v.fyy * v.fyy; });
  add("v_xy*u_xy", -5103 * kSqrt3 * pi2 / 200, [](const Jet&, const Jet& u, const Jet& v) { return v.fxy * u.fxy; });
  add("v_xx*u_xx", -15309 * kSqrt3 * pi2 / 200, [](const Jet&, const Jet& u, const Jet& v) { return v.fxx * u.fxx; });
  add("v_yy*u_yy", 5103 * kSqrt3 * pi2 / 40, [](const Jet&, const Jet& u, const Jet& v) { return v.fyy * u.fyy; });
  // The β² coefficient in the ‖φ_xx‖ display repeats ∫v_xx² with 54049.
  s.push_back({"v_xx^2 (norm display)", 7 * pi2 * (54049 + 44800 * pi2) / 5400,
               [](const Jet&, const Jet&, const Jet& v) { return v.fxx * v.fxx; },
               7 * pi2 * (59049 + 44800 * pi2) / 5400, std::string("54049 read as 59049")});
  return s;
}

std::vector<double> integrate_specs(const std::vector<Spec>& specs, int degree, int level) {
  const auto rule = composite_rule(equilateral(), degree, level);
  std::vector<double> out(specs.size(), 0.0);
  for (const auto& q : rule) {
    const Jet p = phi1_sum().jet(q.p.x, q.p.y);
    const Jet u = u_basis().jet(q.p.x, q.p.y);
    const Jet v = v_basis().jet(q.p.x, q.p.y);
    for (std::size_t k = 0; k < specs.size(); ++k) out[k] += q.w * specs[k].integrand(p, u, v);
  }
  return out;
}

bool within(double paper, double computed) {
  if (paper == 0.0) return std::abs(computed) <= kIntegralZeroTol;
  return std::abs(computed - paper) <= kIntegralRelTol * std::abs(paper);
}

}  // namespace

IntegralReport verify_integral_tables(int quad_degree, int composite_level) {
  if (quad_degree < 1) throw std::invalid_argument("quad_degree must be positive");
  if (composite_level < 0 || composite_level > 8) throw std::invalid_argument("composite level must be in [0, 8]");
  const auto specs = integral_specs();
  const auto vals = integrate_specs(specs, quad_degree, composite_level);
  const auto finer = integrate_specs(specs, quad_degree + 2, composite_level);

  IntegralReport r;
  r.quad_degree = quad_degree;
  r.composite_level = composite_level;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const auto& s = specs[k];
    IntegralCheck e;
    e.name = s.name;
    e.paper_value = s.paper;
    e.computed = vals[k];
    e.abs_error = std::abs(vals[k] - s.paper);
    e.rel_error = s.paper != 0.0 ? e.abs_error / std::abs(s.paper) : e.abs_error;
    if (within(s.paper, vals[k])) {
      e.status = "pass";
    } else if (!std::isnan(s.corrected) && within(s.corrected, vals[k])) {
      e.status = "paper_typo";
      e.note = fmt::format("{}; corrected value {:.17g} matches", s.corrected_note, s.corrected);
    } else {
      e.status = "fail";
    }
    r.max_degree_change = std::max(r.max_degree_change, std::abs(vals[k] - finer[k]));
    r.entries.push_back(std::move(e));
  }
  return r;
}

std::string integral_report_csv(const IntegralReport& r) {
  std::string out = "integral_name,paper_value,computed_value,abs_error,rel_error,status,note\n";
  for (const auto& e : r.entries) {
    out += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{},{}\n", e.name, e.paper_value, e.computed, e.abs_error,
                       e.rel_error, e.status, e.note);
  }
  return out;
}

}  // namespace gapcert::lame
