#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <random>
#include <stdexcept>

#include "gapcert/eigensolver.hpp"
#include "gapcert/envelope_cholesky.hpp"
#include "gapcert/mesh.hpp"
#include "gapcert/simd/kernels.hpp"
#include "gapcert/sparse_cholesky.hpp"

using namespace gapcert;

namespace {

Eigen::MatrixXd dense(const CsrMatrix& a) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.rows), static_cast<Eigen::Index>(a.rows));
  for (std::size_t r = 0; r < a.rows; ++r) {
    for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) d(static_cast<Eigen::Index>(r), a.col[k]) = a.val[k];
  }
  return d;
}

std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_SUITE("cholesky") {
  TEST_CASE("sparse and envelope factors solve like a dense LLT") {
    const auto s = assemble(build_mesh(Triangle(0.62, 0.41), 4));
    const Eigen::MatrixXd k = dense(s.stiffness);
    const Eigen::LLT<Eigen::MatrixXd> ref(k);
    const SparseCholesky sp(s.stiffness);
    const EnvelopeCholesky env(s.stiffness);
    CHECK(sp.size() == s.size());
    CHECK(env.size() == s.size());
    std::vector<std::vector<double>> block_sp, block_env;
    for (unsigned seed = 1; seed <= 3; ++seed) {
      const auto b = random_vector(s.size(), seed);
      const Eigen::VectorXd x = ref.solve(Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
      auto y1 = b, y2 = b;
      sp.solve_in_place(std::span<double>(y1));
      env.solve_in_place(std::span<double>(y2));
      for (std::size_t i = 0; i < b.size(); ++i) {
        CHECK(y1[i] == doctest::Approx(x(static_cast<Eigen::Index>(i))).epsilon(1e-10));
        CHECK(y2[i] == doctest::Approx(x(static_cast<Eigen::Index>(i))).epsilon(1e-10));
      }
      block_sp.push_back(b);
      block_env.push_back(b);
    }
    // Block solves match the single-vector ones.
    sp.solve_in_place(std::span<std::vector<double>>(block_sp));
    env.solve_in_place(std::span<std::vector<double>>(block_env));
    for (std::size_t c = 0; c < block_sp.size(); ++c) {
      auto y = random_vector(s.size(), static_cast<unsigned>(c + 1));
      sp.solve_in_place(std::span<double>(y));
      for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(block_sp[c][i] == doctest::Approx(y[i]).epsilon(1e-13));
        CHECK(block_env[c][i] == doctest::Approx(y[i]).epsilon(1e-10));
      }
    }
  }

  TEST_CASE("orderings are cached per sparsity pattern") {
    const auto a = assemble(build_mesh(Triangle(0.5, 0.6), 5));
    const auto b = assemble(build_mesh(Triangle(0.9, 0.2), 5));
    const SparseCholesky fa(a.stiffness);
    const std::size_t cached = cached_orderings();
    const SparseCholesky fb(b.stiffness);
    CHECK(cached_orderings() == cached);
  }

  TEST_CASE("indefinite matrices are rejected") {
    auto s = assemble(build_mesh(Triangle(0.5, 0.6), 2));
    for (auto& v : s.stiffness.val) v = -v;
    CHECK_THROWS_AS(SparseCholesky{s.stiffness}, std::domain_error);
    CHECK_THROWS_AS(EnvelopeCholesky{s.stiffness}, std::domain_error);
  }
}

TEST_SUITE("eigensolver") {
  TEST_CASE("block Davidson matches a dense generalized eigensolver") {
    for (const Factorization f : {Factorization::sparse, Factorization::envelope}) {
      for (const Point apex : {Point{0.5, 0.866}, Point{0.7, 0.3}, Point{0.95, 0.1}}) {
        const auto s = assemble(build_mesh(Triangle(apex), 4));
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ref(dense(s.stiffness), dense(s.mass));
        EigenOptions opt;
        opt.factorization = f;
        const int k = 4;
        const auto ep = smallest_eigenpairs(s, k, opt);
        REQUIRE(ep.converged());
        for (int i = 0; i < k; ++i) CHECK(ep.values[i] == doctest::Approx(ref.eigenvalues()(i)).epsilon(1e-10));
        // Mass orthonormality.
        std::vector<double> mv(s.size());
        for (int i = 0; i < k; ++i) {
          s.mass.multiply(ep.vectors[i], mv);
          for (int j = 0; j < k; ++j) {
            double d = 0.0;
            for (std::size_t r = 0; r < s.size(); ++r) d += ep.vectors[j][r] * mv[r];
            CHECK(d == doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0).epsilon(1e-9));
          }
        }
      }
    }
  }

  TEST_CASE("warm starts and borrowed factors give the same eigenvalues") {
    const auto a = assemble(build_mesh(Triangle(0.55, 0.8), 5));
    const auto b = assemble(build_mesh(Triangle(0.57, 0.78), 5));
    const auto ea = smallest_eigenpairs(a, 2);
    const auto cold = smallest_eigenpairs(b, 2);
    const auto warm = smallest_eigenpairs(b, 2, {}, ea.subspace, ea.factor);
    REQUIRE(cold.converged());
    REQUIRE(warm.converged());
    for (int i = 0; i < 2; ++i) CHECK(warm.values[i] == doctest::Approx(cold.values[i]).epsilon(1e-12));
  }

  TEST_CASE("invalid block sizes") {
    const auto s = assemble(build_mesh(Triangle(0.5, 0.8), 2));
    CHECK_THROWS_AS(smallest_eigenpairs(s, 0), std::invalid_argument);
    CHECK_THROWS_AS(smallest_eigenpairs(s, static_cast<int>(s.size()) + 1), std::invalid_argument);
  }
}

TEST_SUITE("simd") {
  TEST_CASE("vector kernels agree with the scalar reference") {
    const auto& ref = simd::kernels_for(simd::Isa::scalar);
    for (const simd::Isa isa : {simd::Isa::avx2, simd::Isa::neon}) {
      if (!simd::isa_available(isa)) continue;
      CAPTURE(simd::isa_name(isa));
      const auto& k = simd::kernels_for(isa);
      for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 16u, 33u, 1001u}) {
        const auto a = random_vector(n, 11);
        const auto b = random_vector(n, 12);
        CHECK(k.dot(a.data(), b.data(), n) == doctest::Approx(ref.dot(a.data(), b.data(), n)).epsilon(1e-13).scale(1.0));
        CHECK(k.sum_squares(a.data(), n) == doctest::Approx(ref.sum_squares(a.data(), n)).epsilon(1e-13).scale(1.0));
        auto y1 = b, y2 = b;
        k.axpy(0.37, a.data(), y1.data(), n);
        ref.axpy(0.37, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));
      }
    }
  }

  TEST_CASE("dispatch can be forced to scalar and back") {
    const simd::Isa before = simd::active_isa();
    simd::set_active_isa(simd::Isa::scalar);
    CHECK(simd::active_isa() == simd::Isa::scalar);
    const auto a = random_vector(100, 3);
    const double scalar_result = simd::dot(a, a);
    simd::set_active_isa(before);
    CHECK(simd::dot(a, a) == doctest::Approx(scalar_result).epsilon(1e-13));
    CHECK(simd::isa_available(simd::Isa::scalar));
  }

  TEST_CASE("eigenvalues do not depend on the kernel set") {
    const auto s = assemble(build_mesh(Triangle(0.6, 0.7), 4));
    EigenOptions opt;
    opt.factorization = Factorization::envelope;
    const simd::Isa before = simd::active_isa();
    simd::set_active_isa(simd::Isa::scalar);
    const auto a = smallest_eigenpairs(s, 2, opt);
    simd::set_active_isa(before);
    const auto b = smallest_eigenpairs(s, 2, opt);
    for (int i = 0; i < 2; ++i) CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-12));
  }
}
