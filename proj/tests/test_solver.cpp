#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cslab/builtin.hpp"
#include "cslab/rng.hpp"
#include "cslab/solver.hpp"
#include "oracles.hpp"

using namespace cslab;

namespace {

// random underdetermined instance with a feasible right-hand side
std::pair<Mat<double>, Vec<double>> random_instance(int n, int m, Rng& rng) {
  Mat<double> a(m, n);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c) a(r, c) = rng.next_normal();
  Vec<double> x0(n);
  const int nz = 1 + int(rng.next_index(std::uint64_t(std::max(1, m - 1))));
  x0.setZero();
  for (int k = 0; k < nz; ++k)
    x0(int(rng.next_index(std::uint64_t(n)))) = rng.next_normal();
  return {a, a * x0};
}

} // namespace

TEST_CASE("soft threshold: real and complex agree on real inputs") {
  CHECK(detail::soft_threshold(3.0, 1.0) == 2.0);
  CHECK(detail::soft_threshold(-3.0, 1.0) == -2.0);
  CHECK(detail::soft_threshold(0.5, 1.0) == 0.0);
  const auto c = detail::soft_threshold(std::complex<double>(3.0, 0.0), 1.0);
  CHECK(c.real() == doctest::Approx(2.0));
  CHECK(c.imag() == 0.0);
  // phase preserved, modulus shrunk
  const std::complex<double> v(3.0, 4.0);
  const auto w = detail::soft_threshold(v, 1.0);
  CHECK(std::abs(w) == doctest::Approx(4.0));
  CHECK(std::arg(w) == doctest::Approx(std::arg(v)));
  CHECK(std::abs(detail::soft_threshold(std::complex<double>(0.1, 0.1), 1.0)) ==
        0.0);
}

TEST_CASE("basis pursuit matches the LP oracle on random instances") {
  Rng rng(1);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 4 + int(rng.next_index(7)); // up to 10
    const int m = 2 + int(rng.next_index(std::uint64_t(std::min(n - 1, 6))));
    auto [a, b] = random_instance(n, m, rng);
    const double ref = oracles::l1_oracle(a, b);
    const auto sol = basis_pursuit<double>(a, b);
    REQUIRE(sol.converged);
    const double obj = sol.x_star.lpNorm<1>();
    CHECK(obj == doctest::Approx(ref).epsilon(1e-6));
    CHECK((a * sol.x_star - b).norm() <= 1e-8 * std::max(1.0, double(b.norm())));
  }
}

TEST_CASE("identity measurements recover the signal exactly") {
  const int n = 12;
  Mat<double> a = Mat<double>::Identity(n, n);
  Vec<double> x = Vec<double>::Zero(n);
  x(3) = 1.5;
  x(7) = -2.0;
  const auto sol = basis_pursuit<double>(a, a * x);
  REQUIRE(sol.converged);
  CHECK(exact_recovery_check<double>(sol.x_star, x, 1e-6));
}

TEST_CASE("duplicate rows are handled by the ridge") {
  Mat<double> a(4, 6);
  a.setZero();
  a.row(0) << 1, 1, 0, 0, 0, 0;
  a.row(1) << 1, 1, 0, 0, 0, 0; // duplicate
  a.row(2) << 0, 0, 1, -1, 0, 0;
  a.row(3) << 0, 0, 0, 0, 1, 2;
  Vec<double> x = Vec<double>::Zero(6);
  x(0) = 2.0;
  x(4) = -1.0;
  const auto sol = basis_pursuit<double>(a, a * x);
  REQUIRE(sol.converged);
  CHECK(sol.x_star.lpNorm<1>() ==
        doctest::Approx(oracles::l1_oracle(a, a * x)).epsilon(1e-6));
}

TEST_CASE("infeasible right-hand sides throw") {
  Mat<double> a(2, 4);
  a.row(0) << 1, 0, 0, 0;
  a.row(1) << 1, 0, 0, 0; // rank 1
  Vec<double> b(2);
  b << 1.0, 2.0; // not in the range
  CHECK_THROWS_AS(basis_pursuit<double>(a, b), Infeasible);
}

TEST_CASE("zero right-hand side yields the zero minimizer") {
  Mat<double> a = Mat<double>::Random(3, 8);
  const auto sol = basis_pursuit<double>(a, Vec<double>::Zero(3));
  REQUIRE(sol.converged);
  CHECK(sol.x_star.norm() <= 1e-8);
  CHECK(exact_recovery_check<double>(sol.x_star, Vec<double>::Zero(8)));
}

TEST_CASE("complex basis pursuit recovers a sparse complex signal") {
  using C = std::complex<double>;
  Rng rng(77);
  const int n = 16, m = 10;
  Mat<C> a(m, n);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c) a(r, c) = C(rng.next_normal(), rng.next_normal());
  Vec<C> x = Vec<C>::Zero(n);
  x(2) = C(1.0, -2.0);
  x(9) = C(-0.5, 0.5);
  const auto sol = basis_pursuit<C>(a, a * x);
  REQUIRE(sol.converged);
  CHECK(exact_recovery_check<C>(sol.x_star, x, 1e-4));
}

TEST_CASE("solution invariant under the lemma-1 rescaling of (A, b)") {
  Rng rng(5);
  auto [a, b] = random_instance(10, 5, rng);
  const double nu = 0.37;
  const auto s1 = basis_pursuit<double>(a, b);
  const auto s2 = basis_pursuit<double>(Mat<double>(nu * a), Vec<double>(nu * b));
  REQUIRE(s1.converged);
  REQUIRE(s2.converged);
  CHECK((s1.x_star - s2.x_star).norm() <= 1e-6 * std::max(1.0, s1.x_star.norm()));
}

TEST_CASE("exact_recovery_check semantics") {
  Vec<double> x(2), y(2);
  x << 1.0, 0.0;
  y << 1.0 + 5e-6, 0.0;
  CHECK(exact_recovery_check<double>(y, x, 1e-5));
  y(0) = 1.0 + 2e-5;
  CHECK_FALSE(exact_recovery_check<double>(y, x, 1e-5));
  // absolute comparison at x_true = 0
  Vec<double> z = Vec<double>::Zero(2);
  Vec<double> tiny(2);
  tiny << 5e-6, 0.0;
  CHECK(exact_recovery_check<double>(tiny, z, 1e-5));
  Vec<double> small(1);
  CHECK_THROWS_AS(exact_recovery_check<double>(small, z), InvalidArgs);
}

TEST_CASE("size mismatches are rejected") {
  Mat<double> a(2, 3);
  a.setOnes();
  Vec<double> b(3);
  b.setOnes();
  CHECK_THROWS_AS(basis_pursuit<double>(a, b), InvalidArgs);
}
