#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cslab/builtin.hpp"
#include "cslab/concentration.hpp"

using namespace cslab;

TEST_CASE("matrix bernstein bound: pinned values and properties") {
  CHECK(matrix_bernstein_bound(1, 1.0, 1.0, 0.0) == 1.0); // clamped 2d
  CHECK(matrix_bernstein_bound(1, 1.0, 1.0, 3.0) ==
        doctest::Approx(0.21079844912372867).epsilon(1e-12)); // 2 e^{-2.25}
  double prev = 1.0;
  for (double t = 0.0; t <= 10.0; t += 0.25) {
    const double v = matrix_bernstein_bound(4, 0.5, 2.0, t);
    CHECK(v <= prev + 1e-15);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    prev = v;
  }
  CHECK_THROWS_AS(matrix_bernstein_bound(0, 1, 1, 1), InvalidArgs);
  CHECK_THROWS_AS(matrix_bernstein_bound(1, 0, 1, 1), InvalidArgs);
  CHECK_THROWS_AS(matrix_bernstein_bound(1, 1, 0, 1), InvalidArgs);
}

TEST_CASE("vector bernstein bound: pinned values, range, clamp") {
  CHECK(vector_bernstein_bound(1.0, 1.0, 0.0) == 1.0);       // e^{1/4} clamped
  CHECK(vector_bernstein_bound(1.0, 1.0, 1.0) == 1.0);       // e^{1/8} clamped
  CHECK(vector_bernstein_bound(1.0, 100.0, 50.0) ==
        doctest::Approx(0.05641613950377735).epsilon(1e-12)); // e^{-2.875}
  CHECK_THROWS_AS(vector_bernstein_bound(1.0, 1.0, 1.5), OutOfRange);
  CHECK_THROWS_AS(vector_bernstein_bound(0.0, 1.0, 0.5), InvalidArgs);
}

TEST_CASE("binomial tail bound: pinned value") {
  CHECK(binomial_tail_bound(25, 11.0 / 12.0, 0.0) == 1.0);
  CHECK(binomial_tail_bound(25, 11.0 / 12.0, 10.0) ==
        doctest::Approx(0.46701295818182675).epsilon(1e-12));
  CHECK_THROWS_AS(binomial_tail_bound(0, 0.5, 1.0), InvalidArgs);
  CHECK_THROWS_AS(binomial_tail_bound(10, 0.0, 1.0), InvalidArgs);
}

TEST_CASE("binomial tail bound dominates simulation") {
  Rng rng(2);
  const int n = 25;
  const double p = 11.0 / 12.0;
  const long trials = 100000;
  for (double tau : {5.0, 8.0, 10.0}) {
    long exceed = 0;
    for (long t = 0; t < trials; ++t) {
      int k = 0;
      for (int i = 0; i < n; ++i)
        if (rng.next_double() < p) ++k;
      if (std::abs(double(k) - n * p) > tau) ++exceed;
    }
    CHECK(double(exceed) / trials <= binomial_tail_bound(n, p, tau));
  }
}

TEST_CASE("lemma bounds: pinned values, ranges, monotonicity") {
  // Lemma 3 example from the module contract
  CHECK(lemma_bound(TailStatistic::LowDistortion, 64, 4, 1.0, 1.0, 6400, 0.5) ==
        doctest::Approx(1.783247290814639e-11).epsilon(1e-9));
  // Lemma 2 at tau = 0 clamps
  CHECK(lemma_bound(TailStatistic::LocalIsometry, 64, 4, 1.0, 1.0, 100, 0.0) ==
        1.0);
  // Lemma 2 closed form
  const double l2 = lemma_bound(TailStatistic::LocalIsometry, 16, 2, 1.0, 1.0,
                                400, 0.5);
  CHECK(l2 == doctest::Approx(4.0 * std::exp(-400.0 * 0.25 /
                                             (2.0 * 2.0 * (4.0 / 3.0))))
                  .epsilon(1e-12));
  // Lemma 4 closed form
  const double l4 =
      lemma_bound(TailStatistic::OffSupport, 16, 4, 2.0, 1.5, 500, 0.5);
  CHECK(l4 == doctest::Approx(std::min(
                  1.0, 2.0 * 16.0 *
                           std::exp(-3.0 * 500.0 * 0.25 /
                                    (2.0 * 3.0 * (3.0 + 2.0 * 0.5)))))
                  .epsilon(1e-12));
  // Lemma 5 closed form
  const double l5 =
      lemma_bound(TailStatistic::UniformOffSupport, 16, 2, 1.0, 1.0, 2000, 0.5);
  CHECK(l5 == doctest::Approx(16.0 * std::exp(-2000.0 * 0.25 / 16.0 + 0.25))
                  .epsilon(1e-12));

  CHECK_THROWS_AS(
      lemma_bound(TailStatistic::LocalIsometry, 16, 2, 1, 1, 100, 0.6),
      OutOfRange);
  CHECK_THROWS_AS(
      lemma_bound(TailStatistic::LowDistortion, 16, 2, 1, 1, 100, 1.5),
      OutOfRange);
  CHECK_THROWS_AS(
      lemma_bound(TailStatistic::UniformOffSupport, 16, 2, 1, 1, 100, 1.5),
      OutOfRange);
  CHECK_THROWS_AS(lemma_bound(TailStatistic::OffSupport, 16, 2, 0, 1, 100, 0.5),
                  InvalidArgs);

  for (TailStatistic stat :
       {TailStatistic::LocalIsometry, TailStatistic::LowDistortion,
        TailStatistic::OffSupport, TailStatistic::UniformOffSupport}) {
    double prev = 1.0;
    for (int m = 100; m <= 3000; m += 100) {
      const double v = lemma_bound(stat, 32, 3, 1.0, 1.0, m, 0.4);
      CHECK(v <= prev + 1e-15);
      prev = v;
    }
    prev = 1.0;
    for (double tau = 0.05; tau <= 0.5; tau += 0.05) {
      const double v = lemma_bound(stat, 32, 3, 1.0, 1.0, 2000, tau);
      CHECK(v <= prev + 1e-15);
      prev = v;
    }
  }
}

TEST_CASE("clopper-pearson: closed-form edge cases and containment") {
  // zero successes: [0, 1 - (alpha/2)^{1/n}]
  const auto c0 = clopper_pearson(0, 100, 0.99);
  CHECK(c0.low == 0.0);
  CHECK(c0.high == doctest::Approx(1.0 - std::pow(0.005, 0.01)).epsilon(1e-10));
  // all successes: mirrored
  const auto c1 = clopper_pearson(100, 100, 0.99);
  CHECK(c1.high == 1.0);
  CHECK(c1.low == doctest::Approx(std::pow(0.005, 0.01)).epsilon(1e-10));
  // point estimate inside the interval
  const auto c = clopper_pearson(37, 200, 0.99);
  CHECK(c.low < 37.0 / 200.0);
  CHECK(c.high > 37.0 / 200.0);
  CHECK(c.low > 0.0);
  CHECK(c.high < 1.0);
  CHECK_THROWS_AS(clopper_pearson(5, 0), InvalidArgs);
  CHECK_THROWS_AS(clopper_pearson(-1, 10), InvalidArgs);
  CHECK_THROWS_AS(clopper_pearson(11, 10), InvalidArgs);
}

TEST_CASE("estimate_tail: hadamard local isometry, tight regime") {
  TailExperiment<double> exp(hadamard_ensemble(16));
  exp.statistic = TailStatistic::LocalIsometry;
  exp.support = {0, 1};
  exp.m = 400;
  exp.tau = 0.5;
  exp.trials = 500;
  exp.seed = 12;
  const auto res = estimate_tail(exp);
  CHECK(res.trials == 500);
  CHECK(res.empirical_rate == 0.0); // bound ~ 3e-8
  CHECK(res.bound == doctest::Approx(2.877653e-8).epsilon(1e-4));
  CHECK(res.ci_low <= res.bound);
}

TEST_CASE("estimate_tail: worker count does not change the outcome") {
  TailExperiment<double> exp(hadamard_ensemble(16));
  exp.statistic = TailStatistic::UniformOffSupport;
  exp.support = {0, 3};
  exp.m = 24;
  exp.tau = 0.4;
  exp.trials = 301;
  exp.seed = 9;
  exp.workers = 1;
  const auto r1 = estimate_tail(exp);
  exp.workers = 4;
  const auto r4 = estimate_tail(exp);
  CHECK(r1.exceed_count == r4.exceed_count);
  CHECK(r1.empirical_rate == r4.empirical_rate);
  CHECK(r1.bound == r4.bound);
}

TEST_CASE("estimate_tail: z statistics and validation") {
  const auto spec = hadamard_ensemble(16);
  TailExperiment<double> exp(spec);
  exp.statistic = TailStatistic::LowDistortion;
  exp.support = {0, 5};
  exp.m = 64;
  exp.tau = 0.5;
  exp.trials = 100;
  CHECK_THROWS_AS(estimate_tail(exp), InvalidArgs); // z missing
  Vec<double> z = Vec<double>::Zero(16);
  z(0) = 1.0 / std::sqrt(2.0);
  z(5) = -1.0 / std::sqrt(2.0);
  exp.z = z;
  const auto res = estimate_tail(exp);
  CHECK(res.ci_low <= res.bound);

  exp.statistic = TailStatistic::OffSupport;
  const auto res2 = estimate_tail(exp);
  CHECK(res2.ci_low <= res2.bound);

  TailExperiment<double> bad(spec);
  bad.statistic = TailStatistic::LocalIsometry;
  bad.support = {0, 1, 2};
  bad.m = 2; // m < s
  CHECK_THROWS_AS(estimate_tail(bad), InvalidArgs);
}

TEST_CASE("estimate_tail rejects incomplete ensembles upstream") {
  std::vector<Vec<double>> atoms{Vec<double>::Unit(4, 0)};
  const auto spec = EnsembleSpec<double>::finite_support(atoms, {1.0});
  TailExperiment<double> exp(spec);
  exp.support = {0};
  exp.m = 4;
  CHECK_THROWS_AS(estimate_tail(exp), NotComplete);
}

TEST_CASE("worst_case_z returns a unit vector on the support") {
  const auto spec = hadamard_ensemble(16);
  const auto z = worst_case_z(spec, TailStatistic::OffSupport, {1, 2, 7}, 32,
                              50, 3);
  CHECK(z.norm() == doctest::Approx(1.0).epsilon(1e-12));
  for (int i = 0; i < 16; ++i)
    if (i != 1 && i != 2 && i != 7) CHECK(z(i) == 0.0);
  CHECK_THROWS_AS(
      worst_case_z(spec, TailStatistic::LocalIsometry, {0}, 8), InvalidArgs);
}

TEST_CASE("fundamental estimates hold sample-wise") {
  // |<a,z>|^2 <= s mu, |<a,Xz>|^2 <= s mu, ||P_T a||^2 <= mu s,
  // ||P_T X a||^2 <= mu s for unit z supported on T
  for (const auto& spec :
       {hadamard_ensemble(16),
        weighted_basis_member(16, 2.0, 8, 8.0 + 8.0 * 2.0).spec}) {
    const auto [gamma, x] = covariance(spec);
    (void)gamma;
    const double mu = incoherence_mu(spec, x);
    const int s = 3;
    const std::vector<int> support{1, 4, 9};
    Rng rng(21);
    for (int t = 0; t < 2000; ++t) {
      Vec<double> z = Vec<double>::Zero(16);
      for (int i : support) z(i) = rng.next_sign();
      z /= z.norm();
      const Vec<double> a = spec.sample(rng);
      const Vec<double> xa = x * a;
      const double tol = 1e-9;
      CHECK(std::pow(a.dot(z), 2) <= s * mu + tol);
      CHECK(std::pow(a.dot(x * z), 2) <= s * mu + tol);
      double pta = 0.0, ptxa = 0.0;
      for (int i : support) {
        pta += a(i) * a(i);
        ptxa += xa(i) * xa(i);
      }
      CHECK(pta <= mu * s + tol);
      CHECK(ptxa <= mu * s + tol);
    }
  }
}
