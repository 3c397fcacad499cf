#ifndef CSLAB_CONCENTRATION_HPP
#define CSLAB_CONCENTRATION_HPP

#include <Eigen/Dense>
#include <boost/math/distributions/beta.hpp>
#include <cmath>
#include <thread>
#include <vector>

#include "cslab/ensemble.hpp"
#include "cslab/errors.hpp"
#include "cslab/rng.hpp"

namespace cslab {

// Pr(||sum M_k|| >= t) <= 2d exp(-(t^2/2) / (sigma^2 + Bt/3)), clamped to [0,1].
inline double matrix_bernstein_bound(int d, double b, double sigma2, double t) {
  if (d < 1 || b <= 0.0 || sigma2 <= 0.0 || t < 0.0)
    throw InvalidArgs("matrix_bernstein_bound: bad arguments");
  const double val = 2.0 * d * std::exp(-(t * t / 2.0) / (sigma2 + b * t / 3.0));
  return std::min(1.0, val);
}

// Pr(||sum g_k|| >= t) <= exp(-t^2/(8 sigma^2) + 1/4), valid for 0 <= t <= sigma^2/B.
inline double vector_bernstein_bound(double b, double sigma2, double t) {
  if (b <= 0.0 || sigma2 <= 0.0 || t < 0.0)
    throw InvalidArgs("vector_bernstein_bound: bad arguments");
  if (t > sigma2 / b)
    throw OutOfRange("vector_bernstein_bound: t > sigma^2/B");
  return std::min(1.0, std::exp(-t * t / (8.0 * sigma2) + 0.25));
}

// Pr(|Bin(n,p) - np| > tau) <= 2 exp(-tau^2/(3np)).
inline double binomial_tail_bound(long n_trials, double p, double tau) {
  if (n_trials < 1 || p <= 0.0 || p > 1.0 || tau < 0.0)
    throw InvalidArgs("binomial_tail_bound: bad arguments");
  return std::min(1.0, 2.0 * std::exp(-tau * tau / (3.0 * n_trials * p)));
}

enum class TailStatistic {
  LocalIsometry,        // ||P_T (X A*A - Id) P_T||
  LowDistortion,        // ||P_T (Id - A*A X) z||_2
  OffSupport,           // ||P_Tc A*A X z||_inf
  UniformOffSupport,    // max_{i in Tc} ||P_T X A*A e_i||_2
};

inline const char* to_string(TailStatistic s) {
  switch (s) {
    case TailStatistic::LocalIsometry: return "local_isometry";
    case TailStatistic::LowDistortion: return "low_distortion";
    case TailStatistic::OffSupport: return "off_support";
    case TailStatistic::UniformOffSupport: return "uniform_off_support";
  }
  return "?";
}

// Closed-form tail bounds of the four deviation lemmas, clamped to [0,1].
inline double lemma_bound(TailStatistic stat, int n, int s, double mu,
                          double kappa_s, int m, double tau) {
  if (n < 1 || s < 1 || mu <= 0.0 || kappa_s < 1.0 || m < 1 || tau < 0.0)
    throw InvalidArgs("lemma_bound: bad arguments");
  const double smk = s * mu * kappa_s;
  double val = 0.0;
  switch (stat) {
    case TailStatistic::LocalIsometry:
      if (tau > 0.5) throw OutOfRange("lemma_bound: local isometry needs tau <= 1/2");
      val = 2.0 * s *
            std::exp(-(double(m) / smk) * tau * tau / (2.0 * (1.0 + 2.0 * tau / 3.0)));
      break;
    case TailStatistic::LowDistortion:
      if (tau > 1.0) throw OutOfRange("lemma_bound: low distortion needs tau <= 1");
      val = std::exp(-double(m) * tau * tau / (16.0 * smk) + 0.25);
      break;
    case TailStatistic::OffSupport:
      val = 2.0 * n *
            std::exp(-3.0 * double(m) * tau * tau /
                     (2.0 * mu * kappa_s * (3.0 + std::sqrt(double(s)) * tau)));
      break;
    case TailStatistic::UniformOffSupport:
      if (tau > 1.0)
        throw OutOfRange("lemma_bound: uniform off-support needs tau <= 1");
      val = double(n) * std::exp(-double(m) * tau * tau / (8.0 * smk) + 0.25);
      break;
  }
  return std::min(1.0, val);
}

// Exact two-sided Clopper-Pearson interval.
struct BinomialCi {
  double low;
  double high;
};

inline BinomialCi clopper_pearson(long successes, long trials,
                                  double confidence = 0.99) {
  if (trials < 1 || successes < 0 || successes > trials)
    throw InvalidArgs("clopper_pearson: bad arguments");
  const double alpha = 1.0 - confidence;
  BinomialCi ci{0.0, 1.0};
  if (successes > 0) {
    boost::math::beta_distribution<double> lo(double(successes),
                                              double(trials - successes + 1));
    ci.low = boost::math::quantile(lo, alpha / 2.0);
  }
  if (successes < trials) {
    boost::math::beta_distribution<double> hi(double(successes + 1),
                                              double(trials - successes));
    ci.high = boost::math::quantile(hi, 1.0 - alpha / 2.0);
  }
  return ci;
}

template <class Scalar> struct TailExperiment {
  explicit TailExperiment(EnsembleSpec<Scalar> e) : ensemble(std::move(e)) {}

  TailStatistic statistic = TailStatistic::LocalIsometry;
  EnsembleSpec<Scalar> ensemble;
  std::vector<int> support;
  std::optional<Vec<Scalar>> z; // supported on T; required by LowDistortion/OffSupport
  int m = 1;
  double tau = 0.5;
  long trials = 1000;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct TailResult {
  double empirical_rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  double bound = 1.0;
  long exceed_count = 0;
  long trials = 0;
};

namespace detail {

template <class Scalar>
double tail_statistic(TailStatistic stat, const Mat<Scalar>& samples,
                      const Mat<Scalar>& x, const std::vector<int>& support,
                      const Vec<Scalar>* z) {
  const int n = int(x.rows());
  const int s = int(support.size());
  std::vector<char> on(n, 0);
  for (int i : support) on[i] = 1;
  const double m = double(samples.rows());

  switch (stat) {
    case TailStatistic::LocalIsometry: {
      // s x s compression of X A*A - Id; operator norm by SVD
      Mat<Scalar> sub(samples.rows(), s);
      for (int j = 0; j < s; ++j) sub.col(j) = samples.col(support[j]);
      Mat<Scalar> xs(n, s);
      for (int j = 0; j < s; ++j) xs.col(j) = x.col(support[j]);
      Mat<Scalar> comp = (samples * xs).adjoint() * sub / Scalar(m);
      comp -= Mat<Scalar>::Identity(s, s);
      return comp.jacobiSvd().singularValues()(0);
    }
    case TailStatistic::LowDistortion: {
      const Vec<Scalar> y =
          samples.adjoint() * (samples * (x * (*z))) / Scalar(m);
      double acc = 0.0;
      for (int i : support) acc += std::norm((*z)(i) - y(i));
      return std::sqrt(acc);
    }
    case TailStatistic::OffSupport: {
      const Vec<Scalar> y =
          samples.adjoint() * (samples * (x * (*z))) / Scalar(m);
      double worst = 0.0;
      for (int i = 0; i < n; ++i)
        if (!on[i]) worst = std::max(worst, std::abs(y(i)));
      return worst;
    }
    case TailStatistic::UniformOffSupport: {
      // rows of (X A*A) indexed by T, then column norms over Tc
      Mat<Scalar> xs(n, s);
      for (int j = 0; j < s; ++j) xs.col(j) = x.col(support[j]);
      const Mat<Scalar> rows = (samples * xs).adjoint() * samples / Scalar(m);
      double worst = 0.0;
      for (int i = 0; i < n; ++i)
        if (!on[i]) worst = std::max(worst, double(rows.col(i).norm()));
      return worst;
    }
  }
  return 0.0;
}

} // namespace detail

// Adversarial-ish z for the LowDistortion / OffSupport experiments: among
// `candidates` random unit sign vectors on T, returns the one with the
// largest statistic on a single probe draw of A.
template <class Scalar>
Vec<Scalar> worst_case_z(const EnsembleSpec<Scalar>& ensemble,
                         TailStatistic statistic,
                         const std::vector<int>& support, int m,
                         int candidates = 200, std::uint64_t seed = 1) {
  if (statistic != TailStatistic::LowDistortion &&
      statistic != TailStatistic::OffSupport)
    throw InvalidArgs("worst_case_z: statistic does not take a z");
  const int n = ensemble.dimension();
  const auto [gamma, x] = covariance(ensemble);
  (void)gamma;
  Rng rng(derive_seed(seed, 0x7au));
  Mat<Scalar> probe(m, n);
  for (int k = 0; k < m; ++k) probe.row(k) = ensemble.sample(rng).adjoint();
  Vec<Scalar> best = Vec<Scalar>::Zero(n);
  double best_val = -1.0;
  for (int c = 0; c < candidates; ++c) {
    Vec<Scalar> z = Vec<Scalar>::Zero(n);
    for (int i : support) z(i) = Scalar(rng.next_sign());
    z /= z.norm();
    const double val =
        detail::tail_statistic<Scalar>(statistic, probe, x, support, &z);
    if (val > best_val) { best_val = val; best = z; }
  }
  return best;
}

// Monte Carlo tail estimate with per-trial derived seeds: results are
// bit-identical for any worker count.
template <class Scalar>
TailResult estimate_tail(const TailExperiment<Scalar>& exp) {
  if (exp.trials < 1) throw InvalidArgs("estimate_tail: trials >= 1");
  const int s = int(exp.support.size());
  const int n = exp.ensemble.dimension();
  if (s < 1 || s > n) throw InvalidArgs("estimate_tail: bad support");
  const bool needs_z = exp.statistic == TailStatistic::LowDistortion ||
                       exp.statistic == TailStatistic::OffSupport;
  if (needs_z && !exp.z) throw InvalidArgs("estimate_tail: statistic needs z");
  if (exp.statistic == TailStatistic::LocalIsometry && exp.m < s)
    throw InvalidArgs("estimate_tail: local isometry requires m >= s");

  const auto [gamma, x] = covariance(exp.ensemble);
  const double scale =
      needs_z ? double(exp.z->norm()) : 1.0;
  const double threshold = exp.tau * scale;

  const int workers = std::max(1, exp.workers);
  std::vector<long> counts(workers, 0);
  auto work = [&](int w) {
    long local = 0;
    for (long t = w; t < exp.trials; t += workers) {
      Rng rng(derive_seed(exp.seed, std::uint64_t(t)));
      Mat<Scalar> samples(exp.m, n);
      for (int k = 0; k < exp.m; ++k)
        samples.row(k) = exp.ensemble.sample(rng).adjoint();
      const double stat = detail::tail_statistic<Scalar>(
          exp.statistic, samples, x, exp.support,
          exp.z ? &*exp.z : nullptr);
      if (stat > threshold) ++local;
    }
    counts[w] = local;
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  long exceed = 0;
  for (long c : counts) exceed += c;

  TailResult res;
  res.exceed_count = exceed;
  res.trials = exp.trials;
  res.empirical_rate = double(exceed) / double(exp.trials);
  const BinomialCi ci = clopper_pearson(exceed, exp.trials, 0.99);
  res.ci_low = ci.low;
  res.ci_high = ci.high;

  double mu = incoherence_mu(exp.ensemble, x);
  double ks = kappa_s_from_gamma(gamma, s);
  res.bound = lemma_bound(exp.statistic, n, s, mu, ks, exp.m, exp.tau);
  return res;
}

} // namespace cslab

#endif
