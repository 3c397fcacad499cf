#ifndef CSLAB_CERTIFIER_HPP
#define CSLAB_CERTIFIER_HPP

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "cslab/ensemble.hpp"
#include "cslab/errors.hpp"
#include "cslab/rng.hpp"

namespace cslab {

// Per-stage schedule of the golfing construction.
struct GolfingParams {
  int l = 0;                    // stage count
  std::vector<double> c;        // on-support distortion thresholds
  std::vector<double> t;        // off-support thresholds
  std::vector<int> m_batch;     // batch sizes
  int l_prime = 0;              // cap on the total number of batches
  double omega = 1.0;
  double constant_scale = 1.0;  // multiplier on the batch-size constant 694
  bool strict_first_two = true; // first two stages must succeed on try one
};

// l = ceil(log2(s)/2) + 2, c1 = c2 = 1/(2 sqrt(log n)), t1 = t2 = 1/(8 sqrt s),
// c_i = 1/2 and t_i = log(n)/(8 sqrt s) for i >= 3,
// m1 = m2 = 694 kappa_s mu omega s log n, m_i = 694 kappa_s mu omega s,
// l' = ceil(4 (omega + log 12 + 2l/3)). Natural logs throughout; base 2 only
// inside l.
inline GolfingParams default_params(int n, int s, double omega, double mu,
                                    double kappa_s,
                                    double constant_scale = 1.0) {
  if (n < 2 || s < 1 || s > n || omega < 1.0 || mu <= 0.0 || kappa_s < 1.0 ||
      constant_scale <= 0.0)
    throw InvalidArgs("default_params: bad arguments");
  GolfingParams p;
  p.omega = omega;
  p.constant_scale = constant_scale;
  p.l = int(std::ceil(0.5 * std::log2(double(s)))) + 2;
  const double logn = std::log(double(n));
  const double sqrt_s = std::sqrt(double(s));
  const double m_big =
      std::ceil(constant_scale * 694.0 * kappa_s * mu * omega * s * logn);
  const double m_small =
      std::ceil(constant_scale * 694.0 * kappa_s * mu * omega * s);
  for (int i = 1; i <= p.l; ++i) {
    if (i <= 2) {
      p.c.push_back(1.0 / (2.0 * std::sqrt(logn)));
      p.t.push_back(1.0 / (8.0 * sqrt_s));
      p.m_batch.push_back(int(std::max(1.0, m_big)));
    } else {
      p.c.push_back(0.5);
      p.t.push_back(logn / (8.0 * sqrt_s));
      p.m_batch.push_back(int(std::max(1.0, m_small)));
    }
  }
  p.l_prime = int(std::ceil(4.0 * (omega + std::log(12.0) + 2.0 * p.l / 3.0)));
  return p;
}

enum class GolfingFailure {
  None,
  BatchCapExceeded,
  Ass1Failed,
  Ass2Failed,
  Dual1Failed,
  Dual2Failed,
};

inline const char* to_string(GolfingFailure f) {
  switch (f) {
    case GolfingFailure::None: return "none";
    case GolfingFailure::BatchCapExceeded: return "batch_cap_exceeded";
    case GolfingFailure::Ass1Failed: return "ass1_failed";
    case GolfingFailure::Ass2Failed: return "ass2_failed";
    case GolfingFailure::Dual1Failed: return "dual1_failed";
    case GolfingFailure::Dual2Failed: return "dual2_failed";
  }
  return "?";
}

// Measured quantities of the inexact-duality conditions.
struct DualityReport {
  double inv_op_norm = 0.0;      // ||(P_T X A*A P_T)^{-1}||      (<= 2)
  double max_offsupport = 0.0;   // max_{i in Tc} ||P_T X A*A e_i|| (<= 1)
  double on_support_gap = 0.0;   // ||v_T - sgn(x)||_2             (<= 1/4)
  double offsupport_inf = 0.0;   // ||v_{Tc}||_inf                 (<= 1/4)
  double rowspace_residual = 0.0;
  bool singular_on_support = false;
  bool ass1 = false, ass2 = false, dual1 = false, dual2 = false;
  bool rowspace_ok = false;
  bool pass = false;
};

template <class Scalar> struct CertificateResult {
  Vec<Scalar> v;
  // v = sum_k row_coeffs[k] * accepted_samples.row(k).adjoint()
  std::vector<Scalar> row_coeffs;
  Mat<Scalar> accepted_samples;       // all accepted batches, stacked
  std::vector<double> q_norms;        // ||q_i||_2, i = 0..l
  std::vector<int> r;                 // repetitions per stage
  long total_samples = 0;             // sum m_i r_i
  bool success = false;
  GolfingFailure failure_reason = GolfingFailure::None;
  DualityReport report;

  // retained stage data for the closed-form identity check
  std::vector<Mat<Scalar>> batches;   // accepted batch samples per stage
  std::vector<Vec<Scalar>> q_history; // q_0 .. q_l (supported on T)
  std::vector<Vec<Scalar>> v_history; // v_1 .. v_l
};

namespace detail {

// Empirical second-moment operator applied to a vector:
// (1/m) sum_k a_k a_k^* w, with row k of `samples` = a_k^*.
template <class Scalar>
Vec<Scalar> empirical_second_moment_apply(const Mat<Scalar>& samples,
                                          const Vec<Scalar>& w) {
  return samples.adjoint() * (samples * w) / Scalar(double(samples.rows()));
}

} // namespace detail

// Verifies the sufficient conditions for unique l1 recovery on the assembled
// data. Row-space membership of v is checked through the supplied
// coefficients, not assumed.
template <class Scalar>
DualityReport verify_inexact_duality(const SamplingMatrix<Scalar>& a,
                                     const Mat<Scalar>& x,
                                     const std::vector<int>& support,
                                     const Vec<Scalar>& sgn_x,
                                     const Vec<Scalar>& v,
                                     const std::vector<Scalar>& row_coeffs) {
  const int n = int(x.rows());
  const int s = int(support.size());
  DualityReport rep;

  std::vector<char> on_support(n, 0);
  for (int i : support) on_support[i] = 1;

  // B = X A*A (A carries the 1/sqrt m factor, so A*A is the empirical
  // second moment)
  const Mat<Scalar> b = x * (a.a_matrix.adjoint() * a.a_matrix);

  Mat<Scalar> m_ss(s, s);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) m_ss(i, j) = b(support[i], support[j]);
  Eigen::JacobiSVD<Mat<Scalar>> svd(m_ss);
  const auto& sv = svd.singularValues();
  if (sv(s - 1) <= 1e-12 * std::max(1.0, double(sv(0)))) {
    rep.singular_on_support = true;
  } else {
    rep.inv_op_norm = 1.0 / sv(s - 1);
    rep.ass1 = rep.inv_op_norm <= 2.0;
  }

  for (int i = 0; i < n; ++i) {
    if (on_support[i]) continue;
    double col = 0.0;
    for (int r = 0; r < s; ++r) col += std::norm(b(support[r], i));
    rep.max_offsupport = std::max(rep.max_offsupport, std::sqrt(col));
  }
  rep.ass2 = rep.max_offsupport <= 1.0;

  Vec<Scalar> gap = Vec<Scalar>::Zero(n);
  for (int r = 0; r < s; ++r)
    gap(support[r]) = v(support[r]) - sgn_x(support[r]);
  rep.on_support_gap = gap.norm();
  rep.dual1 = rep.on_support_gap <= 0.25;

  for (int i = 0; i < n; ++i)
    if (!on_support[i])
      rep.offsupport_inf = std::max(rep.offsupport_inf, std::abs(v(i)));
  rep.dual2 = rep.offsupport_inf <= 0.25;

  Vec<Scalar> recon = Vec<Scalar>::Zero(n);
  for (std::size_t k = 0; k < row_coeffs.size(); ++k)
    recon += row_coeffs[k] * a.samples.row(int(k)).adjoint();
  rep.rowspace_residual = (recon - v).norm();
  rep.rowspace_ok = rep.rowspace_residual <= 1e-8;

  rep.pass = !rep.singular_on_support && rep.ass1 && rep.ass2 && rep.dual1 &&
             rep.dual2 && rep.rowspace_ok;
  return rep;
}

// The golfing scheme: per stage, draw a batch, accept it when it both
// contracts the on-support residual and keeps the off-support leakage small;
// otherwise redraw. Aborts when the batch budget is exhausted. On completion
// the certificate is assembled and the inexact-duality conditions are
// verified on the union of accepted batches.
template <class Scalar>
CertificateResult<Scalar> golf(const EnsembleSpec<Scalar>& spec,
                               const Mat<Scalar>& x_matrix,
                               const std::vector<int>& support,
                               const Vec<Scalar>& sgn_x,
                               const GolfingParams& params, Rng& rng) {
  const int n = spec.dimension();
  const int s = int(support.size());
  if (s < 1 || s > n) throw InvalidArgs("golf: bad support size");

  std::vector<char> on_support(n, 0);
  for (int i : support) on_support[i] = 1;

  auto restrict_t = [&](const Vec<Scalar>& w) {
    Vec<Scalar> out = Vec<Scalar>::Zero(n);
    for (int i : support) out(i) = w(i);
    return out;
  };

  CertificateResult<Scalar> res;
  res.r.assign(params.l, 0);

  Vec<Scalar> v = Vec<Scalar>::Zero(n);
  Vec<Scalar> q = restrict_t(sgn_x); // q_0 = sgn(x)
  res.q_norms.push_back(q.norm());
  res.q_history.push_back(q);

  int total_batches = 0;
  std::vector<Mat<Scalar>> accepted;

  for (int stage = 0; stage < params.l; ++stage) {
    const int mi = params.m_batch[stage];
    const double qn = res.q_norms.back();
    bool accepted_stage = false;
    while (!accepted_stage) {
      ++res.r[stage];
      ++total_batches;
      res.total_samples += mi;
      if (total_batches > params.l_prime ||
          (params.strict_first_two && stage < 2 && res.r[stage] > 1)) {
        res.failure_reason = GolfingFailure::BatchCapExceeded;
        return res;
      }
      Mat<Scalar> batch(mi, n);
      for (int k = 0; k < mi; ++k)
        batch.row(k) = spec.sample(rng).adjoint();

      const Vec<Scalar> w = x_matrix * q; // X P_T q_{i-1}
      const Vec<Scalar> y = detail::empirical_second_moment_apply(batch, w);

      double on_norm2 = 0.0, off_inf = 0.0;
      for (int i = 0; i < n; ++i) {
        if (on_support[i])
          on_norm2 += std::norm(q(i) - y(i));
        else
          off_inf = std::max(off_inf, std::abs(y(i)));
      }
      if (std::sqrt(on_norm2) <= params.c[stage] * qn &&
          off_inf <= params.t[stage] * qn) {
        accepted_stage = true;
        v += y;
        const Vec<Scalar> coeffs = (batch * w) / Scalar(double(mi));
        for (int k = 0; k < mi; ++k) res.row_coeffs.push_back(coeffs(k));
        accepted.push_back(std::move(batch));
        q = restrict_t(sgn_x - v);
        res.q_norms.push_back(q.norm());
        res.q_history.push_back(q);
        res.v_history.push_back(v);
      }
    }
  }

  res.v = v;
  res.batches = accepted;
  long rows = 0;
  for (const auto& b : accepted) rows += b.rows();
  res.accepted_samples.resize(rows, n);
  long at = 0;
  for (const auto& b : accepted) {
    res.accepted_samples.middleRows(at, b.rows()) = b;
    at += b.rows();
  }

  const auto a_union = sampling_matrix_from_rows(res.accepted_samples);
  res.report =
      verify_inexact_duality(a_union, x_matrix, support, sgn_x, v, res.row_coeffs);
  if (res.report.singular_on_support || !res.report.ass1)
    res.failure_reason = GolfingFailure::Ass1Failed;
  else if (!res.report.ass2)
    res.failure_reason = GolfingFailure::Ass2Failed;
  else if (!res.report.dual1)
    res.failure_reason = GolfingFailure::Dual1Failed;
  else if (!res.report.dual2)
    res.failure_reason = GolfingFailure::Dual2Failed;
  else
    res.failure_reason = GolfingFailure::None;
  res.success = res.report.pass;
  return res;
}

// Recomputes v by the closed-form sum and the q_i by the product form from
// the retained batches; returns the largest l2 deviation from the values the
// iteration produced.
template <class Scalar>
double golfing_identity_check(const CertificateResult<Scalar>& res,
                              const Mat<Scalar>& x_matrix,
                              const std::vector<int>& support,
                              const Vec<Scalar>& sgn_x) {
  const int n = int(x_matrix.rows());
  if (res.batches.empty()) throw InvalidArgs("identity check: no batches kept");

  std::vector<char> on_support(n, 0);
  for (int i : support) on_support[i] = 1;
  auto restrict_t = [&](const Vec<Scalar>& w) {
    Vec<Scalar> out = Vec<Scalar>::Zero(n);
    for (int i : support)
      out(i) = w(i);
    return out;
  };

  double dev = 0.0;
  Vec<Scalar> q = restrict_t(sgn_x);
  Vec<Scalar> v_sum = Vec<Scalar>::Zero(n);
  for (std::size_t i = 0; i < res.batches.size(); ++i) {
    const Vec<Scalar> w = x_matrix * q;
    const Vec<Scalar> y =
        detail::empirical_second_moment_apply(res.batches[i], w);
    v_sum += y;                  // sum_i S_i X P_T q_{i-1}
    q = restrict_t(q - y);       // product form: P_T (Id - S_i X) applied
    dev = std::max(dev, double((q - res.q_history[i + 1]).norm()));
  }
  dev = std::max(dev, double((v_sum - res.v).norm()));
  return dev;
}

} // namespace cslab

#endif
