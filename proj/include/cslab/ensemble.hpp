#ifndef CSLAB_ENSEMBLE_HPP
#define CSLAB_ENSEMBLE_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "cslab/errors.hpp"
#include "cslab/rng.hpp"

namespace cslab {

template <class Scalar> using Vec = Eigen::Vector<Scalar, Eigen::Dynamic>;
template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kCompletenessTol = 1e-10; // relative to lambda_max
inline constexpr std::int64_t kDefaultSupportBudget = 2'000'000;

namespace detail {

// Draws the entries of g as independent uniform random signs.
template <class Scalar> inline Scalar random_sign(Rng& rng) {
  return Scalar(rng.next_sign());
}

template <class Scalar>
inline double operator_norm(const Mat<Scalar>& m) {
  return m.jacobiSvd().singularValues()(0);
}

} // namespace detail

// A sampleable distribution of measurement vectors on F^n.
// FiniteSupport: finite list of (atom, probability) pairs.
// SignedTransform: a = scale * M * g with g a uniform random-sign vector.
template <class Scalar> class EnsembleSpec {
public:
  enum class Kind { FiniteSupport, SignedTransform };

  static EnsembleSpec finite_support(std::vector<Vec<Scalar>> atoms,
                                     std::vector<double> probs,
                                     double scale = 1.0) {
    if (atoms.empty() || atoms.size() != probs.size())
      throw InvalidArgs("finite_support: atoms/probs size mismatch");
    const Eigen::Index n = atoms.front().size();
    double total = 0.0;
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      if (atoms[j].size() != n)
        throw InvalidArgs("finite_support: atom length mismatch");
      if (probs[j] <= 0.0)
        throw InvalidArgs("finite_support: probabilities must be positive");
      total += probs[j];
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw InvalidArgs("finite_support: probabilities must sum to 1");
    if (scale <= 0.0) throw InvalidArgs("scale must be positive");
    EnsembleSpec s;
    s.kind_ = Kind::FiniteSupport;
    s.n_ = int(n);
    s.scale_ = scale;
    s.atoms_ = std::move(atoms);
    s.probs_ = std::move(probs);
    s.cumprobs_.resize(s.probs_.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < s.probs_.size(); ++j) {
      acc += s.probs_[j];
      s.cumprobs_[j] = acc;
    }
    s.cumprobs_.back() = 1.0;
    return s;
  }

  static EnsembleSpec signed_transform(Mat<Scalar> m, double scale = 1.0) {
    if (m.rows() != m.cols() || m.rows() == 0)
      throw InvalidArgs("signed_transform: matrix must be square");
    if (scale <= 0.0) throw InvalidArgs("scale must be positive");
    EnsembleSpec s;
    s.kind_ = Kind::SignedTransform;
    s.n_ = int(m.rows());
    s.scale_ = scale;
    s.transform_ = std::move(m);
    return s;
  }

  Kind kind() const { return kind_; }
  int dimension() const { return n_; }
  double scale() const { return scale_; }
  const std::vector<Vec<Scalar>>& atoms() const { return atoms_; }
  const std::vector<double>& probs() const { return probs_; }
  const Mat<Scalar>& transform() const { return transform_; }

  EnsembleSpec rescaled(double factor) const {
    EnsembleSpec s = *this;
    s.scale_ *= factor;
    return s;
  }

  // One i.i.d. draw (includes the global scale). Deterministic given rng.
  Vec<Scalar> sample(Rng& rng) const {
    if (kind_ == Kind::FiniteSupport) {
      const double u = rng.next_double();
      const std::size_t j =
          std::lower_bound(cumprobs_.begin(), cumprobs_.end(), u) -
          cumprobs_.begin();
      return scale_ * atoms_[std::min(j, atoms_.size() - 1)];
    }
    Vec<Scalar> g(n_);
    for (int i = 0; i < n_; ++i) g(i) = detail::random_sign<Scalar>(rng);
    return scale_ * (transform_ * g);
  }

private:
  EnsembleSpec() = default;
  Kind kind_ = Kind::FiniteSupport;
  int n_ = 0;
  double scale_ = 1.0;
  std::vector<Vec<Scalar>> atoms_;
  std::vector<double> probs_;
  std::vector<double> cumprobs_;
  Mat<Scalar> transform_;
};

template <class Scalar>
Vec<Scalar> sample(const EnsembleSpec<Scalar>& spec, Rng& rng) {
  return spec.sample(rng);
}

// Gamma = E[aa*] (exact) and X = Gamma^{-1}. Throws NotComplete when the
// smallest eigenvalue falls below the completeness tolerance.
template <class Scalar>
std::pair<Mat<Scalar>, Mat<Scalar>> covariance(const EnsembleSpec<Scalar>& spec) {
  const int n = spec.dimension();
  const double nu2 = spec.scale() * spec.scale();
  Mat<Scalar> gamma = Mat<Scalar>::Zero(n, n);
  if (spec.kind() == EnsembleSpec<Scalar>::Kind::FiniteSupport) {
    for (std::size_t j = 0; j < spec.atoms().size(); ++j)
      gamma.noalias() +=
          (nu2 * spec.probs()[j]) * spec.atoms()[j] * spec.atoms()[j].adjoint();
  } else {
    gamma.noalias() = nu2 * spec.transform() * spec.transform().adjoint();
  }
  gamma = ((gamma + gamma.adjoint()) / Scalar(2)).eval(); // enforce Hermitian

  // Diagonal covariances invert exactly entrywise; this keeps X free of
  // eigensolver round-off (and the commutator of diagonal ensembles at 0).
  const double gmax = gamma.cwiseAbs().maxCoeff();
  bool diagonal = true;
  for (int i = 0; i < n && diagonal; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && std::abs(gamma(i, j)) > 1e-14 * gmax) {
        diagonal = false;
        break;
      }
  if (diagonal) {
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = std::abs(gamma(i, i));
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
    if (dmin <= kCompletenessTol * dmax)
      throw NotComplete("covariance: E[aa*] is (numerically) singular");
    Mat<Scalar> x = Mat<Scalar>::Zero(n, n);
    for (int i = 0; i < n; ++i) x(i, i) = Scalar(1) / gamma(i, i);
    Mat<Scalar> gdiag = Mat<Scalar>::Zero(n, n);
    gdiag.diagonal() = gamma.diagonal();
    return {gdiag, x};
  }

  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(gamma);
  const auto& ev = eig.eigenvalues();
  if (ev(0) <= kCompletenessTol * ev(n - 1))
    throw NotComplete("covariance: E[aa*] is (numerically) singular");
  Mat<Scalar> x = eig.eigenvectors() *
                  ev.cwiseInverse().asDiagonal() *
                  eig.eigenvectors().adjoint();
  x = ((x + x.adjoint()) / Scalar(2)).eval();
  return {gamma, x};
}

// Smallest mu with  max_i |<a,e_i>|^2 <= mu  and  max_i |<a,X e_i>|^2 <= mu
// almost surely. FiniteSupport: exact max over atoms x coordinates.
// SignedTransform: the a.s. supremum over sign patterns is attained at the
// worst-case pattern, which turns each row inner product into an l1 norm.
template <class Scalar>
double incoherence_mu(const EnsembleSpec<Scalar>& spec, const Mat<Scalar>& x) {
  double mu = 0.0;
  if (spec.kind() == EnsembleSpec<Scalar>::Kind::FiniteSupport) {
    for (const auto& atom : spec.atoms()) {
      const Vec<Scalar> a = spec.scale() * atom;
      const Vec<Scalar> xa = x * a;
      mu = std::max({mu, double(a.cwiseAbs().maxCoeff()),
                     double(xa.cwiseAbs().maxCoeff())});
    }
    return mu * mu;
  }
  const Mat<Scalar> m = spec.scale() * spec.transform();
  const Mat<Scalar> xm = x * m;
  for (int i = 0; i < spec.dimension(); ++i) {
    const double r1 = m.row(i).template lpNorm<1>();
    const double r2 = xm.row(i).template lpNorm<1>();
    mu = std::max({mu, r1 * r1, r2 * r2});
  }
  return mu;
}

struct SparseEigs {
  double lambda_max;
  double lambda_min;
};

// Exact s-sparse extreme singular values of X by enumerating all supports of
// size s: the extremum of ||Xv||/||v|| over supp(v) in T is an extreme
// singular value of the column submatrix X(:,T). A diagonal matrix reduces to
// its extreme diagonal entries for every s.
template <class Scalar>
SparseEigs sparse_eigs(const Mat<Scalar>& x, int s,
                       std::int64_t budget = kDefaultSupportBudget) {
  const int n = int(x.rows());
  if (s < 1 || s > n) throw InvalidArgs("sparse_eigs: need 1 <= s <= n");

  const double scale = x.cwiseAbs().maxCoeff();
  bool diagonal = true;
  for (int i = 0; i < n && diagonal; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && std::abs(x(i, j)) > 1e-14 * scale) { diagonal = false; break; }
  if (diagonal) {
    const auto d = x.diagonal().cwiseAbs();
    return {d.maxCoeff(), d.minCoeff()};
  }

  // count C(n,s) against the enumeration budget
  double count = 1.0;
  for (int i = 0; i < s; ++i) count *= double(n - i) / double(i + 1);
  if (count > double(budget))
    throw BudgetExceeded("sparse_eigs: support enumeration over budget");

  std::vector<int> support(s);
  for (int i = 0; i < s; ++i) support[i] = i;
  Mat<Scalar> sub(n, s);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (;;) {
    for (int i = 0; i < s; ++i) sub.col(i) = x.col(support[i]);
    const auto sv = sub.jacobiSvd().singularValues();
    hi = std::max(hi, double(sv(0)));
    lo = std::min(lo, double(sv(s - 1)));
    // next combination
    int k = s - 1;
    while (k >= 0 && support[k] == n - s + k) --k;
    if (k < 0) break;
    ++support[k];
    for (int i = k + 1; i < s; ++i) support[i] = support[i - 1] + 1;
  }
  return {hi, lo};
}

// kappa_s = max{ cond(s, Sigma), cond(s, Sigma^{-1}) } with Sigma = Gamma^{1/2}.
template <class Scalar>
double kappa_s_from_gamma(const Mat<Scalar>& gamma, int s,
                          std::int64_t budget = kDefaultSupportBudget) {
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(gamma);
  const auto& ev = eig.eigenvalues();
  Mat<Scalar> sigma = eig.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
                      eig.eigenvectors().adjoint();
  Mat<Scalar> sigma_inv = eig.eigenvectors() *
                          ev.cwiseSqrt().cwiseInverse().asDiagonal() *
                          eig.eigenvectors().adjoint();
  const SparseEigs a = sparse_eigs<Scalar>(sigma, s, budget);
  const SparseEigs b = sparse_eigs<Scalar>(sigma_inv, s, budget);
  return std::max(a.lambda_max / a.lambda_min, b.lambda_max / b.lambda_min);
}

template <class Scalar> struct NormalizeResult {
  EnsembleSpec<Scalar> spec;
  double nu;
};

// Rescales so that lambda_max(s, Gamma') = lambda_min(s, Gamma')^{-1} for the
// given s. The basis-pursuit minimizer is unaffected by the rescaling.
template <class Scalar>
NormalizeResult<Scalar> normalize(const EnsembleSpec<Scalar>& spec, int s,
                                  std::int64_t budget = kDefaultSupportBudget) {
  const auto [gamma, x] = covariance(spec);
  (void)x;
  const SparseEigs se = sparse_eigs<Scalar>(gamma, s, budget);
  const double nu = std::pow(se.lambda_max * se.lambda_min, -0.25);
  return {spec.rescaled(nu), nu};
}

struct CommutatorK {
  double k;
  bool estimated; // true when obtained by sampling sign patterns
};

// K with 2 || [aa*, X] || <= K a.s. Exact for FiniteSupport; sampled upper
// estimate for SignedTransform (sup over 2^n sign patterns is infeasible).
template <class Scalar>
CommutatorK commutator_k(const EnsembleSpec<Scalar>& spec, const Mat<Scalar>& x,
                         int sample_trials = 10'000,
                         std::uint64_t seed = 0x636f6d6dull) {
  double k = 0.0;
  if (spec.kind() == EnsembleSpec<Scalar>::Kind::FiniteSupport) {
    for (const auto& atom : spec.atoms()) {
      const Vec<Scalar> a = spec.scale() * atom;
      const Mat<Scalar> aa = a * a.adjoint();
      const Mat<Scalar> comm = aa * x - x * aa;
      k = std::max(k, 2.0 * detail::operator_norm<Scalar>(comm));
    }
    return {k, false};
  }
  Rng rng(seed);
  for (int t = 0; t < sample_trials; ++t) {
    const Vec<Scalar> a = spec.sample(rng);
    const Mat<Scalar> aa = a * a.adjoint();
    const Mat<Scalar> comm = aa * x - x * aa;
    k = std::max(k, 2.0 * detail::operator_norm<Scalar>(comm));
  }
  return {k, true};
}

// Derived second-moment quantities of an ensemble for a designated sparsity.
template <class Scalar> struct EnsembleProfile {
  Mat<Scalar> gamma;    // E[aa*]
  Mat<Scalar> x_matrix; // Gamma^{-1}
  double mu = 0.0;
  double kappa = 1.0;   // cond(Sigma), Sigma = Gamma^{1/2}
  double kappa_s = 1.0;
  int s = 1;
  double commutator_k = 0.0;
  bool k_estimated = false;
};

template <class Scalar>
EnsembleProfile<Scalar> profile(const EnsembleSpec<Scalar>& spec, int s,
                                std::int64_t budget = kDefaultSupportBudget,
                                int k_sample_trials = 10'000) {
  EnsembleProfile<Scalar> p;
  std::tie(p.gamma, p.x_matrix) = covariance(spec);
  p.mu = incoherence_mu(spec, p.x_matrix);
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(p.gamma);
  const auto& ev = eig.eigenvalues();
  p.kappa = std::sqrt(ev(ev.size() - 1) / ev(0));
  p.s = s;
  p.kappa_s = kappa_s_from_gamma(p.gamma, s, budget);
  const CommutatorK ck = commutator_k(spec, p.x_matrix, k_sample_trials);
  p.commutator_k = ck.k;
  p.k_estimated = ck.estimated;
  return p;
}

// A = (1/sqrt m) sum_i e_i a_i*, together with the raw samples (row i of
// `samples` is a_i*, so a_matrix = samples / sqrt(m)).
template <class Scalar> struct SamplingMatrix {
  Mat<Scalar> samples;  // m x n, row i = a_i^*
  Mat<Scalar> a_matrix; // m x n
  int m = 0;

  Vec<Scalar> sample_vector(int i) const { return samples.row(i).adjoint(); }
};

template <class Scalar>
SamplingMatrix<Scalar> sampling_matrix(const EnsembleSpec<Scalar>& spec, int m,
                                       Rng& rng) {
  if (m < 1) throw InvalidArgs("sampling_matrix: m >= 1 required");
  SamplingMatrix<Scalar> out;
  out.m = m;
  out.samples.resize(m, spec.dimension());
  for (int i = 0; i < m; ++i)
    out.samples.row(i) = spec.sample(rng).adjoint();
  out.a_matrix = out.samples / std::sqrt(double(m));
  return out;
}

// Builds a SamplingMatrix from already-drawn sample vectors.
template <class Scalar>
SamplingMatrix<Scalar> sampling_matrix_from_rows(const Mat<Scalar>& samples) {
  SamplingMatrix<Scalar> out;
  out.m = int(samples.rows());
  out.samples = samples;
  out.a_matrix = samples / std::sqrt(double(out.m));
  return out;
}

} // namespace cslab

#endif
