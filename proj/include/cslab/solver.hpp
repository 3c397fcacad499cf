#ifndef CSLAB_SOLVER_HPP
#define CSLAB_SOLVER_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "cslab/ensemble.hpp"
#include "cslab/errors.hpp"

namespace cslab {

struct BpOptions {
  double feas_tol = 1e-9;
  double obj_tol = 1e-8;
  int max_iter = 50'000;
  double rho = 1.0;
  bool adapt_rho = true;
  double ridge = 1e-12; // regularizes AA* against duplicate rows
};

template <class Scalar> struct BpSolution {
  Vec<Scalar> x_star;
  double primal_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// Modulus shrinkage: preserves the phase, shrinks the modulus. Reduces to
// the real soft threshold on real inputs.
inline std::complex<double> soft_threshold(std::complex<double> v, double t) {
  const double m = std::abs(v);
  if (m <= t) return {0.0, 0.0};
  return v * ((m - t) / m);
}

} // namespace detail

// min ||x||_1  s.t.  Ax = b, by operator splitting: alternate Euclidean
// projection onto {Ax=b} (cached factorization of AA*) with the entrywise
// l1 proximal map. Throws Infeasible when b is not in the range of A.
template <class Scalar>
BpSolution<Scalar> basis_pursuit(const Mat<Scalar>& a, const Vec<Scalar>& b,
                                 const BpOptions& opts = {}) {
  const int m = int(a.rows());
  const int n = int(a.cols());
  if (b.size() != m) throw InvalidArgs("basis_pursuit: size mismatch");

  Mat<Scalar> gram = a * a.adjoint();
  const double ridge = opts.ridge * std::max(1.0, gram.diagonal().real().maxCoeff());
  gram.diagonal().array() += Scalar(ridge);
  Eigen::LDLT<Mat<Scalar>> ldlt(gram);

  const double bnorm = b.norm();
  auto project = [&](const Vec<Scalar>& v) -> Vec<Scalar> {
    return v - a.adjoint() * ldlt.solve(a * v - b);
  };

  // feasibility probe
  {
    const Vec<Scalar> x0 = project(Vec<Scalar>::Zero(n));
    if ((a * x0 - b).norm() > 1e-6 * std::max(1.0, bnorm))
      throw Infeasible("basis_pursuit: b outside the range of A");
  }

  double rho = opts.rho;
  double inv_rho = 1.0 / rho;
  Vec<Scalar> x = Vec<Scalar>::Zero(n);
  Vec<Scalar> z = Vec<Scalar>::Zero(n);
  Vec<Scalar> u = Vec<Scalar>::Zero(n);

  const double eps_abs = 1e-12 * std::sqrt(double(n));
  const double eps_rel = 0.01 * opts.obj_tol;

  BpSolution<Scalar> sol;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    x = project(z - u);
    Vec<Scalar> z_old = z;
    z = x + u;
    for (int i = 0; i < n; ++i) z(i) = detail::soft_threshold(z(i), inv_rho);
    u += x - z;

    const double r_norm = (x - z).norm();
    const double s_norm = rho * (z - z_old).norm();
    const double eps_pri =
        eps_abs + eps_rel * std::max(x.norm(), z.norm());
    const double eps_dual = eps_abs + eps_rel * rho * u.norm();
    if (r_norm <= eps_pri && s_norm <= eps_dual) {
      sol.converged = true;
      ++it;
      break;
    }
    // Residual balancing, frozen after an initial window: unbounded
    // adaptation can enter a rho limit cycle and stall convergence.
    if (opts.adapt_rho && it < 500 && (it % 25) == 24) {
      if (r_norm > 10.0 * s_norm) {
        rho *= 2.0;
        u /= 2.0;
      } else if (s_norm > 10.0 * r_norm) {
        rho /= 2.0;
        u *= 2.0;
      }
      inv_rho = 1.0 / rho;
    }
  }

  // x is the projected iterate, feasible up to the factorization accuracy
  sol.x_star = x;
  sol.primal_residual = (a * x - b).norm();
  sol.iterations = it;
  if (sol.converged &&
      sol.primal_residual > opts.feas_tol * std::max(1.0, bnorm))
    sol.converged = false;
  return sol;
}

template <class Scalar>
BpSolution<Scalar> basis_pursuit(const SamplingMatrix<Scalar>& a,
                                 const Vec<Scalar>& b,
                                 const BpOptions& opts = {}) {
  return basis_pursuit(a.a_matrix, b, opts);
}

// True iff ||x_star - x_true|| <= rel_tol * ||x_true||; absolute comparison
// when x_true = 0.
template <class Scalar>
bool exact_recovery_check(const Vec<Scalar>& x_star, const Vec<Scalar>& x_true,
                          double rel_tol = 1e-5) {
  if (x_star.size() != x_true.size())
    throw InvalidArgs("exact_recovery_check: size mismatch");
  const double ref = x_true.norm();
  if (ref == 0.0) return x_star.norm() <= rel_tol;
  return (x_star - x_true).norm() <= rel_tol * ref;
}

} // namespace cslab

#endif
