#ifndef CSLAB_BUILTIN_HPP
#define CSLAB_BUILTIN_HPP

#include <bit>
#include <cmath>
#include <string>
#include <vector>

#include "cslab/ensemble.hpp"
#include "cslab/errors.hpp"

namespace cslab {

// Uniform sampling of the rows of the n x n +-1 Hadamard matrix (n a power
// of two). Gamma = Id, mu = 1, kappa_s = 1: the tight isotropic reference.
inline EnsembleSpec<double> hadamard_ensemble(int n) {
  if (n < 1 || (n & (n - 1)) != 0)
    throw InvalidArgs("hadamard_ensemble: n must be a power of two");
  std::vector<Vec<double>> atoms;
  for (int r = 0; r < n; ++r) {
    Vec<double> row(n);
    for (int c = 0; c < n; ++c)
      row(c) = (std::popcount(unsigned(r & c)) & 1) ? -1.0 : 1.0;
    atoms.push_back(std::move(row));
  }
  return EnsembleSpec<double>::finite_support(
      std::move(atoms), std::vector<double>(n, 1.0 / n));
}

struct WeightedBasisMember {
  EnsembleSpec<double> spec;
  double kappa_s; // analytic, valid for every 1 <= s <= n
  double mu;      // attained exactly
};

// Weighted sampling of the standard basis: atom w_j e_j with probability p_j.
// Second moment diag(p_j w_j^2) with levels {kappa, 1, 1/kappa}; already in
// the lambda_max = 1/lambda_min normalization, and mu is pinned to the same
// value mu0 for every member (one designated coordinate attains it), so the
// family varies kappa_s at matched incoherence. K = 0 exactly (everything
// commutes).
inline WeightedBasisMember weighted_basis_member(int n, double kappa,
                                                 int n_aniso, double mu0) {
  if (n < 2 || kappa < 1.0 || n_aniso < 0 || n_aniso > n)
    throw InvalidArgs("weighted_basis_member: bad arguments");
  const int n_high = n_aniso / 2;
  const int n_low = n_aniso - n_high;
  std::vector<double> gamma(n, 1.0);
  for (int i = 0; i < n_high; ++i) gamma[i] = kappa;
  for (int i = 0; i < n_low; ++i) gamma[n_high + i] = 1.0 / kappa;

  double need = 0.0;
  for (double g : gamma) need += std::max(g, 1.0 / g);
  if (mu0 < need - 1e-12)
    throw InvalidArgs("weighted_basis_member: mu0 below the feasibility floor");
  const double slack = std::max(0.0, 1.0 - need / mu0);

  std::vector<Vec<double>> atoms;
  std::vector<double> probs;
  for (int j = 0; j < n; ++j) {
    double p = std::max(gamma[j], 1.0 / gamma[j]) / mu0;
    if (j != 0) p += slack / double(n - 1); // coordinate 0 attains mu0
    Vec<double> atom = Vec<double>::Zero(n);
    atom(j) = std::sqrt(gamma[j] / p);
    atoms.push_back(std::move(atom));
    probs.push_back(p);
  }
  // renormalize away float rounding in the probability sum
  double total = 0.0;
  for (double p : probs) total += p;
  for (double& p : probs) p /= total;

  WeightedBasisMember member{
      EnsembleSpec<double>::finite_support(std::move(atoms), std::move(probs)),
      kappa, mu0};
  return member;
}

// Matched-mu family across a list of kappa_s values. mu0 defaults to the
// feasibility floor of the largest kappa, which maximizes the contrast
// between members.
inline std::vector<WeightedBasisMember>
weighted_basis_family(int n, const std::vector<double>& kappas, int n_aniso) {
  double mu0 = 0.0;
  for (double k : kappas)
    mu0 = std::max(mu0, double(n - n_aniso) +
                            n_aniso * std::max(k, 1.0 / k));
  std::vector<WeightedBasisMember> fam;
  for (double k : kappas)
    fam.push_back(weighted_basis_member(n, k, n_aniso, mu0));
  return fam;
}

} // namespace cslab

#endif
