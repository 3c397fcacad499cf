// cslab: experiment runner for anisotropic compressed-sensing studies.
//
// Subcommands:
//   run <config.json>                 execute a configured experiment
//   profile <ensemble.json> --s <s>   print second-moment diagnostics
//   solve --matrix A.csv --rhs b.csv  one-off basis pursuit
//   validate-lemmas <config.json>     tail-bound domination suite
//
// Exit codes: 0 success, 2 config error, 3 numerical failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cslab/cslab.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

cslab::json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw cslab::InvalidArgs("cannot open file: " + path);
  cslab::json j;
  is >> j;
  return j;
}

// simple numeric CSV loader (no header, comma separated)
cslab::Mat<double> load_csv_matrix(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw cslab::InvalidArgs("cannot open file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw cslab::InvalidArgs("empty csv: " + path);
  cslab::Mat<double> m(long(rows.size()), long(rows[0].size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows[0].size())
      throw cslab::InvalidArgs("ragged csv: " + path);
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(long(r), long(c)) = rows[r][c];
  }
  return m;
}

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
  std::optional<double> constant_scale;

  void attach(CLI::App* app) {
    app->add_option("--seed", seed, "master seed (overrides config)");
    app->add_option("--workers", workers, "worker thread count");
    app->add_option("--out", out, "output file path");
    app->add_option("--constant-scale", constant_scale,
                    "multiplier on the certificate batch constant");
  }

  void apply(cslab::ExperimentConfig& cfg) const {
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (out) cfg.out = *out;
    if (constant_scale) cfg.constant_scale = *constant_scale;
  }
};

int cmd_run(const std::string& config_path, const CommonFlags& flags) {
  cslab::ExperimentConfig cfg = cslab::config_from_json(load_json(config_path));
  flags.apply(cfg);
  switch (cfg.experiment) {
    case cslab::ExperimentKind::PhaseTransition: {
      const auto res = cslab::run_phase_transition(cfg);
      std::cout << "phase_transition: " << res.summary.rows.size()
                << " grid points -> " << cfg.out << "\n";
      return kExitOk;
    }
    case cslab::ExperimentKind::KappaScaling: {
      const auto res = cslab::run_kappa_scaling(cfg);
      bool unresolved = false;
      for (const auto& r : res.rows) {
        std::cout << "kappa_s=" << r.kappa_s << " mu=" << r.mu
                  << " m50=" << r.m50 << "\n";
        unresolved = unresolved || r.m50 < 0;
      }
      if (unresolved)
        std::cout << "warning: some members never reached the success "
                     "threshold on the m grid\n";
      std::cout << "kappa_scaling -> " << cfg.out << "\n";
      return kExitOk;
    }
    case cslab::ExperimentKind::CertificateCrossCheck: {
      const auto res = cslab::run_certificate_crosscheck(cfg);
      std::cout << "contingency (certificate x recovery):\n"
                << "  pass/recover     " << res.pass_recover << "\n"
                << "  pass/no-recover  " << res.pass_norecover << "\n"
                << "  fail/recover     " << res.fail_recover << "\n"
                << "  fail/no-recover  " << res.fail_norecover << "\n"
                << "  aborted          " << res.aborted << "\n"
                << "-> " << cfg.out << "\n";
      return res.pass_norecover == 0 ? kExitOk : kExitNumerical;
    }
    case cslab::ExperimentKind::LemmaValidation: {
      const auto res = cslab::run_lemma_validation(cfg);
      std::cout << (res.all_dominated ? "all bounds dominate"
                                      : "DOMINATION VIOLATED")
                << " -> " << cfg.out << "\n";
      return res.all_dominated ? kExitOk : kExitNumerical;
    }
    case cslab::ExperimentKind::RateFormula: {
      const auto t = cslab::run_rate_formula(cfg);
      std::cout << "rate_formula: " << t.rows.size() << " rows -> " << cfg.out
                << "\n";
      return kExitOk;
    }
  }
  return kExitConfig;
}

int cmd_profile(const std::string& ensemble_path, int s) {
  const cslab::json j = load_json(ensemble_path);
  const auto variant = cslab::ensemble_variant_from_json(j);
  return std::visit(
      [&](const auto& spec) {
        const auto norm = cslab::normalize(spec, s);
        const auto prof = cslab::profile(norm.spec, s);
        Eigen::SelfAdjointEigenSolver<std::decay_t<decltype(prof.gamma)>> eig(
            prof.gamma);
        const auto& ev = eig.eigenvalues();
        std::cout << "n        " << spec.dimension() << "\n"
                  << "s        " << s << "\n"
                  << "nu       " << norm.nu << "\n"
                  << "gamma    [" << ev(0) << ", " << ev(ev.size() - 1) << "]\n"
                  << "mu       " << prof.mu << "\n"
                  << "kappa    " << prof.kappa << "\n"
                  << "kappa_s  " << prof.kappa_s << "\n"
                  << "K        " << prof.commutator_k
                  << (prof.k_estimated ? " (sampled estimate)" : " (exact)")
                  << "\n";
        return kExitOk;
      },
      variant);
}

int cmd_solve(const std::string& matrix_path, const std::string& rhs_path) {
  const cslab::Mat<double> a = load_csv_matrix(matrix_path);
  const cslab::Mat<double> b_mat = load_csv_matrix(rhs_path);
  cslab::Vec<double> b;
  if (b_mat.cols() == 1)
    b = b_mat.col(0);
  else if (b_mat.rows() == 1)
    b = b_mat.row(0).transpose();
  else
    throw cslab::InvalidArgs("rhs must be a vector");
  const auto sol = cslab::basis_pursuit<double>(a, b);
  if (!sol.converged) {
    std::cerr << "solver did not converge (residual " << sol.primal_residual
              << ")\n";
    return kExitNumerical;
  }
  std::cout << std::setprecision(17);
  for (Eigen::Index i = 0; i < sol.x_star.size(); ++i)
    std::cout << sol.x_star(i) << "\n";
  std::cerr << "iterations " << sol.iterations << " residual "
            << sol.primal_residual << "\n";
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"anisotropic compressed-sensing laboratory"};
  app.require_subcommand(1);

  std::string config_path, ensemble_path, matrix_path, rhs_path;
  int s = 1;
  CommonFlags run_flags, lemma_flags;

  auto* run = app.add_subcommand("run", "execute a configured experiment");
  run->add_option("config", config_path, "experiment config json")->required();
  run_flags.attach(run);

  auto* prof = app.add_subcommand("profile", "print ensemble diagnostics");
  prof->add_option("ensemble", ensemble_path, "ensemble json")->required();
  prof->add_option("--s", s, "sparsity level")->required();

  auto* solve = app.add_subcommand("solve", "basis pursuit on csv data");
  solve->add_option("--matrix", matrix_path, "A (csv)")->required();
  solve->add_option("--rhs", rhs_path, "b (csv)")->required();

  auto* lemmas =
      app.add_subcommand("validate-lemmas", "tail-bound domination suite");
  lemmas->add_option("config", config_path, "suite config json")->required();
  lemma_flags.attach(lemmas);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, run_flags);
    if (prof->parsed()) return cmd_profile(ensemble_path, s);
    if (solve->parsed()) return cmd_solve(matrix_path, rhs_path);
    if (lemmas->parsed()) {
      cslab::json j = load_json(config_path);
      j["experiment"] = "lemma_validation";
      cslab::ExperimentConfig cfg = cslab::config_from_json(j);
      lemma_flags.apply(cfg);
      const auto res = cslab::run_lemma_validation(cfg);
      std::cout << (res.all_dominated ? "all bounds dominate"
                                      : "DOMINATION VIOLATED")
                << " -> " << cfg.out << "\n";
      return res.all_dominated ? kExitOk : kExitNumerical;
    }
  } catch (const cslab::InvalidArgs& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const cslab::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
