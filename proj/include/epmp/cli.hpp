#pragma once

// Command-line front end: solve / generate / bench / oracle. Output is one
// `key: value` per line. Exit codes follow sysexits: 64 bad usage, 66 input
// file problems, 70 solver failures; a solve that hits the iteration cap
// exits 2.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "epmp/arnoldi.hpp"
#include "epmp/bench.hpp"
#include "epmp/error.hpp"
#include "epmp/linalg.hpp"
#include "epmp/matrix_market.hpp"
#include "epmp/parallel.hpp"
#include "epmp/solver.hpp"

namespace epmp::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_not_converged = 2;
inline constexpr int exit_usage = 64;
inline constexpr int exit_no_input = 66;
inline constexpr int exit_software = 70;

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(s);
  while (std::getline(in, cell, sep)) {
    if (!cell.empty()) out.push_back(cell);
  }
  return out;
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double to_real(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw UsageError("not a number: '" + s + "'");
}

inline std::size_t to_size(const std::string& s) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used == s.size() && s.find('-') == std::string::npos) return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
  }
  throw UsageError("not a non-negative integer: '" + s + "'");
}

/// "5,5,5" (exactly n values) or "gapped:λ1,λ2".
inline Spectrum parse_spectrum(const std::string& text, std::size_t n, std::uint64_t seed) {
  const std::string prefix = "gapped:";
  if (text.rfind(prefix, 0) == 0) {
    const auto parts = split(text.substr(prefix.size()), ',');
    if (parts.size() != 2) throw UsageError("gapped spectrum needs exactly two values");
    return Spectrum::gapped(n, to_real(parts[0]), to_real(parts[1]), seed);
  }
  std::vector<double> values;
  for (const auto& p : split(text, ',')) values.push_back(to_real(p));
  if (values.size() != n) {
    throw UsageError("spectrum has " + std::to_string(values.size()) + " values, expected " +
                     std::to_string(n));
  }
  return Spectrum(std::move(values));
}

/// --workers if given, else EPMP_WORKERS, else hardware concurrency; capped at n.
inline std::size_t resolve_workers(std::optional<std::size_t> flag,
                                   const std::optional<std::string>& env, std::size_t n) {
  std::size_t w = 0;
  if (flag) {
    w = *flag;
  } else if (env && !env->empty()) {
    w = to_size(*env);
  } else {
    w = std::thread::hardware_concurrency();
  }
  if (w == 0) w = 1;
  return std::min(w, n);
}

inline int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::io_error:
    case Errc::parse_error:
    case Errc::non_square:
    case Errc::non_finite:
      return exit_no_input;
    case Errc::invalid_argument:
      return exit_usage;
    default:
      return exit_software;
  }
}

inline void print_estimate(std::ostream& out, const EigenEstimate& e, const std::string& suffix) {
  out << "lambda" << suffix << ": " << fmt(e.lambda) << '\n'
      << "lambda_abs" << suffix << ": " << fmt(e.lambda_abs) << '\n'
      << "residual" << suffix << ": " << fmt(e.residual) << '\n'
      << "iterations" << suffix << ": " << e.iterations << '\n'
      << "converged" << suffix << ": " << (e.converged ? "true" : "false") << '\n'
      << "mutations" << suffix << ": " << e.mutations << '\n'
      << "worse_accepts" << suffix << ": " << e.worse_accepts << '\n';
}

}  // namespace detail

/// Runs one invocation. `args` excludes the program name. EPMP_WORKERS is
/// read from `env_workers` so tests can inject it.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
                   std::optional<std::string> env_workers) {
  using namespace detail;

  CLI::App app{"Dominant eigenpair solvers: power method, annealing-augmented power iteration "
               "(EPMP), row-block parallel EPMP and Arnoldi",
               "epmp"};
  app.require_subcommand(1);

  EpmpConfig cfg;
  std::string matrix_path;
  std::string method = "epmp";
  std::optional<std::size_t> workers;
  std::size_t deflate = 0;

  auto* solve = app.add_subcommand("solve", "Estimate the dominant eigenpair of a matrix");
  solve->add_option("--matrix", matrix_path, "Matrix Market file")->required();
  solve->add_option("--method", method, "power | epmp | epmp-par | arnoldi")
      ->check(CLI::IsMember({"power", "epmp", "epmp-par", "arnoldi"}));
  solve->add_option("--eps", cfg.eps, "Relative fitness-change stop tolerance");
  solve->add_option("--t0", cfg.t0, "Initial temperature");
  solve->add_option("--alpha", cfg.alpha, "Cooling rate in (0, 1)");
  solve->add_option("--max-iter", cfg.max_iter, "Iteration cap");
  solve->add_option("--p-mut", cfg.p_mut, "Per-entry mutation probability");
  solve->add_option("--sigma0", cfg.sigma0, "Mutation noise scale");
  solve->add_option("--res-tol", cfg.res_tol, "Residual treated as converged");
  solve->add_option("--seed", cfg.seed, "Random seed");
  solve->add_option("--workers", workers, "Row-block workers (default: EPMP_WORKERS or all cores)");
  solve->add_flag("--literal-paper-sa", cfg.literal_paper_sa,
                  "Use the unrepaired annealing branch (always mutates on a worse candidate)");
  solve->add_flag("--absolute-delta", cfg.absolute_delta,
                  "Metropolis on the absolute fitness gap instead of the gap relative to P(y)");
  solve->add_option("--deflate", deflate, "Extract this many eigenpairs by Hotelling deflation");

  std::size_t gen_n = 0;
  std::string spectrum_text;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  std::optional<std::size_t> reflections;
  auto* generate = app.add_subcommand("generate", "Write a symmetric matrix with a planted spectrum");
  generate->add_option("--n", gen_n, "Dimension")->required()->check(CLI::PositiveNumber);
  generate->add_option("--spectrum", spectrum_text, "Comma list of n values, or gapped:L1,L2")
      ->required();
  generate->add_option("--seed", gen_seed, "Random seed");
  generate->add_option("--out", gen_out, "Output .mtx path")->required();
  generate->add_option("--reflections", reflections, "Householder reflections (default n)");

  std::string dims_text;
  std::string methods_text = "power,epmp,epmp-par";
  std::size_t reps = 3;
  std::string bench_out = "bench-out";
  std::uint64_t bench_seed = 0;
  auto* bench = app.add_subcommand("bench", "Time solvers over a sweep of planted matrices");
  bench->add_option("--dims", dims_text, "Comma list of dimensions")->required();
  bench->add_option("--methods", methods_text, "Comma list of power, epmp, epmp-par, arnoldi");
  bench->add_option("--reps", reps, "Timed repetitions per cell")->check(CLI::PositiveNumber);
  bench->add_option("--workers", workers, "Workers for epmp-par");
  bench->add_option("--out", bench_out, "Output directory");
  bench->add_option("--seed", bench_seed, "Base seed");

  auto* oracle = app.add_subcommand("oracle", "Full spectrum by dense QR (n <= 2000)");
  oracle->add_option("--matrix", matrix_path, "Matrix Market file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return exit_usage;
  }

  try {
    if (solve->parsed()) {
      cfg.validate();
      const DenseMatrix a = load_matrix_market(matrix_path);
      const bool explicit_parallel = method == "epmp-par";
      std::size_t p = 1;
      if (explicit_parallel || (method == "epmp" && workers && *workers > 1)) {
        p = resolve_workers(workers, env_workers, a.size());
      }
      auto run = [&](const DenseMatrix& m) -> EigenEstimate {
        if (method == "power") return power_method(m, cfg);
        if (method == "arnoldi") return arnoldi_solve(m, cfg);
        return epmp_parallel(m, cfg, std::min(p, m.size()));
      };

      out << "method: " << method << '\n' << "n: " << a.size() << '\n' << "workers: " << p << '\n';
      if (deflate == 0) {
        const EigenEstimate e = run(a);
        print_estimate(out, e, "");
        return e.converged ? exit_ok : exit_not_converged;
      }
      DenseMatrix current = a;
      bool all_converged = true;
      for (std::size_t i = 1; i <= std::min(deflate, a.size()); ++i) {
        const EigenEstimate e = run(current);
        print_estimate(out, e, "_" + std::to_string(i));
        all_converged = all_converged && e.converged;
        if (i < deflate) current = deflate_hotelling(current, e.lambda, e.eigenvector);
      }
      return all_converged ? exit_ok : exit_not_converged;
    }

    if (generate->parsed()) {
      const Spectrum spectrum = parse_spectrum(spectrum_text, gen_n, gen_seed);
      const DenseMatrix a = generate_planted(gen_n, spectrum, gen_seed, reflections.value_or(gen_n));
      save_matrix_market(a, gen_out);
      out << "n: " << gen_n << '\n' << "out: " << gen_out << '\n';
      return exit_ok;
    }

    if (bench->parsed()) {
      BenchOptions opt;
      for (const auto& d : split(dims_text, ',')) {
        const std::size_t n = to_size(d);
        if (n < 2) throw UsageError("benchmark dimensions must be at least 2");
        opt.dims.push_back(n);
      }
      opt.methods.clear();
      for (const auto& m : split(methods_text, ',')) {
        const auto parsed = parse_method(m);
        if (!parsed) throw UsageError("unknown method '" + m + "'");
        opt.methods.push_back(*parsed);
      }
      if (opt.dims.empty() || opt.methods.empty()) throw UsageError("empty --dims or --methods");
      opt.reps = reps;
      opt.cfg.seed = bench_seed;
      const std::size_t max_dim = *std::max_element(opt.dims.begin(), opt.dims.end());
      opt.workers = resolve_workers(workers, env_workers, max_dim);

      const auto records = run_benchmark(opt);
      const std::filesystem::path dir(bench_out);
      std::filesystem::create_directories(dir);
      emit_csv(records, dir / "bench.csv");
      emit_plot_data(records, dir);
      out << "csv: " << (dir / "bench.csv").string() << '\n'
          << "plot_data: " << dir.string() << '\n'
          << "records: " << records.size() << '\n';
      for (Method m : opt.methods) {
        try {
          const ScalingFit fit = scaling_fit(records, m);
          out << "slope_" << to_string(m) << ": " << fmt(fit.slope) << '\n'
              << "r_squared_" << to_string(m) << ": " << fmt(fit.r_squared) << '\n';
        } catch (const Error&) {
          // fewer than three timed dimensions: no fit to report
        }
      }
      return exit_ok;
    }

    if (oracle->parsed()) {
      const DenseMatrix a = load_matrix_market(matrix_path);
      if (a.size() > 2000) throw UsageError("oracle is limited to n <= 2000");
      auto eig = hessenberg_qr_eig(a);
      sort_by_magnitude(eig);
      out << "n: " << a.size() << '\n';
      for (std::size_t i = 0; i < eig.size(); ++i) {
        out << "eigenvalue_" << i + 1 << ": " << fmt17(eig[i].real());
        if (eig[i].imag() != 0.0) out << (eig[i].imag() < 0 ? " - " : " + ") << fmt17(std::abs(eig[i].imag())) << 'i';
        out << '\n';
      }
      return exit_ok;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_no_input;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_software;
  }
  return exit_usage;
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::optional<std::string> env;
  if (const char* w = std::getenv("EPMP_WORKERS")) env = w;
  return run_cli(args, out, err, env);
}

}  // namespace epmp::cli
