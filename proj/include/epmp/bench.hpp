#pragma once

// Sequential-vs-parallel runtime sweep over matrix dimensions, log-log
// scaling fits, and CSV / plot-data emission.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <new>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "epmp/arnoldi.hpp"
#include "epmp/error.hpp"
#include "epmp/linalg.hpp"
#include "epmp/parallel.hpp"
#include "epmp/solver.hpp"

namespace epmp {

enum class Method { power, epmp_seq, epmp_par, arnoldi };

inline constexpr Method all_methods[] = {Method::power, Method::epmp_seq, Method::epmp_par,
                                         Method::arnoldi};

inline const char* to_string(Method m) {
  switch (m) {
    case Method::power: return "POWER";
    case Method::epmp_seq: return "EPMP_SEQ";
    case Method::epmp_par: return "EPMP_PAR";
    case Method::arnoldi: return "ARNOLDI";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
  for (Method m : all_methods) {
    if (s == to_string(m)) return m;
  }
  if (s == "power") return Method::power;
  if (s == "epmp" || s == "epmp-seq") return Method::epmp_seq;
  if (s == "epmp-par") return Method::epmp_par;
  if (s == "arnoldi") return Method::arnoldi;
  return std::nullopt;
}

/// One (dim, method, workers) timing cell. `available == false` is the
/// NULL cell of a sweep: the dimension could not be run.
struct BenchmarkRecord {
  std::size_t dim = 0;
  Method method = Method::power;
  std::size_t workers = 1;
  std::size_t reps = 1;
  double mean_seconds = 0.0;
  double stddev_seconds = 0.0;
  double iterations_mean = 0.0;
  double converged_fraction = 0.0;
  bool available = true;

  bool operator==(const BenchmarkRecord&) const = default;
};

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

struct BenchOptions {
  std::vector<std::size_t> dims;
  std::vector<Method> methods{Method::power, Method::epmp_seq, Method::epmp_par};
  std::size_t reps = 12;
  EpmpConfig cfg;
  std::size_t workers = 1;
  // Planted-matrix recipe: λ₁ = 10, λ₂ = 5, remaining eigenvalues uniform in
  // [0, 1), conjugated by this many Householder reflections.
  double lambda1 = 10.0;
  double lambda2 = 5.0;
  std::size_t reflections = 16;
  // Dimensions whose estimated footprint exceeds this many bytes are
  // reported as NULL cells; 0 disables the check.
  std::uint64_t memory_limit_bytes = 0;
  bool warmup = true;
};

/// Matrix plus the row-block copy EPMP_PAR keeps.
inline std::uint64_t estimated_bytes(std::size_t n) {
  return 2ULL * n * n * sizeof(double);
}

inline EigenEstimate solve_with(Method m, const DenseMatrix& a, const EpmpConfig& cfg,
                                std::size_t workers) {
  switch (m) {
    case Method::power: return power_method(a, cfg);
    case Method::epmp_seq: return epmp_sequential(a, cfg);
    case Method::epmp_par: return epmp_parallel(a, cfg, std::min(workers, a.size()));
    case Method::arnoldi: return arnoldi_solve(a, cfg);
  }
  throw Error(Errc::invalid_argument, "unknown method");
}

namespace bench_detail {

inline BenchmarkRecord null_record(std::size_t dim, Method m, const BenchOptions& opt) {
  BenchmarkRecord r;
  r.dim = dim;
  r.method = m;
  r.workers = m == Method::epmp_par ? opt.workers : 1;
  r.reps = opt.reps;
  r.available = false;
  return r;
}

inline BenchmarkRecord time_method(const DenseMatrix& a, Method m, const BenchOptions& opt) {
  using clock = std::chrono::steady_clock;
  const std::size_t workers = m == Method::epmp_par ? std::min(opt.workers, a.size()) : 1;
  if (opt.warmup) (void)solve_with(m, a, opt.cfg, workers);

  std::vector<double> seconds;
  double iterations = 0.0;
  double converged = 0.0;
  for (std::size_t rep = 0; rep < opt.reps; ++rep) {
    EpmpConfig cfg = opt.cfg;
    cfg.seed = opt.cfg.seed + rep;
    const auto t0 = clock::now();
    const EigenEstimate est = solve_with(m, a, cfg, workers);
    const auto t1 = clock::now();
    seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    iterations += static_cast<double>(est.iterations);
    converged += est.converged ? 1.0 : 0.0;
  }
  const double reps = static_cast<double>(opt.reps);
  double mean = 0.0;
  for (double s : seconds) mean += s;
  mean /= reps;
  double var = 0.0;
  for (double s : seconds) var += (s - mean) * (s - mean);
  const double stddev = opt.reps > 1 ? std::sqrt(var / (reps - 1.0)) : 0.0;

  BenchmarkRecord r;
  r.dim = a.size();
  r.method = m;
  r.workers = workers;
  r.reps = opt.reps;
  r.mean_seconds = mean;
  r.stddev_seconds = stddev;
  r.iterations_mean = iterations / reps;
  r.converged_fraction = converged / reps;
  return r;
}

}  // namespace bench_detail

/// Times every (dim, method) pair. Matrix generation is excluded from the
/// timings; rep i uses seed cfg.seed + i. A dimension that does not fit in
/// memory produces NULL records and the sweep moves on.
inline std::vector<BenchmarkRecord> run_benchmark(const BenchOptions& opt) {
  if (opt.dims.empty()) throw Error(Errc::invalid_argument, "benchmark needs at least one dimension");
  if (opt.reps < 1) throw Error(Errc::invalid_argument, "benchmark needs reps >= 1");
  if (opt.workers < 1) throw Error(Errc::invalid_argument, "benchmark needs workers >= 1");
  opt.cfg.validate();

  std::vector<BenchmarkRecord> out;
  for (std::size_t dim : opt.dims) {
    std::optional<DenseMatrix> a;
    try {
      if (opt.memory_limit_bytes != 0 && estimated_bytes(dim) > opt.memory_limit_bytes) {
        throw std::bad_alloc();
      }
      a.emplace(generate_planted(dim, Spectrum::gapped(dim, opt.lambda1, opt.lambda2, opt.cfg.seed),
                                 opt.cfg.seed, opt.reflections));
    } catch (const std::bad_alloc&) {
      for (Method m : opt.methods) out.push_back(bench_detail::null_record(dim, m, opt));
      continue;
    }
    for (Method m : opt.methods) {
      try {
        out.push_back(bench_detail::time_method(*a, m, opt));
      } catch (const std::bad_alloc&) {
        out.push_back(bench_detail::null_record(dim, m, opt));
      }
    }
  }
  return out;
}

/// Least-squares fit of log(mean_seconds) against log(dim) over the
/// available records of one method.
inline ScalingFit scaling_fit(const std::vector<BenchmarkRecord>& records, Method m) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& r : records) {
    if (r.method != m || !r.available || !(r.mean_seconds > 0.0)) continue;
    x.push_back(std::log(static_cast<double>(r.dim)));
    y.push_back(std::log(r.mean_seconds));
  }
  if (x.size() < 3) {
    throw Error(Errc::invalid_argument, std::string("scaling fit for ") + to_string(m) +
                                            " needs at least 3 timed records");
  }
  const double k = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(Errc::invalid_argument, "scaling fit needs distinct dimensions");
  ScalingFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : std::clamp((sxy * sxy) / (sxx * syy), 0.0, 1.0);
  return fit;
}

inline constexpr std::string_view csv_header =
    "dim,method,workers,reps,mean_seconds,stddev_seconds,iterations_mean,converged_fraction";

namespace bench_detail {

inline std::string real17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_real(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
  return v;
}

inline std::size_t parse_size(const std::string& s) {
  std::size_t used = 0;
  const unsigned long long v = std::stoull(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
  return static_cast<std::size_t>(v);
}

}  // namespace bench_detail

/// Header row followed by one row per record. Unavailable cells print NULL
/// for every measured field.
inline std::string to_csv(const std::vector<BenchmarkRecord>& records) {
  using bench_detail::real17;
  std::string out(csv_header);
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.dim) + ',' + to_string(r.method) + ',' + std::to_string(r.workers) +
           ',' + std::to_string(r.reps) + ',';
    if (r.available) {
      out += real17(r.mean_seconds) + ',' + real17(r.stddev_seconds) + ',' +
             real17(r.iterations_mean) + ',' + real17(r.converged_fraction);
    } else {
      out += "NULL,NULL,NULL,NULL";
    }
    out += '\n';
  }
  return out;
}

inline std::vector<BenchmarkRecord> parse_csv(const std::string& text) {
  using namespace bench_detail;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != csv_header) {
    throw Error(Errc::parse_error, "CSV header does not match the benchmark record layout");
  }
  std::vector<BenchmarkRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    auto fail = [&](const std::string& why) {
      return Error(Errc::parse_error, "CSV line " + std::to_string(line_no) + ": " + why);
    };
    if (cells.size() != 8) throw fail("expected 8 fields");
    try {
      BenchmarkRecord r;
      r.dim = parse_size(cells[0]);
      const auto m = parse_method(cells[1]);
      if (!m) throw fail("unknown method '" + cells[1] + "'");
      r.method = *m;
      r.workers = parse_size(cells[2]);
      r.reps = parse_size(cells[3]);
      if (cells[4] == "NULL") {
        r.available = false;
        r.mean_seconds = r.stddev_seconds = r.iterations_mean = r.converged_fraction = 0.0;
      } else {
        r.mean_seconds = parse_real(cells[4]);
        r.stddev_seconds = parse_real(cells[5]);
        r.iterations_mean = parse_real(cells[6]);
        r.converged_fraction = parse_real(cells[7]);
      }
      out.push_back(r);
    } catch (const std::logic_error&) {
      throw fail("malformed number");
    }
  }
  return out;
}

inline void emit_csv(const std::vector<BenchmarkRecord>& records, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw Error(Errc::io_error, "cannot open '" + path.string() + "' for writing");
  f << to_csv(records);
  if (!f.flush()) throw Error(Errc::io_error, "write to '" + path.string() + "' failed");
}

inline std::vector<BenchmarkRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::io_error, "cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << f.rdbuf();
  return parse_csv(text.str());
}

/// Writes `<dir>/<METHOD>.dat` for every method: a comment header, then
/// "dim mean_seconds" per available record. Methods without records get the
/// header only. Returns the written paths.
inline std::vector<std::filesystem::path> emit_plot_data(const std::vector<BenchmarkRecord>& records,
                                                         const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::vector<std::filesystem::path> written;
  for (Method m : all_methods) {
    const auto path = dir / (std::string(to_string(m)) + ".dat");
    std::ofstream f(path);
    if (!f) throw Error(Errc::io_error, "cannot open '" + path.string() + "' for writing");
    f << "# dim mean_seconds (" << to_string(m) << ")\n";
    for (const auto& r : records) {
      if (r.method != m || !r.available) continue;
      f << r.dim << ' ' << bench_detail::real17(r.mean_seconds) << '\n';
    }
    if (!f.flush()) throw Error(Errc::io_error, "write to '" + path.string() + "' failed");
    written.push_back(path);
  }
  return written;
}

}  // namespace epmp
