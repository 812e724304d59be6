#pragma once

#include "ctsbt/opcalc.hpp"
#include "ctsbt/params.hpp"
#include "ctsbt/rng.hpp"
#include "ctsbt/su2.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

namespace ctsbt {

struct SamplerConfig {
  long long n_paths = 100000;
  int n_steps = 200;
  std::uint64_t seed = 1;
  int n_threads = 0;  // 0 = hardware concurrency
};

// One diffusion path for mu_{s,tau}: the product of exponentials of
// Gaussian increments over the orthonormal frame of the (s,tau) metric,
// step size 1/n_steps, evaluated at time 1.
inline Matrix2 sample_path_mu(const std::array<Matrix2, 6>& frame, int n_steps,
                              CounterRng& rng) {
  const double sh = std::sqrt(1.0 / double(n_steps));
  Matrix2 z = Matrix2::Identity();
  for (int m = 0; m < n_steps; ++m) {
    Matrix2 w = Matrix2::Zero();
    for (int j = 0; j < 6; ++j) w += (sh * rng.normal()) * frame[j];
    z = z * exp_traceless_2x2(w);
  }
  return z;
}

inline Matrix2 sample_mu_stau(const TimeParams& p, int n_steps, CounterRng& rng) {
  return sample_path_mu(frame_abc(time_to_metric(p)), n_steps, rng);
}

struct MCResult {
  double mean = 0.0;
  double std_err = 0.0;
  long long n = 0;
};

// Threaded Monte Carlo expectation over paths. Path i draws from the
// counter stream i of cfg.seed, so the value buffer is identical for any
// thread count, and the reduction is sequential: results are bitwise
// reproducible.
template <typename Observable>
MCResult mc_expect_mu(const TimeParams& p, const SamplerConfig& cfg,
                      Observable&& obs) {
  if (cfg.n_paths < 2) throw std::invalid_argument("need at least 2 paths");
  const auto frame = frame_abc(time_to_metric(p));
  std::vector<double> vals(std::size_t(cfg.n_paths));

  const auto run_range = [&](long long lo, long long hi) {
    for (long long i = lo; i < hi; ++i) {
      CounterRng rng(cfg.seed, std::uint64_t(i));
      vals[std::size_t(i)] = obs(sample_path_mu(frame, cfg.n_steps, rng));
    }
  };

  int n_threads = cfg.n_threads > 0
                      ? cfg.n_threads
                      : int(std::max(1u, std::thread::hardware_concurrency()));
  n_threads = int(std::min<long long>(n_threads, cfg.n_paths));
  if (n_threads <= 1) {
    run_range(0, cfg.n_paths);
  } else {
    std::vector<std::thread> pool;
    const long long chunk = (cfg.n_paths + n_threads - 1) / n_threads;
    for (int k = 0; k < n_threads; ++k) {
      const long long lo = k * chunk;
      const long long hi = std::min<long long>(lo + chunk, cfg.n_paths);
      if (lo >= hi) break;
      pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  double sum = 0.0;
  for (double v : vals) sum += v;
  const double mean = sum / double(cfg.n_paths);
  double ss = 0.0;
  for (double v : vals) ss += (v - mean) * (v - mean);
  MCResult out;
  out.mean = mean;
  out.std_err = std::sqrt(ss / double(cfg.n_paths - 1) / double(cfg.n_paths));
  out.n = cfg.n_paths;
  return out;
}

// Moments of Tr(Z Z^*) under the sampled measure.
inline MCResult mc_trace_zzstar(const TimeParams& p, const SamplerConfig& cfg,
                                int power = 1) {
  return mc_expect_mu(p, cfg, [power](const Matrix2& z) {
    const double q = (z * z.adjoint()).trace().real();
    double out = 1.0;
    for (int k = 0; k < power; ++k) out *= q;
    return out;
  });
}

// MC estimate of int |F|^2 dmu_{s,tau} for an entry function.
inline MCResult mc_norm_sq_mu(const MatrixEntryFn& f, const TimeParams& p,
                              const SamplerConfig& cfg) {
  return mc_expect_mu(p, cfg, [&f](const Matrix2& z) {
    return std::norm((rep_group_fast(f.rep, z) * f.coeff).trace());
  });
}

// ---------------------------------------------------------------------------
// Flattening of the heat kernel for large s.

// sup over the conjugacy-class angle of |rho_s - 1|; the leading term is
// 4 e^{-3s/4} from the two-dimensional irrep, attained at theta = 0.
inline double rho_uniform_deviation_sup(double s, int n_grid = 512) {
  double sup = 0.0;
  for (int i = 0; i <= n_grid; ++i) {
    const double th = M_PI * double(i) / double(n_grid);
    sup = std::max(sup, std::abs(heat_kernel_su2(s, k_theta(th), 1e-14) - 1.0));
  }
  return sup;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fit_line needs matching arrays of size >= 2");
  }
  const double n = double(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LineFit out;
  out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  out.intercept = (sy - out.slope * sx) / n;
  return out;
}

// Least-squares slope of log sup-deviation against s; approaches -3/4 as
// the grid moves to larger s.
inline LineFit heat_flattening_fit(const std::vector<double>& s_grid,
                                   std::vector<double>* deviations = nullptr) {
  std::vector<double> logs;
  logs.reserve(s_grid.size());
  std::vector<double> devs;
  devs.reserve(s_grid.size());
  for (double s : s_grid) {
    const double d = rho_uniform_deviation_sup(s);
    devs.push_back(d);
    logs.push_back(std::log(d));
  }
  if (deviations) *deviations = devs;
  return fit_line(s_grid, logs);
}

}  // namespace ctsbt
