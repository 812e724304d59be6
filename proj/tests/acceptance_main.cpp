// Acceptance gate: twelve end-to-end checks of the library, one line each.
// Exits nonzero if any check fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "ctsbt/euclidean.hpp"
#include "ctsbt/opcalc.hpp"
#include "ctsbt/params.hpp"
#include "ctsbt/polynomial.hpp"
#include "ctsbt/sampling.hpp"
#include "ctsbt/su2.hpp"

using namespace ctsbt;

namespace {

struct Check {
  bool pass = false;
  std::string detail;
};

std::vector<TimeParams> random_time_grid(int count, std::uint64_t seed) {
  CounterRng rng(seed, 900);
  std::vector<TimeParams> grid;
  while (int(grid.size()) < count) {
    const double s = 0.6 + 2.9 * rng.uniform();
    const double r = 0.85 * rng.uniform();
    const double ph = 2.0 * M_PI * rng.uniform();
    const TimeParams p{s, {s * (1.0 + r * std::cos(ph)), s * r * std::sin(ph)}};
    if (in_time_disk(p)) grid.push_back(p);
  }
  return grid;
}

Polynomial random_poly(int dim, int max_deg, CounterRng& rng) {
  Polynomial f(dim);
  std::vector<int> k(dim, 0);
  while (true) {
    int sum = 0;
    for (int kj : k) sum += kj;
    if (sum <= max_deg)
      f.add_term(k, {2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0});
    int j = 0;
    while (j < dim && ++k[j] > max_deg) k[j++] = 0;
    if (j == dim) break;
  }
  return f;
}

MatrixX random_coeff(int n, CounterRng& rng) {
  MatrixX a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      a(i, j) = complexd(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
  return a;
}

std::string residual(const char* label, double value, double tol) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%s %.2e (tol %.0e)", label, value, tol);
  return buf;
}

// 1. Transform isometry for polynomials on R^d, both norms by exact moments.
Check polynomial_isometry() {
  CounterRng rng(2, 33);
  const auto grid = random_time_grid(20, 2);
  double worst = 0.0;
  for (int d : {1, 2}) {
    for (int j = 0; j < 3; ++j) {
      const Polynomial f = random_poly(d, 6, rng);
      for (const TimeParams& p : grid) {
        const double a = poly_norm_sq_rho_s(f, p.s);
        const double b = poly_norm_sq_mu(heat_apply_poly(f, p.tau), p);
        worst = std::max(worst, std::abs(a - b) / a);
      }
    }
  }
  return {worst <= 1e-10, residual("max rel dev", worst, 1e-10)};
}

// 2. Pointwise bound constant: quadrature equals the closed form.
Check ratio_closed_form() {
  CounterRng rng(3, 34);
  double worst = 0.0;
  for (const TimeParams& p : random_time_grid(10, 3)) {
    const double sc = 0.8 * std::sqrt(p.s);
    const ComplexPoint z{complexd(sc * (2.0 * rng.uniform() - 1.0),
                                  sc * (2.0 * rng.uniform() - 1.0))};
    const double quad = norm_ratio_quadrature(z, p, 64);
    const double closed = norm_ratio_closed_form(z, p);
    worst = std::max(worst, std::abs(quad - closed) / closed);
  }
  return {worst <= 1e-6, residual("max rel dev", worst, 1e-6)};
}

// 3. Density normalization on C^d and the s = t special case.
Check mu_normalization() {
  const TimeParams p{1.3, {0.9, 0.5}};
  double mass_dev = 0.0;
  for (int d : {1, 2}) {
    const double hx = 7.0 * std::sqrt(p.s - p.t() / 2.0);
    const double hy = 7.0 * std::sqrt(p.t() / 2.0);
    std::vector<Quad1D> axes;
    for (int j = 0; j < d; ++j) {
      axes.push_back(gauss_legendre_on(d == 1 ? 64 : 48, -hx, hx));
      axes.push_back(gauss_legendre_on(d == 1 ? 64 : 48, -hy, hy));
    }
    const double mass = tensor_integrate(axes, [&](const std::vector<double>& v) {
      ComplexPoint z(d);
      for (int j = 0; j < d; ++j) z[j] = complexd(v[2 * j], v[2 * j + 1]);
      return mu_density(z, p);
    });
    mass_dev = std::max(mass_dev, std::abs(mass - 1.0));
  }

  const double t = 0.8;
  const TimeParams pt{t, {t, 0.0}};
  double special = 0.0;
  for (double x : {-1.5, -0.4, 0.3, 1.2})
    for (double y : {-1.1, 0.2, 0.9}) {
      const double got = mu_density({complexd(x, y)}, pt);
      const double want = std::exp(-(x * x + y * y) / t) / (M_PI * t);
      special = std::max(special, std::abs(got - want) / want);
    }
  const bool ok = mass_dev <= 1e-8 && special <= 1e-14;
  return {ok, residual("mass dev", mass_dev, 1e-8) + ", " +
                  residual("special case", special, 1e-14)};
}

// 4. Exact isometry for matrix entries across irreducible representations.
Check matrix_entry_isometry() {
  CounterRng rng(7, 36);
  const auto grid = random_time_grid(20, 7);
  double worst = 0.0;
  for (int n = 1; n <= 5; ++n) {
    const Irrep r = irrep(n);
    for (int j = 0; j < 5; ++j) {
      const MatrixEntryFn f{r, random_coeff(n, rng)};
      for (const TimeParams& p : grid) {
        const double a = norm_sq_rho_s(f, p.s);
        const double b = norm_sq_mu_stau(transform_me(f, p.tau), p);
        worst = std::max(worst, std::abs(a - b) / a);
      }
    }
  }
  return {worst <= 1e-10, residual("max rel dev", worst, 1e-10)};
}

// 5. Operator decomposition and the commutator suite on the lifted algebra.
Check laplacian_decomposition() {
  const auto grid = random_time_grid(20, 5);
  double dec = 0.0, comm = 0.0;
  const LiftedOps ops2 = lifted_ops(irrep(2));
  const LiftedOps ops3 = lifted_ops(irrep(3));
  const LiftedOps pair2 = multi_lifted_ops(irrep(2), 2);
  const LiftedOps pair3 = multi_lifted_ops(irrep(3), 2);
  for (const TimeParams& p : grid) {
    dec = std::max({dec, lift_identity_residual(ops2, p),
                    lift_identity_residual(ops3, p),
                    lift_identity_residual(pair2, p)});
    for (const LiftedOps* ops : {&pair2, &pair3}) {
      const MatrixX lk = lift_laplacian_k(*ops);
      const MatrixX ls = lift_laplacian_stau(*ops, p);
      const MatrixX d2 = lift_dsq(*ops);
      const MatrixX db2 = lift_dbarsq(*ops);
      const std::vector<const MatrixX*> set{&lk, &ls, &d2, &db2};
      for (std::size_t i = 0; i < set.size(); ++i)
        for (std::size_t j = i + 1; j < set.size(); ++j)
          comm = std::max(comm,
                          ((*set[i]) * (*set[j]) - (*set[j]) * (*set[i])).norm());
    }
  }
  const bool ok = dec <= 1e-10 && comm <= 1e-10;
  return {ok, residual("decomposition", dec, 1e-10) + ", " +
                  residual("commutators", comm, 1e-10)};
}

// 6. Heat-operator transform equals convolution against the complex kernel.
Check transform_equivalence() {
  CounterRng rng(8, 37);
  std::vector<Matrix2> points;
  for (int i = 0; i < 5; ++i) {
    Matrix2 w = random_sl2(rng);
    w *= 0.5 * rng.uniform() / w.norm();
    points.push_back(exp_traceless_2x2(w));
  }
  double worst = 0.0;
  for (int n = 1; n <= 3; ++n) {
    const MatrixEntryFn f{irrep(n), random_coeff(n, rng)};
    for (complexd tau : {complexd{1.0, 0.0}, {1.0, 0.5}, {1.0, -0.5}}) {
      const MatrixEntryFn bf = transform_me(f, tau);
      for (const Matrix2& z : points) {
        const complexd exact = bf.eval(z);
        const complexd quad = transform_quadrature_su2(f, tau, z, 48);
        worst = std::max(worst,
                         std::abs(quad - exact) / std::max(std::abs(exact), 1e-12));
      }
    }
  }
  return {worst <= 1e-7, residual("max rel dev", worst, 1e-7)};
}

// 7. Group heat kernel: mass, semigroup, invariance, approximate identity.
Check heat_kernel_axioms() {
  double mass = 0.0;
  for (double t : {0.5, 1.0, 4.0}) {
    const double m = class_integrate(
        [&](double th) { return heat_kernel_su2(t, k_theta(th)); }, 64);
    mass = std::max(mass, std::abs(m - 1.0));
  }

  double semi = 0.0;
  {
    const HaarRule haar = haar_quadrature(24);
    for (double th : {0.4, 1.2, 2.2}) {
      const Matrix2 k = k_theta(th);
      double conv = 0.0;
      haar.for_each([&](const Matrix2& g, double w) {
        conv += w * heat_kernel_su2(0.25, k * g.adjoint()) * heat_kernel_su2(0.35, g);
      });
      const double want = heat_kernel_su2(0.6, k);
      semi = std::max(semi, std::abs(conv - want) / want);
    }
  }

  CounterRng rng(9, 38);
  double inv = 0.0;
  for (int i = 0; i < 8; ++i) {
    const Matrix2 k = haar_sample(rng);
    const Matrix2 g = haar_sample(rng);
    const double t = 0.3 + rng.uniform();
    const double base = heat_kernel_su2(t, k);
    inv = std::max({inv, std::abs(heat_kernel_su2(t, Matrix2(k.adjoint())) - base),
                    std::abs(heat_kernel_su2(t, Matrix2(g * k * g.adjoint())) - base)});
  }

  double prev = 1.0;
  bool shrinking = true;
  for (double t : {0.5, 0.1, 0.02}) {
    const double outside = class_integrate(
        [&](double th) { return heat_kernel_su2(t, k_theta(th)); }, 64, 0.5, M_PI);
    if (outside >= prev) shrinking = false;
    prev = outside;
  }
  shrinking = shrinking && prev < 1e-3;

  const bool ok = mass <= 1e-8 && semi <= 1e-6 && inv <= 1e-10 && shrinking;
  return {ok, residual("mass", mass, 1e-8) + ", " +
                  residual("semigroup", semi, 1e-6) + ", " +
                  residual("invariance", inv, 1e-10) +
                  (shrinking ? ", identity trend ok" : ", identity trend FAILED")};
}

// 8. Averaged law depends only on Re(tau): MC means agree across variants
//    and match the exact law of the discretized flow.
Check averaged_law_invariance() {
  const double t = 0.9;
  const double su[3][2] = {{1.0, 0.0}, {1.4, -0.6}, {2.0, 1.2}};
  std::vector<MCResult> mc;
  std::vector<double> disc, cont;
  for (int i = 0; i < 3; ++i) {
    const TimeParams p{su[i][0], {t, su[i][1]}};
    SamplerConfig cfg;
    cfg.n_paths = 200000;
    cfg.n_steps = 200;
    cfg.seed = 11 + i;
    mc.push_back(mc_trace_zzstar(p, cfg));
    disc.push_back(nu_moment_discrete(p, 1, 200));
    cont.push_back(nu_moment_exact(p, 1));
  }
  double pair_sig = 0.0, oracle_sig = 0.0, spread = 0.0;
  for (int i = 0; i < 3; ++i) {
    oracle_sig = std::max(oracle_sig, std::abs(mc[i].mean - disc[i]) / mc[i].std_err);
    spread = std::max(spread, std::abs(cont[i] - cont[0]) / cont[0]);
    for (int j = i + 1; j < 3; ++j)
      pair_sig = std::max(pair_sig, std::abs(mc[i].mean - mc[j].mean) /
                                        std::hypot(mc[i].std_err, mc[j].std_err));
  }
  const bool ok = pair_sig <= 3.0 && oracle_sig <= 3.0 && spread <= 1e-9;
  return {ok, residual("pairwise sigma", pair_sig, 3) + ", " +
                  residual("vs discrete law", oracle_sig, 3) + ", " +
                  residual("exact spread", spread, 1e-9)};
}

// 9. MC norms within 3 stderr of the exact discretized law, which itself
//    sits close to the continuum value.
Check mc_isometry_cross_check() {
  CounterRng rng(7, 44);
  const std::vector<TimeParams> grid{{1.0, {1.0, 0.0}}, {0.7, {0.9, 0.3}},
                                     {1.4, {1.1, -0.6}}};
  double sig = 0.0, bias = 0.0;
  int combo = 0;
  for (int n : {2, 3}) {
    for (const TimeParams& p : grid) {
      const MatrixEntryFn f{irrep(n), random_coeff(n, rng)};
      SamplerConfig cfg;
      cfg.n_paths = 20000;
      cfg.n_steps = 200;
      cfg.seed = 500 + combo++;
      const MCResult mc = mc_norm_sq_mu(f, p, cfg);
      const double d = norm_sq_mu_discrete(f, p, cfg.n_steps);
      const double c = norm_sq_mu_stau(f, p);
      sig = std::max(sig, std::abs(mc.mean - d) / mc.std_err);
      bias = std::max(bias, std::abs(d - c) / c);
    }
  }
  const bool ok = sig <= 3.0 && bias <= 0.03;
  return {ok, residual("max sigma", sig, 3) + ", " +
                  residual("discretization bias", bias, 0.03)};
}

// 10. Large-s limit: kernel flattens at rate 3/4; matrix-entry norms
//     converge monotonically to the L2 norm over the group.
Check large_s_limit() {
  std::vector<double> s_grid, logs;
  double prev_dev = 1e300;
  bool dev_monotone = true;
  for (double s = 2.0; s <= 8.01; s += 1.0) {
    const double dev = rho_uniform_deviation_sup(s);
    if (dev >= prev_dev) dev_monotone = false;
    prev_dev = dev;
    s_grid.push_back(s);
    logs.push_back(std::log(dev));
  }
  const LineFit fit = fit_line(s_grid, logs);
  const double rate_dev = std::abs(fit.slope + 0.75);

  CounterRng rng(13, 39);
  int violations = 0;
  for (int n : {2, 3, 4}) {
    const MatrixEntryFn f{irrep(n), random_coeff(n, rng)};
    const double lim = norm_sq_l2k(f);
    double prev = 1e300;
    for (double s = 2.0; s <= 8.01; s += 1.0) {
      const double gap = std::abs(norm_sq_rho_s(f, s) - lim);
      if (gap >= prev && gap > 1e-12 * lim) ++violations;
      prev = gap;
    }
  }
  const bool ok = rate_dev <= 0.0375 && dev_monotone && violations == 0;
  return {ok, residual("rate dev from 3/4", rate_dev, 0.0375) +
                  (dev_monotone ? ", sup dev monotone" : ", sup dev NOT monotone") +
                  ", norm trend violations " + std::to_string(violations)};
}

// 11. Saturation of the covariance-corrected uncertainty bound.
Check uncertainty_saturation() {
  CounterRng rng(4, 35);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    WavePacket w;
    w.a = 2.0 * (2.0 * rng.uniform() - 1.0);
    w.b = 0.2 + 2.8 * rng.uniform();
    w.c = 2.0 * (2.0 * rng.uniform() - 1.0);
    w.d = 2.0 * (2.0 * rng.uniform() - 1.0);
    worst = std::max(worst, std::abs(uncertainty_defect(w).defect));
  }
  return {worst <= 1e-8, residual("max defect", worst, 1e-8)};
}

// 12. Parameter map round trips, lifted-operator equality, invariance and
//     trace formula of the metric.
Check parametrization() {
  CounterRng rng(1, 17);
  const auto grid = random_time_grid(20, 1);
  const LiftedOps ops2 = lifted_ops(irrep(2));
  const LiftedOps ops3 = lifted_ops(irrep(3));
  double rt = 0.0, lift = 0.0, ad = 0.0, tf = 0.0;
  for (const TimeParams& p : grid) {
    const TimeParams back = metric_to_time(time_to_metric(p));
    rt = std::max({rt, std::abs(back.s - p.s), std::abs(back.tau - p.tau)});

    const double a = 0.3 + 2.7 * rng.uniform();
    const double b = 0.3 + 2.7 * rng.uniform();
    const double c = 0.9 * (2.0 * rng.uniform() - 1.0) * std::sqrt(a * b);
    const MetricParams m{a, b, c};
    const MetricParams mb = time_to_metric(metric_to_time(m));
    rt = std::max({rt, std::abs(mb.a - m.a), std::abs(mb.b - m.b),
                   std::abs(mb.c - m.c)});

    lift = std::max({lift, lift_identity_residual(ops2, p),
                     lift_identity_residual(ops3, p)});
    ad = std::max(ad, ad_invariance_residual(m, 40, 7));
    for (int k = 0; k < 5; ++k) {
      const Matrix2 z = random_sl2(rng), w = random_sl2(rng);
      tf = std::max(tf, std::abs(inner_abc(z, w, m) - inner_abc_trace(z, w, m)));
    }
  }
  const bool ok = rt <= 1e-12 && lift <= 1e-12 && ad <= 1e-12 && tf <= 1e-12;
  return {ok, residual("roundtrip", rt, 1e-12) + ", " +
                  residual("lift equality", lift, 1e-12) + ", " +
                  residual("Ad invariance", ad, 1e-12) + ", " +
                  residual("trace form", tf, 1e-12)};
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    Check (*fn)();
  };
  const Entry entries[] = {
      {"polynomial transform isometry (d=1,2)", polynomial_isometry},
      {"pointwise bound constant vs quadrature", ratio_closed_form},
      {"density normalization and special case", mu_normalization},
      {"matrix-entry transform isometry (n=1..5)", matrix_entry_isometry},
      {"Laplacian decomposition and commutators", laplacian_decomposition},
      {"transform equals kernel convolution", transform_equivalence},
      {"heat kernel mass/semigroup/invariance", heat_kernel_axioms},
      {"averaged law depends only on Re(tau)", averaged_law_invariance},
      {"MC norms match exact discretized law", mc_isometry_cross_check},
      {"large-s flattening at rate 3/4", large_s_limit},
      {"uncertainty bound saturation", uncertainty_saturation},
      {"parameter maps and metric identities", parametrization},
  };

  int failures = 0;
  int idx = 0;
  for (const Entry& e : entries) {
    ++idx;
    const auto start = std::chrono::steady_clock::now();
    Check c;
    try {
      c = e.fn();
    } catch (const std::exception& ex) {
      c = {false, std::string("exception: ") + ex.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%2d/12] %s  %-42s %s (%.1fs)\n", idx, c.pass ? "PASS" : "FAIL",
                e.name, c.detail.c_str(), secs);
    std::fflush(stdout);
    if (!c.pass) ++failures;
  }
  if (failures) {
    std::printf("%d of 12 checks failed\n", failures);
    return 1;
  }
  std::printf("all 12 checks passed\n");
  return 0;
}
