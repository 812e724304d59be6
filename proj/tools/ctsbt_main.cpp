// Batch experiment driver. Every experiment is a subcommand that writes a
// JSON report plus a CSV of the swept grid and exits 0 (all gates pass),
// 1 (some gate failed) or 2 (invalid input).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ctsbt/euclidean.hpp"
#include "ctsbt/opcalc.hpp"
#include "ctsbt/params.hpp"
#include "ctsbt/polynomial.hpp"
#include "ctsbt/report.hpp"
#include "ctsbt/sampling.hpp"
#include "ctsbt/su2.hpp"

namespace {

using namespace ctsbt;

// ---------------------------------------------------------------------------
// Shared plumbing.

std::string default_out_dir() {
  const char* env = std::getenv("CTSBT_OUT_DIR");
  return env && *env ? env : ".";
}

std::map<std::string, std::string> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    if (!key.empty()) kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

// "a..b" (inclusive, step 1), "a..b:step", "a,b,c" or a single value.
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  try {
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
      const double lo = std::stod(text.substr(0, dots));
      std::string rest = text.substr(dots + 2);
      double step = 1.0;
      if (const auto colon = rest.find(':'); colon != std::string::npos) {
        step = std::stod(rest.substr(colon + 1));
        rest.erase(colon);
      }
      const double hi = std::stod(rest);
      if (step <= 0.0 || hi < lo) throw std::invalid_argument("empty range");
      for (double v = lo; v <= hi + 1e-9 * step; v += step) out.push_back(v);
    } else {
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    }
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse grid expression: " + text);
  }
  if (out.empty()) throw std::invalid_argument("empty grid: " + text);
  return out;
}

std::vector<int> parse_grid_int(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_grid(text)) {
    const int k = int(std::lround(v));
    if (std::abs(v - k) > 1e-9) throw std::invalid_argument("expected integers: " + text);
    out.push_back(k);
  }
  return out;
}

std::string fmt(double v) { return fmt_double(v); }
std::string fmt(int v) { return std::to_string(v); }

// Random valid time parameters: tau = s (1 + r e^{i phi}) with r < 1 stays
// strictly inside the ellipticity disk.
std::vector<TimeParams> random_time_grid(int count, std::uint64_t seed) {
  CounterRng rng(seed, 900);
  std::vector<TimeParams> grid;
  grid.reserve(count);
  while (int(grid.size()) < count) {
    const double s = 0.6 + 2.9 * rng.uniform();
    const double r = 0.85 * rng.uniform();
    const double ph = 2.0 * M_PI * rng.uniform();
    const TimeParams p{s, {s * (1.0 + r * std::cos(ph)), s * r * std::sin(ph)}};
    if (in_time_disk(p)) grid.push_back(p);
  }
  return grid;
}

MetricParams random_metric(CounterRng& rng) {
  const double a = 0.3 + 2.7 * rng.uniform();
  const double b = 0.3 + 2.7 * rng.uniform();
  const double c = 0.9 * (2.0 * rng.uniform() - 1.0) * std::sqrt(a * b);
  return {a, b, c};
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

// Reference grid for Monte Carlo cross-checks; all inside the disk, with
// moderate t so the weak error of the discretized flow stays small.
std::vector<TimeParams> mc_param_grid() {
  return {{1.0, {1.0, 0.0}}, {0.7, {0.9, 0.3}}, {1.4, {1.1, -0.6}}};
}

// ---------------------------------------------------------------------------
// params-roundtrip: parametrization round trips, operator decomposition,
// commutator suite, Ad-invariance and the trace formula of the metric.

struct ParamsOpts {
  int n_params = 20;
  std::uint64_t seed = 1;
  double tol = 1e-12;
  double probe_s = 0.0, probe_t = 0.0, probe_u = 0.0;
  bool has_probe = false;
};

Report run_params_roundtrip(const ParamsOpts& o) {
  Report rep;
  rep.experiment = "params-roundtrip";
  rep.inputs = {{"n_params", o.n_params}, {"seed", o.seed}, {"tol", o.tol}};
  if (o.has_probe) {
    const TimeParams probe{o.probe_s, {o.probe_t, o.probe_u}};
    require_elliptic(probe);
    rep.inputs["probe"] = {{"s", o.probe_s}, {"t", o.probe_t}, {"u", o.probe_u}};
  }
  rep.columns = {"s", "t", "u", "time_roundtrip", "metric_roundtrip",
                 "lift_identity_n2", "lift_identity_n3", "commutator_max",
                 "ad_invariance", "trace_form"};
  CounterRng rng(o.seed, 17);
  const auto grid = random_time_grid(o.n_params, o.seed);
  const LiftedOps ops2 = lifted_ops(irrep(2));
  const LiftedOps ops3 = lifted_ops(irrep(3));
  const LiftedOps pair2 = multi_lifted_ops(irrep(2), 2);
  double rt_time = 0, rt_metric = 0, lift_max = 0, comm_max = 0, ad_max = 0, tf_max = 0;
  for (const TimeParams& p : grid) {
    const MetricParams m = time_to_metric(p);
    const TimeParams back = metric_to_time(m);
    const double r_time = std::max(std::abs(back.s - p.s), std::abs(back.tau - p.tau));

    const MetricParams m2 = random_metric(rng);
    const MetricParams m2b = time_to_metric(metric_to_time(m2));
    const double r_metric = std::max({std::abs(m2b.a - m2.a), std::abs(m2b.b - m2.b),
                                      std::abs(m2b.c - m2.c)});

    const double l2 = lift_identity_residual(ops2, p);
    const double l3 = lift_identity_residual(ops3, p);

    // All four lifted operators commute pairwise (two tensor slots).
    double comm = 0.0;
    {
      const MatrixX lk = lift_laplacian_k(pair2);
      const MatrixX ls = lift_laplacian_stau(pair2, p);
      const MatrixX d2 = lift_dsq(pair2);
      const MatrixX db2 = lift_dbarsq(pair2);
      const std::vector<const MatrixX*> set{&lk, &ls, &d2, &db2};
      for (std::size_t i = 0; i < set.size(); ++i)
        for (std::size_t j = i + 1; j < set.size(); ++j)
          comm = std::max(comm, ((*set[i]) * (*set[j]) - (*set[j]) * (*set[i])).norm());
    }

    const double ad = ad_invariance_residual(m2, 40, o.seed + 7);
    double tf = 0.0;
    for (int k = 0; k < 5; ++k) {
      const Matrix2 z = random_sl2(rng), w = random_sl2(rng);
      tf = std::max(tf, std::abs(inner_abc(z, w, m2) - inner_abc_trace(z, w, m2)));
    }

    rt_time = std::max(rt_time, r_time);
    rt_metric = std::max(rt_metric, r_metric);
    lift_max = std::max({lift_max, l2, l3});
    comm_max = std::max(comm_max, comm);
    ad_max = std::max(ad_max, ad);
    tf_max = std::max(tf_max, tf);
    rep.add_row({fmt(p.s), fmt(p.t()), fmt(p.u()), fmt(r_time), fmt(r_metric),
                 fmt(l2), fmt(l3), fmt(comm), fmt(ad), fmt(tf)});
  }
  rep.add_metric("time_roundtrip_max", rt_time, o.tol);
  rep.add_metric("metric_roundtrip_max", rt_metric, o.tol);
  rep.add_metric("lift_identity_max", lift_max, o.tol);
  rep.add_metric("commutator_max", comm_max, 1e-10);
  rep.add_metric("ad_invariance_max", ad_max, o.tol);
  rep.add_metric("trace_form_max", tf_max, o.tol);
  return rep;
}

// ---------------------------------------------------------------------------
// euclid-isometry: || B f ||_{mu} == || f ||_{rho_s} for polynomials,
// both sides by exact Gaussian moments.

struct EuclidIsoOpts {
  std::string dims = "1,2";
  int n_params = 20;
  int max_deg = 6;
  int polys_per = 3;
  std::uint64_t seed = 2;
  double tol = 1e-10;
};

Report run_euclid_isometry(const EuclidIsoOpts& o) {
  Report rep;
  rep.experiment = "euclid-isometry";
  rep.inputs = {{"dims", o.dims},       {"n_params", o.n_params},
                {"max_deg", o.max_deg}, {"polys_per", o.polys_per},
                {"seed", o.seed},       {"tol", o.tol}};
  rep.columns = {"d", "s", "t", "u", "poly", "norm_rho", "norm_mu", "rel_dev"};
  const auto grid = random_time_grid(o.n_params, o.seed);
  CounterRng rng(o.seed, 33);
  double worst = 0.0;
  for (int d : parse_grid_int(o.dims)) {
    for (int j = 0; j < o.polys_per; ++j) {
      const Polynomial f = random_poly(d, o.max_deg, rng);
      for (const TimeParams& p : grid) {
        const double a = poly_norm_sq_rho_s(f, p.s);
        const double b = poly_norm_sq_mu(heat_apply_poly(f, p.tau), p);
        const double rel = std::abs(a - b) / a;
        worst = std::max(worst, rel);
        rep.add_row({fmt(d), fmt(p.s), fmt(p.t()), fmt(p.u()), fmt(j), fmt(a),
                     fmt(b), fmt(rel)});
      }
    }
  }
  rep.add_metric("isometry_max_rel_dev", worst, o.tol);
  return rep;
}

// ---------------------------------------------------------------------------
// euclid-ratio: pointwise bound constant, quadrature against closed form.

struct EuclidRatioOpts {
  int n_points = 10;
  int order = 64;
  std::uint64_t seed = 3;
  double tol = 1e-6;
};

Report run_euclid_ratio(const EuclidRatioOpts& o) {
  Report rep;
  rep.experiment = "euclid-ratio";
  rep.inputs = {{"n_points", o.n_points}, {"order", o.order}, {"seed", o.seed},
                {"tol", o.tol}};
  rep.columns = {"s", "t", "u", "re_z", "im_z", "quadrature", "closed_form", "rel_dev"};
  const auto grid = random_time_grid(o.n_points, o.seed);
  CounterRng rng(o.seed, 34);
  double worst = 0.0;
  for (const TimeParams& p : grid) {
    const double sc = 0.8 * std::sqrt(p.s);
    const ComplexPoint z{complexd(sc * (2.0 * rng.uniform() - 1.0),
                                  sc * (2.0 * rng.uniform() - 1.0))};
    const double quad = norm_ratio_quadrature(z, p, o.order);
    const double closed = norm_ratio_closed_form(z, p);
    const double rel = std::abs(quad - closed) / closed;
    worst = std::max(worst, rel);
    rep.add_row({fmt(p.s), fmt(p.t()), fmt(p.u()), fmt(z[0].real()),
                 fmt(z[0].imag()), fmt(quad), fmt(closed), fmt(rel)});
  }
  rep.add_metric("ratio_max_rel_dev", worst, o.tol);
  return rep;
}

// ---------------------------------------------------------------------------
// uncertainty: Schroedinger defect of complex-quadratic Gaussian packets.

struct UncertaintyOpts {
  int n_packets = 10;
  int order = 96;
  std::uint64_t seed = 4;
  double tol = 1e-8;
};

Report run_uncertainty(const UncertaintyOpts& o) {
  Report rep;
  rep.experiment = "uncertainty";
  rep.inputs = {{"n_packets", o.n_packets}, {"order", o.order}, {"seed", o.seed},
                {"tol", o.tol}};
  rep.columns = {"a", "b", "c", "d", "var_x", "var_p", "cov_xp", "defect"};
  CounterRng rng(o.seed, 35);
  double worst = 0.0;
  for (int i = 0; i < o.n_packets; ++i) {
    WavePacket w;
    w.a = 2.0 * (2.0 * rng.uniform() - 1.0);
    w.b = 0.2 + 2.8 * rng.uniform();
    w.c = 2.0 * (2.0 * rng.uniform() - 1.0);
    w.d = 2.0 * (2.0 * rng.uniform() - 1.0);
    const UncertaintyResult u = uncertainty_defect(w, o.order);
    worst = std::max(worst, std::abs(u.defect));
    rep.add_row({fmt(w.a), fmt(w.b), fmt(w.c), fmt(w.d), fmt(u.var_x),
                 fmt(u.var_p), fmt(u.cov_xp), fmt(u.defect)});
  }
  rep.add_metric("defect_max_abs", worst, o.tol);
  return rep;
}

// ---------------------------------------------------------------------------
// su2-isometry: exact matrix-entry isometry plus the Monte Carlo cross-check
// against the exact law of the discretized diffusion.

struct Su2IsoOpts {
  std::string n_range = "1..5";
  int n_coeffs = 5;
  int n_params = 20;
  std::string grid = "default";
  std::uint64_t seed = 7;
  double tol = 1e-10;
  bool skip_mc = false;
  long long n_paths = 20000;
  int n_steps = 200;
  double sigma_tol = 3.0;
  double bias_tol = 0.03;
};

Report run_su2_isometry(const Su2IsoOpts& o) {
  if (o.grid != "default")
    throw std::invalid_argument("unknown grid name: " + o.grid);
  Report rep;
  rep.experiment = "su2-isometry";
  rep.inputs = {{"n", o.n_range},     {"n_coeffs", o.n_coeffs},
                {"n_params", o.n_params}, {"grid", o.grid},
                {"seed", o.seed},     {"tol", o.tol},
                {"skip_mc", o.skip_mc}, {"n_paths", o.n_paths},
                {"n_steps", o.n_steps}, {"sigma_tol", o.sigma_tol},
                {"bias_tol", o.bias_tol}};
  rep.columns = {"phase", "n", "s", "t", "u", "reference", "value", "residual"};
  const auto grid = random_time_grid(o.n_params, o.seed);
  CounterRng rng(o.seed, 36);
  double worst = 0.0;
  for (int n : parse_grid_int(o.n_range)) {
    const Irrep r = irrep(n);
    for (int j = 0; j < o.n_coeffs; ++j) {
      const MatrixEntryFn f{r, random_coeff(n, rng)};
      for (const TimeParams& p : grid) {
        const double a = norm_sq_rho_s(f, p.s);
        const double b = norm_sq_mu_stau(transform_me(f, p.tau), p);
        const double rel = std::abs(a - b) / a;
        worst = std::max(worst, rel);
        rep.add_row({"exact", fmt(n), fmt(p.s), fmt(p.t()), fmt(p.u()), fmt(a),
                     fmt(b), fmt(rel)});
      }
    }
  }
  rep.add_metric("isometry_max_rel_dev", worst, o.tol);

  if (!o.skip_mc) {
    double sig_max = 0.0, bias_max = 0.0;
    int combo = 0;
    for (int n : {2, 3}) {
      const Irrep r = irrep(n);
      for (const TimeParams& p : mc_param_grid()) {
        const MatrixEntryFn f{r, random_coeff(n, rng)};
        SamplerConfig cfg;
        cfg.n_paths = o.n_paths;
        cfg.n_steps = o.n_steps;
        cfg.seed = o.seed + 100 + combo++;
        const MCResult mc = mc_norm_sq_mu(f, p, cfg);
        const double disc = norm_sq_mu_discrete(f, p, o.n_steps);
        const double cont = norm_sq_mu_stau(f, p);
        const double sig = std::abs(mc.mean - disc) / mc.std_err;
        const double bias = std::abs(disc - cont) / cont;
        sig_max = std::max(sig_max, sig);
        bias_max = std::max(bias_max, bias);
        rep.add_row({"mc", fmt(n), fmt(p.s), fmt(p.t()), fmt(p.u()), fmt(disc),
                     fmt(mc.mean), fmt(sig)});
      }
    }
    rep.add_metric("mc_max_sigma_dev", sig_max, o.sigma_tol);
    rep.add_metric("discrete_bias_max_rel", bias_max, o.bias_tol);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// transform-equiv: heat-operator transform of matrix entries equals the
// convolution against the complex-time kernel, by Haar quadrature.

struct TransformOpts {
  std::string n_range = "1..3";
  int n_points = 5;
  int order = 48;
  double tau_imag = 0.5;
  std::uint64_t seed = 8;
  double tol = 1e-7;
};

Report run_transform_equiv(const TransformOpts& o) {
  Report rep;
  rep.experiment = "transform-equiv";
  rep.inputs = {{"n", o.n_range},   {"n_points", o.n_points}, {"order", o.order},
                {"tau_imag", o.tau_imag}, {"seed", o.seed},    {"tol", o.tol}};
  rep.columns = {"n", "re_tau", "im_tau", "point", "re_exact", "im_exact",
                 "abs_dev", "rel_dev"};
  CounterRng rng(o.seed, 37);
  std::vector<Matrix2> points;
  for (int i = 0; i < o.n_points; ++i) {
    Matrix2 w = random_sl2(rng);
    w *= 0.5 * rng.uniform() / w.norm();
    points.push_back(exp_traceless_2x2(w));
  }
  const std::vector<complexd> taus{{1.0, 0.0}, {1.0, o.tau_imag}, {1.0, -o.tau_imag}};
  double worst = 0.0;
  for (int n : parse_grid_int(o.n_range)) {
    const MatrixEntryFn f{irrep(n), random_coeff(n, rng)};
    for (complexd tau : taus) {
      const MatrixEntryFn bf = transform_me(f, tau);
      for (std::size_t i = 0; i < points.size(); ++i) {
        const complexd exact = bf.eval(points[i]);
        const complexd quad = transform_quadrature_su2(f, tau, points[i], o.order);
        const double dev = std::abs(quad - exact);
        const double rel = dev / std::max(std::abs(exact), 1e-12);
        worst = std::max(worst, rel);
        rep.add_row({fmt(n), fmt(tau.real()), fmt(tau.imag()), fmt(int(i)),
                     fmt(exact.real()), fmt(exact.imag()), fmt(dev), fmt(rel)});
      }
    }
  }
  rep.add_metric("equivalence_max_rel_dev", worst, o.tol);
  return rep;
}

// ---------------------------------------------------------------------------
// heatk-properties: normalization and special case of the Euclidean density;
// mass, semigroup, inversion/conjugation invariance, approximate identity and
// real-time continuation of the group kernel.

struct HeatkOpts {
  std::uint64_t seed = 9;
  double tol_mass = 1e-8;
  double tol_special = 1e-14;
  double tol_semigroup = 1e-6;
  double tol_invariance = 1e-10;
  double tol_outside = 1e-3;
};

double mu_mass_quadrature(const TimeParams& p, int d, int order) {
  const double hx = 7.0 * std::sqrt(p.s - p.t() / 2.0);
  const double hy = 7.0 * std::sqrt(p.t() / 2.0);
  std::vector<Quad1D> axes;
  for (int j = 0; j < d; ++j) {
    axes.push_back(gauss_legendre_on(order, -hx, hx));
    axes.push_back(gauss_legendre_on(order, -hy, hy));
  }
  return tensor_integrate(axes, [&](const std::vector<double>& v) {
    ComplexPoint z(d);
    for (int j = 0; j < d; ++j) z[j] = complexd(v[2 * j], v[2 * j + 1]);
    return mu_density(z, p);
  });
}

Report run_heatk_properties(const HeatkOpts& o) {
  Report rep;
  rep.experiment = "heatk-properties";
  rep.inputs = {{"seed", o.seed},
                {"tol_mass", o.tol_mass},
                {"tol_special", o.tol_special},
                {"tol_semigroup", o.tol_semigroup},
                {"tol_invariance", o.tol_invariance},
                {"tol_outside", o.tol_outside}};
  rep.columns = {"check", "param", "point", "value", "reference", "abs_dev"};
  CounterRng rng(o.seed, 38);

  // Euclidean normalization, d = 1 and 2.
  double mass_dev = 0.0;
  {
    const TimeParams p{1.3, {0.9, 0.5}};
    const double m1 = mu_mass_quadrature(p, 1, 64);
    const double m2 = mu_mass_quadrature(p, 2, 48);
    mass_dev = std::max(std::abs(m1 - 1.0), std::abs(m2 - 1.0));
    rep.add_row({"mu_mass", "d=1", "", fmt(m1), "1", fmt(std::abs(m1 - 1.0))});
    rep.add_row({"mu_mass", "d=2", "", fmt(m2), "1", fmt(std::abs(m2 - 1.0))});
  }
  rep.add_metric("mu_mass_dev", mass_dev, o.tol_mass);

  // Special case s = t, u = 0: density is (pi t)^{-d} exp(-|z|^2 / t).
  double special_dev = 0.0;
  {
    const double t = 0.8;
    const TimeParams p{t, {t, 0.0}};
    for (double x : {-1.5, -0.4, 0.3, 1.2}) {
      for (double y : {-1.1, 0.2, 0.9}) {
        const ComplexPoint z{complexd(x, y)};
        const double got = mu_density(z, p);
        const double want = std::exp(-(x * x + y * y) / t) / (M_PI * t);
        const double rel = std::abs(got - want) / want;
        special_dev = std::max(special_dev, rel);
        rep.add_row({"mu_special", "t=0.8", fmt(x) + ";" + fmt(y), fmt(got),
                     fmt(want), fmt(rel)});
      }
    }
  }
  rep.add_metric("mu_special_max_rel_dev", special_dev, o.tol_special);

  // Group kernel mass.
  double kmass_dev = 0.0;
  for (double t : {0.5, 1.0, 4.0}) {
    const double m = class_integrate(
        [&](double th) { return heat_kernel_su2(t, k_theta(th)); }, 64);
    kmass_dev = std::max(kmass_dev, std::abs(m - 1.0));
    rep.add_row({"kernel_mass", "t=" + fmt(t), "", fmt(m), "1",
                 fmt(std::abs(m - 1.0))});
  }
  rep.add_metric("kernel_mass_dev", kmass_dev, o.tol_mass);

  // Semigroup by Haar convolution.
  double semi_dev = 0.0;
  {
    const double t1 = 0.25, t2 = 0.35;
    const HaarRule haar = haar_quadrature(24);
    for (double th : {0.4, 1.2, 2.2}) {
      const Matrix2 k = k_theta(th);
      double conv = 0.0;
      haar.for_each([&](const Matrix2& g, double w) {
        conv += w * heat_kernel_su2(t1, k * g.adjoint()) * heat_kernel_su2(t2, g);
      });
      const double want = heat_kernel_su2(t1 + t2, k);
      const double rel = std::abs(conv - want) / want;
      semi_dev = std::max(semi_dev, rel);
      rep.add_row({"semigroup", "t=0.25+0.35", "theta=" + fmt(th), fmt(conv),
                   fmt(want), fmt(rel)});
    }
  }
  rep.add_metric("semigroup_max_rel_dev", semi_dev, o.tol_semigroup);

  // Inversion and conjugation invariance.
  double inv_dev = 0.0;
  for (int i = 0; i < 8; ++i) {
    const Matrix2 k = haar_sample(rng);
    const Matrix2 g = haar_sample(rng);
    const double t = 0.3 + rng.uniform();
    const double base = heat_kernel_su2(t, k);
    const double d1 = std::abs(heat_kernel_su2(t, Matrix2(k.adjoint())) - base);
    const double d2 = std::abs(heat_kernel_su2(t, Matrix2(g * k * g.adjoint())) - base);
    inv_dev = std::max({inv_dev, d1, d2});
    rep.add_row({"invariance", "t=" + fmt(t), fmt(i), fmt(base), fmt(base),
                 fmt(std::max(d1, d2))});
  }
  rep.add_metric("invariance_max_dev", inv_dev, o.tol_invariance);

  // Approximate identity: mass outside theta > 0.5 decreasing as t drops.
  {
    const double delta = 0.5;
    double prev = 1.0;
    int violations = 0;
    double last = 1.0;
    for (double t : {0.5, 0.1, 0.02}) {
      const double outside = class_integrate(
          [&](double th) { return heat_kernel_su2(t, k_theta(th)); }, 64, delta, M_PI);
      if (outside >= prev) ++violations;
      prev = outside;
      last = outside;
      rep.add_row({"approx_identity", "t=" + fmt(t), "delta=0.5", fmt(outside),
                   "decreasing", ""});
    }
    rep.add_metric("approx_identity_violations", double(violations), 0.0);
    rep.add_metric("approx_identity_final_mass", last, o.tol_outside);
  }

  // Complex-time series at real tau reproduces the real-time kernel.
  double cont_dev = 0.0;
  for (int i = 0; i < 6; ++i) {
    const Matrix2 k = haar_sample(rng);
    const double t = 0.3 + rng.uniform();
    const complexd v = heat_kernel_complex({t, 0.0}, k).value;
    const double dev = std::max(std::abs(v.real() - heat_kernel_su2(t, k)),
                                std::abs(v.imag()));
    cont_dev = std::max(cont_dev, dev);
    rep.add_row({"continuation", "t=" + fmt(t), fmt(i), fmt(v.real()),
                 fmt(heat_kernel_su2(t, k)), fmt(dev)});
  }
  rep.add_metric("continuation_max_dev", cont_dev, 1e-12);
  return rep;
}

// ---------------------------------------------------------------------------
// nu-invariance: the averaged law depends only on t = Re(tau). Monte Carlo
// means across (s,u) variants must agree pairwise and match the exact law of
// the discretized flow; the continuum values agree exactly.

struct NuOpts {
  double t = 0.9;
  long long n_paths = 200000;
  int n_steps = 200;
  std::uint64_t seed = 11;
  double sigma_tol = 3.0;
  double exact_tol = 1e-9;
  double bias_tol = 0.02;
};

Report run_nu_invariance(const NuOpts& o) {
  Report rep;
  rep.experiment = "nu-invariance";
  rep.inputs = {{"t", o.t},           {"n_paths", o.n_paths},
                {"n_steps", o.n_steps}, {"seed", o.seed},
                {"sigma_tol", o.sigma_tol}, {"exact_tol", o.exact_tol},
                {"bias_tol", o.bias_tol}};
  rep.columns = {"s", "t", "u", "mc_mean", "mc_stderr", "discrete_exact",
                 "continuum", "sigma_dev"};
  const double su[3][2] = {{1.0, 0.0}, {1.4, -0.6}, {2.0, 1.2}};
  std::vector<MCResult> mc;
  std::vector<double> disc, cont;
  for (int i = 0; i < 3; ++i) {
    const TimeParams p{su[i][0], {o.t, su[i][1]}};
    require_elliptic(p);
    SamplerConfig cfg;
    cfg.n_paths = o.n_paths;
    cfg.n_steps = o.n_steps;
    cfg.seed = o.seed + i;
    mc.push_back(mc_trace_zzstar(p, cfg));
    disc.push_back(nu_moment_discrete(p, 1, o.n_steps));
    cont.push_back(nu_moment_exact(p, 1));
    const double sig = std::abs(mc[i].mean - disc[i]) / mc[i].std_err;
    rep.add_row({fmt(p.s), fmt(o.t), fmt(p.u()), fmt(mc[i].mean),
                 fmt(mc[i].std_err), fmt(disc[i]), fmt(cont[i]), fmt(sig)});
  }
  double pair_sig = 0.0, oracle_sig = 0.0, spread = 0.0, bias = 0.0;
  for (int i = 0; i < 3; ++i) {
    oracle_sig = std::max(oracle_sig, std::abs(mc[i].mean - disc[i]) / mc[i].std_err);
    spread = std::max(spread, std::abs(cont[i] - cont[0]) / cont[0]);
    bias = std::max(bias, std::abs(disc[i] - cont[i]) / cont[i]);
    for (int j = i + 1; j < 3; ++j) {
      const double se = std::hypot(mc[i].std_err, mc[j].std_err);
      pair_sig = std::max(pair_sig, std::abs(mc[i].mean - mc[j].mean) / se);
    }
  }
  const double closed = 2.0 * std::exp(1.5 * o.t);
  double closed_dev = 0.0;
  for (double c : cont) closed_dev = std::max(closed_dev, std::abs(c - closed) / closed);
  rep.add_metric("mc_pairwise_max_sigma", pair_sig, o.sigma_tol);
  rep.add_metric("mc_vs_discrete_max_sigma", oracle_sig, o.sigma_tol);
  rep.add_metric("continuum_spread_rel", spread, o.exact_tol);
  rep.add_metric("closed_form_max_rel_dev", closed_dev, o.exact_tol);
  rep.add_metric("discrete_bias_max_rel", bias, o.bias_tol);
  return rep;
}

// ---------------------------------------------------------------------------
// large-s: the group heat kernel flattens at rate 3/4, and rho_s-norms of
// matrix entries decrease monotonically to the L2(K) norm.

struct LargeSOpts {
  std::string s_range = "2..8";
  int n_grid = 512;
  std::uint64_t seed = 13;
  double rate_tol = 0.0375;
  double band_tol = 0.35;
  double limit_tol = 1e-5;
};

Report run_large_s(const LargeSOpts& o) {
  Report rep;
  rep.experiment = "large-s";
  rep.inputs = {{"s", o.s_range},       {"n_grid", o.n_grid},
                {"seed", o.seed},       {"rate_tol", o.rate_tol},
                {"band_tol", o.band_tol}, {"limit_tol", o.limit_tol}};
  rep.columns = {"s", "sup_dev", "model", "norm_n2", "norm_n3", "norm_n4"};
  const std::vector<double> s_grid = parse_grid(o.s_range);

  std::vector<double> devs;
  double band_dev = 0.0;
  int flat_violations = 0;

  CounterRng rng(o.seed, 39);
  std::vector<MatrixEntryFn> entries;
  for (int n : {2, 3, 4}) entries.push_back({irrep(n), random_coeff(n, rng)});
  std::vector<std::vector<double>> norms(entries.size());

  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    const double s = s_grid[i];
    const double dev = rho_uniform_deviation_sup(s, o.n_grid);
    devs.push_back(dev);
    if (i > 0 && devs[i] >= devs[i - 1]) ++flat_violations;
    const double model = 4.0 * std::exp(-0.75 * s);
    band_dev = std::max(band_dev, std::abs(dev / model - 1.0));
    std::vector<std::string> row{fmt(s), fmt(dev), fmt(model)};
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const double ns = norm_sq_rho_s(entries[e], s);
      norms[e].push_back(ns);
      row.push_back(fmt(ns));
    }
    rep.rows.push_back(row);
  }

  std::vector<double> log_devs;
  for (double d : devs) log_devs.push_back(std::log(d));
  const LineFit fit = fit_line(s_grid, log_devs);
  rep.add_metric("rate_dev_from_0.75", std::abs(fit.slope + 0.75), o.rate_tol);
  rep.add_metric("sup_dev_monotone_violations", double(flat_violations), 0.0);
  rep.add_metric("amplitude_band_max_rel", band_dev, o.band_tol);

  // Norm trend: |norm - L2(K) limit| decreases monotonically to zero. The
  // side of the approach depends on the entry (off-diagonal coefficients
  // converge from below), so the gate is on the gap, down to rounding.
  int norm_violations = 0;
  double gap = 0.0;
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const double lim = norm_sq_l2k(entries[e]);
    double prev = std::abs(norms[e].front() - lim);
    for (std::size_t i = 1; i < norms[e].size(); ++i) {
      const double g = std::abs(norms[e][i] - lim);
      if (g >= prev && g > 1e-12 * lim) ++norm_violations;
      prev = g;
    }
    gap = std::max(gap, std::abs(norms[e].back() - lim) / lim);
  }
  rep.add_metric("norm_trend_violations", double(norm_violations), 0.0);
  rep.add_metric("norm_final_rel_gap", gap, o.limit_tol);
  return rep;
}

}  // namespace

// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
  try {
    // Flat key=value config file; flags override file values.
    std::string config_path;
    for (int i = 1; i < argc; ++i) {
      const std::string a = argv[i];
      if (a == "--config" && i + 1 < argc) config_path = argv[i + 1];
      else if (a.rfind("--config=", 0) == 0) config_path = a.substr(9);
    }
    const auto cfg = config_path.empty() ? std::map<std::string, std::string>{}
                                         : load_config(config_path);
    const auto preset = [&cfg](const std::string& key, auto& var) {
      const auto it = cfg.find(key);
      if (it == cfg.end()) return;
      std::istringstream ss(it->second);
      ss >> var;
      if (ss.fail()) throw std::invalid_argument("bad config value: " + key + "=" + it->second);
    };

    CLI::App app{"complex-time transform experiments"};
    app.require_subcommand(1);
    std::string out_dir = default_out_dir();
    preset("out", out_dir);

    int exit_code = 0;
    const auto finish = [&](const Report& rep) {
      rep.write_files(out_dir);
      std::cout << rep.to_json().dump(2) << std::endl;
      if (!rep.pass()) exit_code = 1;
    };

    // The config file was already consumed by the pre-scan; this option just
    // keeps the flag legal wherever it appears. The sink must outlive parse().
    std::string config_sink;
    const auto common = [&](CLI::App* cmd) {
      cmd->add_option("--out", out_dir, "report directory (default: $CTSBT_OUT_DIR or .)");
      cmd->add_option("--config", config_sink, "flat key=value config file");
    };

    {
      auto o = std::make_shared<ParamsOpts>();
      preset("n-params", o->n_params);
      preset("seed", o->seed);
      preset("tol", o->tol);
      CLI::App* c = app.add_subcommand(
          "params-roundtrip",
          "parametrization round trips, operator decomposition, commutators");
      common(c);
      c->add_option("--n-params", o->n_params, "number of random parameter points");
      c->add_option("--seed", o->seed, "rng seed");
      c->add_option("--tol", o->tol, "residual tolerance");
      auto* ps = c->add_option("--s", o->probe_s, "probe: base time s");
      auto* pt = c->add_option("--t", o->probe_t, "probe: Re tau");
      c->add_option("--u", o->probe_u, "probe: Im tau");
      pt->needs(ps);
      ps->needs(pt);
      c->callback([o, ps, &finish] {
        o->has_probe = ps->count() > 0;
        finish(run_params_roundtrip(*o));
      });
    }
    {
      auto o = std::make_shared<EuclidIsoOpts>();
      preset("dims", o->dims);
      preset("n-params", o->n_params);
      preset("max-deg", o->max_deg);
      preset("polys-per", o->polys_per);
      preset("seed", o->seed);
      preset("tol", o->tol);
      CLI::App* c = app.add_subcommand("euclid-isometry",
                                       "polynomial isometry by exact moments");
      common(c);
      c->add_option("--dims", o->dims, "dimension list, e.g. 1,2");
      c->add_option("--n-params", o->n_params, "number of (s,tau) points");
      c->add_option("--max-deg", o->max_deg, "max polynomial degree");
      c->add_option("--polys-per", o->polys_per, "random polynomials per dimension");
      c->add_option("--seed", o->seed, "rng seed");
      c->add_option("--tol", o->tol, "relative tolerance");
      c->callback([o, &finish] { finish(run_euclid_isometry(*o)); });
    }
    {
      auto o = std::make_shared<EuclidRatioOpts>();
      preset("n-points", o->n_points);
      preset("order", o->order);
      preset("seed", o->seed);
      preset("tol", o->tol);
      CLI::App* c = app.add_subcommand("euclid-ratio",
                                       "pointwise bound constant vs quadrature");
      common(c);
      c->add_option("--n-points", o->n_points, "number of (z,s,tau) points");
      c->add_option("--order", o->order, "quadrature order");
      c->add_option("--seed", o->seed, "rng seed");
      c->add_option("--tol", o->tol, "relative tolerance");
      c->callback([o, &finish] { finish(run_euclid_ratio(*o)); });
    }
    {
      auto o = std::make_shared<UncertaintyOpts>();
      preset("n-packets", o->n_packets);
      preset("order", o->order);
      preset("seed", o->seed);
      preset("tol", o->tol);
      CLI::App* c = app.add_subcommand("uncertainty",
                                       "saturation defect of Gaussian packets");
      common(c);
      c->add_option("--n-packets", o->n_packets, "number of random packets");
      c->add_option("--order", o->order, "quadrature order");
      c->add_option("--seed", o->seed, "rng seed");
      c->add_option("--tol", o->tol, "absolute tolerance");
      c->callback([o, &finish] { finish(run_uncertainty(*o)); });
    }
    {
      auto o = std::make_shared<Su2IsoOpts>();
      preset("n", o->n_range);
      preset("n-coeffs", o->n_coeffs);
      preset("n-params", o->n_params);
      preset("grid", o->grid);
      preset("seed", o->seed);
      preset("tol", o->tol);
      preset("n-paths", o->n_paths);
      preset("n-steps", o->n_steps);
      CLI::App* c = app.add_subcommand("su2-isometry",
                                       "matrix-entry isometry, exact and MC");
      common(c);
      c->add_option("--n", o->n_range, "irrep dimensions, e.g. 2..5");
      c->add_option("--n-coeffs", o->n_coeffs, "random coefficient matrices per n");
      c->add_option("--n-params", o->n_params, "number of (s,tau) points");
      c->add_option("--grid", o->grid, "parameter grid name");
      c->add_option("--seed", o->seed, "rng seed");
      c->add_option("--tol", o->tol, "relative tolerance (exact phase)");
      c->add_flag("--skip-mc", o->skip_mc, "skip the Monte Carlo phase");
      c->add_option("--n-paths", o->n_paths, "MC paths per combination");
      c->add_option("--n-steps", o->n_steps, "MC steps per path");
      c->callback([o, &finish] { finish(run_su2_isometry(*o)); });
    }
    {
      auto o = std::make_shared<TransformOpts>();
      preset("n", o->n_range);
      preset("n-points", o->n_points);
      preset("order", o->order);
      preset("seed", o->seed);
      preset("tol", o->tol);
      CLI::App* c = app.add_subcommand(
          "transform-equiv", "heat-operator transform vs kernel convolution");
      common(c);
      c->add_option("--n", o->n_range, "irrep dimensions");
      c->add_option("--n-points", o->n_points, "evaluation points");
      c->add_option("--order", o->order, "Haar quadrature order");
      c->add_option("--tau-imag", o->tau_imag, "imaginary part of complex tau");
      c->add_option("--seed", o->seed, "rng seed");
      c->add_option("--tol", o->tol, "relative tolerance");
      c->callback([o, &finish] { finish(run_transform_equiv(*o)); });
    }
    {
      auto o = std::make_shared<HeatkOpts>();
      preset("seed", o->seed);
      CLI::App* c = app.add_subcommand(
          "heatk-properties", "kernel mass, semigroup, invariance, limits");
      common(c);
      c->add_option("--seed", o->seed, "rng seed");
      c->add_option("--tol-mass", o->tol_mass, "mass tolerance");
      c->add_option("--tol-semigroup", o->tol_semigroup, "semigroup tolerance");
      c->add_option("--tol-invariance", o->tol_invariance, "invariance tolerance");
      c->callback([o, &finish] { finish(run_heatk_properties(*o)); });
    }
    {
      auto o = std::make_shared<NuOpts>();
      preset("t", o->t);
      preset("n-paths", o->n_paths);
      preset("n-steps", o->n_steps);
      preset("seed", o->seed);
      CLI::App* c = app.add_subcommand(
          "nu-invariance", "averaged law depends only on Re(tau)");
      common(c);
      c->add_option("--t", o->t, "common real part of tau");
      c->add_option("--n-paths", o->n_paths, "MC paths per variant");
      c->add_option("--n-steps", o->n_steps, "steps per path");
      c->add_option("--seed", o->seed, "rng seed");
      c->add_option("--sigma-tol", o->sigma_tol, "MC agreement in stderr units");
      c->callback([o, &finish] { finish(run_nu_invariance(*o)); });
    }
    {
      auto o = std::make_shared<LargeSOpts>();
      preset("s", o->s_range);
      preset("n-grid", o->n_grid);
      preset("seed", o->seed);
      CLI::App* c = app.add_subcommand(
          "large-s", "flattening rate and norm limit for large s");
      common(c);
      c->add_option("--s", o->s_range, "s grid, e.g. 2..8");
      c->add_option("--n-grid", o->n_grid, "sup-norm sampling grid");
      c->add_option("--seed", o->seed, "rng seed");
      c->add_option("--rate-tol", o->rate_tol, "allowed deviation of the fitted rate");
      c->callback([o, &finish] { finish(run_large_s(*o)); });
    }

    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? 0 : 2;
    }
    return exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
