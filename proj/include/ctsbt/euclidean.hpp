#pragma once

#include "ctsbt/params.hpp"
#include "ctsbt/polynomial.hpp"
#include "ctsbt/quadrature.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace ctsbt {

using ComplexPoint = std::vector<complexd>;

// Gaussian heat density on R^d with variance parameter s.
inline double rho_s_density(const std::vector<double>& x, double s) {
  if (s <= 0.0) throw std::domain_error("s must be positive");
  double q = 0.0;
  for (double v : x) q += v * v;
  return std::pow(2.0 * M_PI * s, -0.5 * double(x.size())) * std::exp(-q / (2.0 * s));
}

// Analytically continued heat density (2 pi tau)^{-d/2} exp(-z.z / 2 tau)
// with z.z the bilinear square sum; principal branch of the prefactor.
inline complexd rho_complex(complexd tau, const ComplexPoint& z) {
  if (tau.real() <= 0.0) throw std::domain_error("Re(tau) must be positive");
  complexd q{};
  for (complexd v : z) q += v * v;
  const double d = double(z.size());
  return std::exp(-0.5 * d * std::log(2.0 * M_PI * tau) - q / (2.0 * tau));
}

// Density of the transform-side Gaussian measure on C^d = R^d x R^d:
//   (2 pi sqrt(alpha))^{-d} exp(-[(t/2)|x|^2 + (s-t/2)|y|^2 + u x.y] / 2 alpha)
// whose coordinate pairs (x_j, y_j) have covariance
// [[s - t/2, -u/2], [-u/2, t/2]].
inline double mu_density(const ComplexPoint& z, const TimeParams& p) {
  require_elliptic(p);
  const double alpha = ellipticity_alpha(p);
  const double t = p.t(), u = p.u();
  double q = 0.0;
  for (complexd v : z) {
    const double x = v.real(), y = v.imag();
    q += (t / 2.0) * x * x + (p.s - t / 2.0) * y * y + u * x * y;
  }
  return std::pow(2.0 * M_PI * std::sqrt(alpha), -double(z.size())) *
         std::exp(-q / (2.0 * alpha));
}

// Closed form of int |rho_C(tau, z - x)|^2 / rho_s(x) dx:
//   (s / 2 sqrt(alpha))^d exp(+[(t/2)|xi|^2 + (s-t/2)|eta|^2 + u xi.eta]/2alpha)
// for z = xi + i eta. Finite exactly on the ellipticity disk. This is the
// sharp constant in the pointwise bound |F(z)|^2 <= ratio(z) ||F||^2:
// equality holds for F = 1 at z = 0.
inline double norm_ratio_closed_form(const ComplexPoint& z, const TimeParams& p) {
  require_elliptic(p);
  const double alpha = ellipticity_alpha(p);
  const double t = p.t(), u = p.u();
  double q = 0.0;
  for (complexd v : z) {
    const double xi = v.real(), eta = v.imag();
    q += (t / 2.0) * xi * xi + (p.s - t / 2.0) * eta * eta + u * xi * eta;
  }
  return std::pow(0.5 * p.s / std::sqrt(alpha), double(z.size())) *
         std::exp(q / (2.0 * alpha));
}

// The same integral by tensor Gauss-Legendre on a box centered at the
// stationary point of the integrand's Gaussian envelope.
inline double norm_ratio_quadrature(const ComplexPoint& z, const TimeParams& p,
                                    int order = 64, double half_width_sigmas = 8.0) {
  require_elliptic(p);
  const double alpha = ellipticity_alpha(p);
  const double t = p.t(), u = p.u();
  const double abs_tau_sq = std::norm(p.tau);
  const double sigma = 0.5 * std::sqrt(p.s * abs_tau_sq / alpha);
  const std::size_t d = z.size();
  std::vector<Quad1D> axes;
  axes.reserve(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double center =
        p.s * (t * z[j].real() + u * z[j].imag()) / (2.0 * alpha);
    axes.push_back(gauss_legendre_on(order, center - half_width_sigmas * sigma,
                                     center + half_width_sigmas * sigma));
  }
  // The ratio is assembled in log space: its factors individually under-
  // and overflow near the box edges even though the product is a bump.
  return tensor_integrate(axes, [&](const std::vector<double>& x) {
    complexd q{};
    double xsq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const complexd w = z[j] - x[j];
      q += w * w;
      xsq += x[j] * x[j];
    }
    const double log_num = -double(d) * std::log(2.0 * M_PI * std::abs(p.tau)) -
                           (q / p.tau).real();
    const double log_den = -0.5 * double(d) * std::log(2.0 * M_PI * p.s) -
                           xsq / (2.0 * p.s);
    return std::exp(log_num - log_den);
  });
}

struct QuadResult {
  complexd value{};
  double err_estimate = 0.0;
};

// Integral transform (B f)(z) = int rho_C(tau, z - y) f(y) dy for a
// polynomial f, via Gauss-Legendre boxes following the Gaussian envelope
// of |rho_C|. The error estimate compares against a coarser rule.
inline QuadResult transform_quadrature(const Polynomial& f, const TimeParams& p,
                                       const ComplexPoint& z, int order = 64,
                                       double half_width_sigmas = 8.0) {
  require_elliptic(p);
  const double t = p.t(), u = p.u();
  const std::size_t d = f.dim();
  if (z.size() != d) throw std::invalid_argument("point dimension mismatch");
  const double sigma = std::abs(p.tau) / std::sqrt(t);
  const auto run = [&](int ord) {
    std::vector<Quad1D> axes;
    axes.reserve(d);
    for (std::size_t j = 0; j < d; ++j) {
      const double center = z[j].real() + (u / t) * z[j].imag();
      axes.push_back(gauss_legendre_on(ord, center - half_width_sigmas * sigma,
                                       center + half_width_sigmas * sigma));
    }
    return tensor_integrate(axes, [&](const std::vector<double>& y) {
      ComplexPoint w(d);
      for (std::size_t j = 0; j < d; ++j) w[j] = z[j] - y[j];
      return rho_complex(p.tau, w) * f.eval_real(y);
    });
  };
  QuadResult out;
  out.value = run(order);
  const complexd coarse = run(std::max(8, (2 * order) / 3));
  out.err_estimate = std::abs(out.value - coarse);
  return out;
}

// Transform of a polynomial in closed form: holomorphic extension of the
// terminating heat series applied to f.
inline complexd transform_exact(const Polynomial& f, const TimeParams& p,
                                const ComplexPoint& z) {
  require_elliptic(p);
  return heat_apply_poly(f, p.tau).eval(z);
}

// Gaussian wave packet exp(i a x^2 - b (x - c)^2 + i d x), b > 0: the
// minimizers of the covariance-corrected uncertainty product.
struct WavePacket {
  double a = 0.0;
  double b = 0.5;
  double c = 0.0;
  double d = 0.0;
};

struct UncertaintyResult {
  double var_x = 0.0;
  double var_p = 0.0;
  double cov_xp = 0.0;
  // defect = var_x var_p - (1/4 + cov^2); zero exactly at saturation.
  double defect = 0.0;
};

inline UncertaintyResult uncertainty_defect(const WavePacket& w, int order = 96,
                                            double half_width_sigmas = 12.0) {
  if (w.b <= 0.0) throw std::domain_error("wave packet requires b > 0");
  const double sigma = 0.5 / std::sqrt(w.b);
  const Quad1D rule = gauss_legendre_on(order, w.c - half_width_sigmas * sigma,
                                        w.c + half_width_sigmas * sigma);
  const complexd iunit{0.0, 1.0};
  const auto chi = [&](double x) {
    return std::exp(iunit * w.a * x * x - w.b * (x - w.c) * (x - w.c) +
                    iunit * w.d * x);
  };
  const auto dchi = [&](double x) {
    return (2.0 * iunit * w.a * x - 2.0 * w.b * (x - w.c) + iunit * w.d) * chi(x);
  };
  double n = 0.0, ex = 0.0, ex2 = 0.0, ep2 = 0.0;
  complexd ep{}, exp_sym{};
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double x = rule.nodes[i];
    const double wt = rule.weights[i];
    const complexd c = chi(x);
    const complexd dc = dchi(x);
    const double dens = std::norm(c);
    n += wt * dens;
    ex += wt * x * dens;
    ex2 += wt * x * x * dens;
    ep += wt * std::conj(c) * (-iunit) * dc;
    ep2 += wt * std::norm(dc);
    exp_sym += wt * x * std::conj(c) * (-iunit) * dc;
  }
  const double mx = ex / n;
  const double mp = ep.real() / n;
  UncertaintyResult out;
  out.var_x = ex2 / n - mx * mx;
  out.var_p = ep2 / n - mp * mp;
  out.cov_xp = exp_sym.real() / n - mx * mp;
  out.defect = out.var_x * out.var_p - (0.25 + out.cov_xp * out.cov_xp);
  return out;
}

}  // namespace ctsbt
