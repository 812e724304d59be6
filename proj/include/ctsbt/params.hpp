#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace ctsbt {

using complexd = std::complex<double>;

// Diffusion-time pair (s, tau): s is the real variance parameter of the
// source Gaussian, tau = t + iu the complex time of the transform.
struct TimeParams {
  double s = 1.0;
  complexd tau{1.0, 0.0};

  double t() const { return tau.real(); }
  double u() const { return tau.imag(); }
};

// Ellipticity determinant alpha = det [[s - t/2, -u/2], [-u/2, t/2]]
//                                = (2 s t - t^2 - u^2) / 4.
// alpha > 0 exactly when tau lies in the open disk of radius s about s.
inline double ellipticity_alpha(double s, complexd tau) {
  const double t = tau.real();
  const double u = tau.imag();
  return (2.0 * s * t - t * t - u * u) / 4.0;
}

inline double ellipticity_alpha(const TimeParams& p) {
  return ellipticity_alpha(p.s, p.tau);
}

inline bool in_time_disk(double s, complexd tau) {
  return s > 0.0 && ellipticity_alpha(s, tau) > 0.0;
}

inline bool in_time_disk(const TimeParams& p) { return in_time_disk(p.s, p.tau); }

inline void require_elliptic(const TimeParams& p) {
  if (!in_time_disk(p)) {
    throw std::domain_error("tau=" + std::to_string(p.tau.real()) + "+" +
                            std::to_string(p.tau.imag()) +
                            "i is outside the ellipticity disk D(s,s), s=" +
                            std::to_string(p.s));
  }
}

// Metric parameters (a, b, c) of an Ad-invariant inner product on the
// complexified algebra: a|X|^2 + b|Y|^2 + 2c<X,Y> on Z = X + JY.
struct MetricParams {
  double a = 1.0;
  double b = 1.0;
  double c = 0.0;

  double det() const { return a * b - c * c; }
};

inline bool is_valid_metric(const MetricParams& m) {
  return m.a > 0.0 && m.b > 0.0 && m.det() > 0.0;
}

inline void require_valid_metric(const MetricParams& m) {
  if (!is_valid_metric(m)) {
    throw std::domain_error("metric (a,b,c) must satisfy a>0, b>0, ab-c^2>0");
  }
}

// Reparametrization between metric data and time data:
//   Phi(a,b,c)    = (a + b, 2a, 2c) / (ab - c^2)  ->  (s, t, u)
//   Phi^{-1}(s,t,u) = (t/2, s - t/2, u/2) / alpha  ->  (a, b, c)
// Phi and Phi^{-1} are mutually inverse on their admissible domains.
inline TimeParams metric_to_time(const MetricParams& m) {
  require_valid_metric(m);
  const double d = m.det();
  return TimeParams{(m.a + m.b) / d, complexd{2.0 * m.a / d, 2.0 * m.c / d}};
}

inline MetricParams time_to_metric(const TimeParams& p) {
  require_elliptic(p);
  const double alpha = ellipticity_alpha(p);
  return MetricParams{p.t() / (2.0 * alpha), (p.s - p.t() / 2.0) / alpha,
                      p.u() / (2.0 * alpha)};
}

// r . (s, tau) = (r s, r tau); the associated operator scales linearly.
inline TimeParams scale_time(const TimeParams& p, double r) {
  return TimeParams{r * p.s, r * p.tau};
}

}  // namespace ctsbt
