#pragma once

#include "ctsbt/params.hpp"
#include "ctsbt/quadrature.hpp"
#include "ctsbt/rng.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace ctsbt {

using Matrix2 = Eigen::Matrix2cd;
using MatrixX = Eigen::MatrixXcd;

inline const std::array<Matrix2, 3>& pauli() {
  static const std::array<Matrix2, 3> s = [] {
    std::array<Matrix2, 3> m;
    m[0] << 0, 1, 1, 0;
    m[1] << 0, complexd{0, -1}, complexd{0, 1}, 0;
    m[2] << 1, 0, 0, -1;
    return m;
  }();
  return s;
}

// Orthonormal basis e_a = (i/sqrt(2)) sigma_a of su(2) for the inner
// product <X,Y> = -Tr(XY). Brackets: [e_1, e_2] = -sqrt(2) e_3 cyclically.
inline const std::array<Matrix2, 3>& su2_basis() {
  static const std::array<Matrix2, 3> e = [] {
    std::array<Matrix2, 3> m;
    const complexd c{0.0, 1.0 / std::sqrt(2.0)};
    for (int a = 0; a < 3; ++a) m[a] = c * pauli()[a];
    return m;
  }();
  return e;
}

inline double inner_k(const Matrix2& x, const Matrix2& y) {
  return -(x * y).trace().real();
}

// Splitting of Z in sl(2,C) as Z = X + JY with X, Y in su(2), J = i.
struct JSplit {
  Matrix2 x;
  Matrix2 y;
};

inline JSplit j_split(const Matrix2& z) {
  JSplit out;
  out.x = 0.5 * (z - z.adjoint());
  out.y = complexd{0.0, -0.5} * (z + z.adjoint());
  return out;
}

// Family of Ad-K-invariant real inner products on sl(2,C):
//   <Z, W>_{a,b,c} = a<X,X'> + b<Y,Y'> + c(<X,Y'> + <X',Y>).
inline double inner_abc(const Matrix2& z, const Matrix2& w, const MetricParams& m) {
  const JSplit zs = j_split(z);
  const JSplit ws = j_split(w);
  return m.a * inner_k(zs.x, ws.x) + m.b * inner_k(zs.y, ws.y) +
         m.c * (inner_k(zs.x, ws.y) + inner_k(ws.x, zs.y));
}

// The same form expressed through traces:
//   (b+a)/2 Re Tr(Z W*) + 1/2 Re[(b - a + 2ic) Tr(Z W)].
inline double inner_abc_trace(const Matrix2& z, const Matrix2& w,
                              const MetricParams& m) {
  const complexd tzw = (z * w).trace();
  const complexd tzws = (z * w.adjoint()).trace();
  return 0.5 * (m.b + m.a) * tzws.real() +
         0.5 * (complexd{m.b - m.a, 2.0 * m.c} * tzw).real();
}

// Orthonormal frame of sl(2,C) for <.,.>_{a,b,c}: per basis direction the
// pair (e_a, J e_a) is reshaped by the inverse transposed Cholesky factor
// of [[a, c], [c, b]]. Example: (4,1,0) -> {e_a/2, J e_a}.
inline std::array<Matrix2, 6> frame_abc(const MetricParams& m) {
  require_valid_metric(m);
  const double sa = std::sqrt(m.a);
  const double sd = std::sqrt(m.det() / m.a);
  std::array<Matrix2, 6> frame;
  const complexd iunit{0.0, 1.0};
  for (int a = 0; a < 3; ++a) {
    const Matrix2& e = su2_basis()[a];
    frame[2 * a] = e / sa;
    frame[2 * a + 1] = (-m.c / (m.a * sd)) * e + (iunit / sd) * e;
  }
  return frame;
}

// ---------------------------------------------------------------------------
// Irreducible representations.

// Generators pi_a = i sqrt(2) J_a of the n-dimensional irreducible
// representation (spin j = (n-1)/2), so pi(e_a) matches su2_basis at n = 2
// and the Casimir sum_a pi_a^2 equals -(n^2-1)/2 times the identity.
struct Irrep {
  int n = 1;
  std::array<MatrixX, 3> pi;
  Eigen::VectorXd jz;  // diagonal of J_3: j, j-1, ..., -j

  int dim() const { return n; }
  double casimir_scalar() const { return 0.5 * (double(n) * n - 1.0); }

  MatrixX casimir() const {
    MatrixX c = MatrixX::Zero(n, n);
    for (const auto& p : pi) c += p * p;
    return c;
  }
};

inline Irrep irrep(int n) {
  if (n < 1) throw std::invalid_argument("irrep dimension must be >= 1");
  Irrep r;
  r.n = n;
  const double j = 0.5 * (n - 1);
  MatrixX jp = MatrixX::Zero(n, n);
  MatrixX j3 = MatrixX::Zero(n, n);
  r.jz.resize(n);
  for (int k = 0; k < n; ++k) {
    const double m = j - k;
    j3(k, k) = m;
    r.jz(k) = m;
    if (k >= 1) jp(k - 1, k) = std::sqrt(j * (j + 1) - m * (m + 1));
  }
  const MatrixX jm = jp.transpose();
  const complexd i2{0.0, std::sqrt(2.0)};
  r.pi[0] = i2 * 0.5 * (jp + jm);
  r.pi[1] = i2 * complexd{0.0, -0.5} * (jp - jm);
  r.pi[2] = i2 * j3;
  return r;
}

// Complex-linear extension of the generator map to sl(2,C): expand W in
// the complex basis {e_a} via the bilinear form, W = sum_a c_a e_a with
// c_a = -Tr(e_a W).
inline MatrixX rep_lie(const Irrep& r, const Matrix2& w) {
  MatrixX out = MatrixX::Zero(r.n, r.n);
  for (int a = 0; a < 3; ++a) {
    const complexd c = -(su2_basis()[a] * w).trace();
    out += c * r.pi[a];
  }
  return out;
}

// Logarithm on SU(2) through quaternion coordinates U = q0 + i q.sigma;
// returns X in su(2) with exp(X) = U (axis convention e_3 at U = -I).
inline Matrix2 su2_log(const Matrix2& u) {
  const double q0 = 0.5 * (u(0, 0) + u(1, 1)).real();
  double q1 = 0.5 * (u(0, 1) + u(1, 0)).imag();
  double q2 = 0.5 * (u(0, 1) - u(1, 0)).real();
  double q3 = 0.5 * (u(0, 0) - u(1, 1)).imag();
  const double nq = std::sqrt(q1 * q1 + q2 * q2 + q3 * q3);
  const double theta = std::atan2(nq, q0);
  double f = 1.0;
  if (nq < 1e-14) {
    if (q0 < 0.0) {
      q1 = q2 = 0.0;
      q3 = 1.0;
      f = theta;
    }
  } else {
    f = theta / nq;
  }
  const complexd iunit{0.0, 1.0};
  Matrix2 x = iunit * f * (q1 * pauli()[0] + q2 * pauli()[1] + q3 * pauli()[2]);
  return x;
}

// Polar factors z = U P with U special unitary and P = exp(H), H Hermitian
// traceless; both logs are returned.
struct PolarLog {
  Matrix2 xu;  // su(2) log of the unitary factor
  Matrix2 h;   // Hermitian log of the positive factor
};

inline PolarLog polar_log(const Matrix2& z) {
  Eigen::SelfAdjointEigenSolver<Matrix2> es(z.adjoint() * z);
  const Eigen::Vector2d lam = es.eigenvalues();
  if (lam(0) <= 0.0) throw std::domain_error("singular group element");
  const Matrix2 v = es.eigenvectors();
  Matrix2 isqrt = Matrix2::Zero(), logp = Matrix2::Zero();
  for (int k = 0; k < 2; ++k) {
    isqrt += v.col(k) * v.col(k).adjoint() / std::sqrt(lam(k));
    logp += v.col(k) * v.col(k).adjoint() * (0.5 * std::log(lam(k)));
  }
  PolarLog out;
  out.h = 0.5 * (logp + logp.adjoint());
  out.xu = su2_log(z * isqrt);
  return out;
}

// Value of the (holomorphically extended) representation at z in SL(2,C).
inline MatrixX rep_group(const Irrep& r, const Matrix2& z) {
  if (r.n == 1) return MatrixX::Ones(1, 1);
  const PolarLog pl = polar_log(z);
  const MatrixX ru = rep_lie(r, pl.xu).exp();
  if (pl.h.norm() < 1e-15) return ru;
  return ru * rep_lie(r, pl.h).exp();
}

// Euler factorization helpers: a group element z(phi) y(theta) z(psi) has
// representation diag(e^{i m phi}) . exp(-i theta J_2) . diag(e^{i m psi}).
inline Matrix2 euler_element(double phi, double theta, double psi) {
  const auto zrot = [](double a) {
    Matrix2 m = Matrix2::Zero();
    m(0, 0) = std::polar(1.0, 0.5 * a);
    m(1, 1) = std::polar(1.0, -0.5 * a);
    return m;
  };
  Matrix2 y;
  const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
  y << c, -s, s, c;
  return zrot(phi) * y * zrot(psi);
}

inline MatrixX rep_middle_euler(const Irrep& r, double theta) {
  // exp(-i theta J_2) = exp(-(theta/sqrt(2)) pi_2)
  return ((-theta / std::sqrt(2.0)) * r.pi[1]).exp();
}

inline Eigen::VectorXcd rep_phase_euler(const Irrep& r, double angle) {
  Eigen::VectorXcd d(r.n);
  for (int k = 0; k < r.n; ++k) d(k) = std::polar(1.0, r.jz(k) * angle);
  return d;
}

// ---------------------------------------------------------------------------
// Characters and heat kernels.

// Character of the n-dimensional irrep at z: the Chebyshev polynomial
// U_{n-1}(tr z / 2), which continuously interpolates the eigenvalue form
// (lambda^n - lambda^{-n}) / (lambda - lambda^{-1}) through lambda = +-1.
inline complexd character(int n, const Matrix2& z) {
  const complexd c = 0.5 * z.trace();
  complexd um2{0.0, 0.0}, um1{1.0, 0.0};
  for (int k = 1; k < n; ++k) {
    const complexd um = 2.0 * c * um1 - um2;
    um2 = um1;
    um1 = um;
  }
  return n >= 1 ? um1 : complexd{};
}

// Largest-modulus eigenvalue of z in SL(2,C); the pair is (lambda, 1/lambda).
inline double spectral_radius_sl2(const Matrix2& z) {
  const complexd c = 0.5 * z.trace();
  const complexd sq = std::sqrt(c * c - 1.0);
  return std::max({std::abs(c + sq), std::abs(c - sq), 1.0});
}

struct HeatSeries {
  complexd value{};
  int terms = 0;
};

// Analytically continued heat kernel at complex time tau:
//   rho_C(tau, z) = sum_{n>=1} n e^{-tau (n^2-1)/4} chi_n(z),
// truncated at the first n whose tail bound
//   10 n^2 e^{-t (n^2-1)/4} max(1,|lambda|)^{n-1}
// drops below tol.
inline HeatSeries heat_kernel_complex(complexd tau, const Matrix2& z,
                                      double tol = 1e-12) {
  const double t = tau.real();
  if (t <= 0.0) throw std::domain_error("Re(tau) must be positive");
  const double lam = spectral_radius_sl2(z);
  const double llam = std::log(lam);
  if (llam * llam / t > 600.0) {
    throw std::runtime_error("heat kernel series overflows for this argument");
  }
  const complexd c = 0.5 * z.trace();
  complexd um2{0.0, 0.0}, um1{1.0, 0.0};  // U_{n-2}, U_{n-1}
  HeatSeries out;
  constexpr int cap = 20000;
  for (int n = 1; n <= cap; ++n) {
    const double gauss = -t * (double(n) * n - 1.0) / 4.0;
    const double bound = 10.0 * double(n) * n * std::exp(gauss + (n - 1) * llam);
    if (bound < tol) {
      out.terms = n - 1;
      return out;
    }
    out.value += double(n) * std::exp(tau * (double(n) * n - 1.0) / -4.0) * um1;
    const complexd um = 2.0 * c * um1 - um2;
    um2 = um1;
    um1 = um;
  }
  throw std::runtime_error("heat kernel series did not reach its tail bound");
}

inline double heat_kernel_su2(double t, const Matrix2& k, double tol = 1e-12) {
  return heat_kernel_complex({t, 0.0}, k, tol).value.real();
}

// Diagonal torus element with angle theta (conjugacy class representative).
inline Matrix2 k_theta(double theta) {
  Matrix2 m = Matrix2::Zero();
  m(0, 0) = std::polar(1.0, theta);
  m(1, 1) = std::polar(1.0, -theta);
  return m;
}

// ---------------------------------------------------------------------------
// Haar integration and sampling.

// Product rule in Euler angles: trapezoid (uniform) in the two torus
// angles, Gauss-Legendre in cos(theta). Exact for any function in the
// span of matrix entries of irreps of dimension <= exact_dim.
struct HaarRule {
  std::vector<double> phi;
  std::vector<double> psi;
  Quad1D theta;  // nodes in x = cos(theta), weights of total mass 2
  int exact_dim = 0;

  std::size_t size() const { return phi.size() * psi.size() * theta.size(); }

  template <typename F>
  void for_each_euler(F&& f) const {
    const double wa = 1.0 / double(phi.size());
    const double wb = 1.0 / double(psi.size());
    for (std::size_t it = 0; it < theta.size(); ++it) {
      const double th = std::acos(theta.nodes[it]);
      const double wt = 0.5 * theta.weights[it] * wa * wb;
      for (double a : phi)
        for (double b : psi) f(a, th, b, wt);
    }
  }

  template <typename F>
  void for_each(F&& f) const {
    for_each_euler([&](double a, double th, double b, double w) {
      f(euler_element(a, th, b), w);
    });
  }
};

inline HaarRule haar_quadrature(int order) {
  if (order < 1) throw std::invalid_argument("order must be >= 1");
  HaarRule rule;
  const int nphi = 2 * order + 1;
  const int npsi = 4 * order + 2;
  rule.phi.resize(nphi);
  for (int i = 0; i < nphi; ++i) rule.phi[i] = 2.0 * M_PI * i / nphi;
  rule.psi.resize(npsi);
  for (int i = 0; i < npsi; ++i) rule.psi[i] = 4.0 * M_PI * i / npsi;
  rule.theta = gauss_legendre(order);
  rule.exact_dim = 2 * order + 1;
  return rule;
}

// Weyl integration for class functions: int_K f = (2/pi) int_0^pi
// f(k_theta) sin^2(theta) dtheta.
template <typename F>
auto class_integrate(F&& f, int order = 64, double lo = 0.0, double hi = M_PI) {
  const Quad1D rule = gauss_legendre_on(order, lo, hi);
  using result_t = decltype(f(0.5));
  result_t acc{};
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double th = rule.nodes[i];
    const double s = std::sin(th);
    acc += rule.weights[i] * (2.0 / M_PI) * s * s * f(th);
  }
  return acc;
}

// Haar-uniform element of SU(2): a complex-Gaussian column normalized and
// completed to the unique special-unitary frame.
inline Matrix2 haar_sample(CounterRng& rng) {
  const complexd a{rng.normal(), rng.normal()};
  const complexd b{rng.normal(), rng.normal()};
  const double n = std::sqrt(std::norm(a) + std::norm(b));
  Matrix2 k;
  k << a / n, -std::conj(b) / n, b / n, std::conj(a) / n;
  return k;
}

// Random element of sl(2,C) with standard-normal coordinates in the
// complex basis {e_a}.
inline Matrix2 random_sl2(CounterRng& rng) {
  Matrix2 z = Matrix2::Zero();
  for (int a = 0; a < 3; ++a)
    z += complexd{rng.normal(), rng.normal()} * su2_basis()[a];
  return z;
}

inline bool is_sl2(const Matrix2& z, double tol = 1e-12) {
  return std::abs(z.determinant() - complexd{1.0, 0.0}) < tol;
}

inline bool is_special_unitary(const Matrix2& k, double tol = 1e-12) {
  return is_sl2(k, tol) && (k.adjoint() * k - Matrix2::Identity()).norm() < tol;
}

inline Matrix2 ad(const Matrix2& g, const Matrix2& z) {
  return g * z * g.inverse();
}

// Largest violation of <Ad_k Z, Ad_k W> = <Z, W> over random trials.
inline double ad_invariance_residual(const MetricParams& m, int trials,
                                     std::uint64_t seed) {
  CounterRng rng(seed, 101);
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const Matrix2 k = haar_sample(rng);
    const Matrix2 z = random_sl2(rng);
    const Matrix2 w = random_sl2(rng);
    const double lhs = inner_abc(ad(k, z), ad(k, w), m);
    const double rhs = inner_abc(z, w, m);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

}  // namespace ctsbt
