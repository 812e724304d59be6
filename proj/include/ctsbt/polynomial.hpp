#pragma once

#include "ctsbt/params.hpp"

#include <complex>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <vector>

namespace ctsbt {

// Sparse polynomial in d variables with complex coefficients, keyed by
// exponent multi-index. Evaluation at complex points doubles as the
// holomorphic extension of the corresponding function on R^d.
class Polynomial {
 public:
  using Key = std::vector<int>;

  explicit Polynomial(std::size_t dim = 1) : dim_(dim) {}

  static Polynomial monomial(std::size_t dim, const Key& powers, complexd coeff) {
    Polynomial p(dim);
    p.add_term(powers, coeff);
    return p;
  }

  std::size_t dim() const { return dim_; }
  const std::map<Key, complexd>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  void add_term(const Key& powers, complexd coeff) {
    if (powers.size() != dim_) throw std::invalid_argument("bad multi-index size");
    auto it = terms_.find(powers);
    if (it == terms_.end()) {
      if (coeff != complexd{}) terms_.emplace(powers, coeff);
    } else {
      it->second += coeff;
      if (it->second == complexd{}) terms_.erase(it);
    }
  }

  int degree() const {
    int deg = 0;
    for (const auto& [k, c] : terms_) {
      int d = 0;
      for (int e : k) d += e;
      deg = std::max(deg, d);
    }
    return deg;
  }

  complexd eval(const std::vector<complexd>& z) const {
    if (z.size() != dim_) throw std::invalid_argument("bad point dimension");
    complexd acc{};
    for (const auto& [k, c] : terms_) {
      complexd term = c;
      for (std::size_t j = 0; j < dim_; ++j)
        for (int e = 0; e < k[j]; ++e) term *= z[j];
      acc += term;
    }
    return acc;
  }

  complexd eval_real(const std::vector<double>& x) const {
    std::vector<complexd> z(x.begin(), x.end());
    return eval(z);
  }

  // Coefficientwise conjugate; on real points this is the complex
  // conjugate function.
  Polynomial conjugated() const {
    Polynomial out(dim_);
    for (const auto& [k, c] : terms_) out.add_term(k, std::conj(c));
    return out;
  }

  Polynomial laplacian() const {
    Polynomial out(dim_);
    for (const auto& [k, c] : terms_) {
      for (std::size_t j = 0; j < dim_; ++j) {
        if (k[j] >= 2) {
          Key kk = k;
          kk[j] -= 2;
          out.add_term(kk, c * double(k[j]) * double(k[j] - 1));
        }
      }
    }
    return out;
  }

  Polynomial operator+(const Polynomial& rhs) const {
    Polynomial out = *this;
    for (const auto& [k, c] : rhs.terms_) out.add_term(k, c);
    return out;
  }

  Polynomial operator*(const Polynomial& rhs) const {
    Polynomial out(dim_);
    for (const auto& [ka, ca] : terms_) {
      for (const auto& [kb, cb] : rhs.terms_) {
        Key k = ka;
        for (std::size_t j = 0; j < dim_; ++j) k[j] += kb[j];
        out.add_term(k, ca * cb);
      }
    }
    return out;
  }

  Polynomial operator*(complexd c) const {
    Polynomial out(dim_);
    for (const auto& [k, v] : terms_) out.add_term(k, v * c);
    return out;
  }

 private:
  std::size_t dim_;
  std::map<Key, complexd> terms_;
};

// e^{tau Laplacian / 2} on polynomials: the series terminates after
// degree/2 applications.
inline Polynomial heat_apply_poly(const Polynomial& f, complexd tau) {
  Polynomial acc = f;
  Polynomial pow = f;
  complexd factor{1.0, 0.0};
  for (int k = 1; 2 * k <= f.degree(); ++k) {
    pow = pow.laplacian();
    if (pow.empty()) break;
    factor *= tau / (2.0 * double(k));
    acc = acc + pow * factor;
  }
  return acc;
}

// E[x^m] for x ~ N(0, s): s^{m/2} (m-1)!! for even m, zero for odd m.
inline double gaussian_moment_1d(int m, double s) {
  if (m % 2 == 1) return 0.0;
  double acc = 1.0;
  for (int k = m - 1; k > 1; k -= 2) acc *= k;
  for (int k = 0; k < m / 2; ++k) acc *= s;
  return acc;
}

// E[X^p Y^q] for a centered bivariate Gaussian with covariance
// [[sxx, sxy], [sxy, syy]], by the pairing recursion
//   M(p,q) = (p-1) sxx M(p-2,q) + q sxy M(p-1,q-1).
inline double gaussian_moment_pair(int p, int q, double sxx, double sxy, double syy) {
  std::vector<std::vector<double>> m(p + 1, std::vector<double>(q + 1, 0.0));
  for (int j = 0; j <= q; ++j) {
    m[0][j] = (j % 2 == 0) ? gaussian_moment_1d(j, syy) : 0.0;
  }
  for (int i = 1; i <= p; ++i) {
    for (int j = 0; j <= q; ++j) {
      double acc = 0.0;
      if (i >= 2) acc += (i - 1) * sxx * m[i - 2][j];
      if (j >= 1) acc += j * sxy * m[i - 1][j - 1];
      m[i][j] = acc;
    }
  }
  return m[p][q];
}

// E[Z^a conj(Z)^b] for Z = X + iY with (X, Y) the centered Gaussian pair
// of covariance [[s - t/2, -u/2], [-u/2, t/2]] (one coordinate of the
// transform-side measure). Sub-oracle identities: E[Z^2] = s - tau and
// E[|Z|^2] = s.
inline complexd mu_pair_moment(int a, int b, const TimeParams& p) {
  require_elliptic(p);
  const double sxx = p.s - p.t() / 2.0;
  const double syy = p.t() / 2.0;
  const double sxy = -p.u() / 2.0;
  std::vector<double> binom_a(a + 1), binom_b(b + 1);
  binom_a[0] = 1.0;
  for (int i = 1; i <= a; ++i) binom_a[i] = binom_a[i - 1] * (a - i + 1) / i;
  binom_b[0] = 1.0;
  for (int i = 1; i <= b; ++i) binom_b[i] = binom_b[i - 1] * (b - i + 1) / i;
  const complexd iunit{0.0, 1.0};
  complexd acc{};
  for (int pa = 0; pa <= a; ++pa) {
    for (int pb = 0; pb <= b; ++pb) {
      // z^a zbar^b contributes C(a,pa) C(b,pb) i^{a-pa} (-i)^{b-pb}
      // x^{pa+pb} y^{a+b-pa-pb}.
      const complexd phase = std::pow(iunit, a - pa) * std::pow(-iunit, b - pb);
      const double mom =
          gaussian_moment_pair(pa + pb, a + b - pa - pb, sxx, sxy, syy);
      acc += binom_a[pa] * binom_b[pb] * phase * mom;
    }
  }
  return acc;
}

// ||f||^2 in L^2(R^d, rho_s): exact Gaussian moments of f * conj(f).
inline double poly_norm_sq_rho_s(const Polynomial& f, double s) {
  if (s <= 0.0) throw std::domain_error("s must be positive");
  const Polynomial g = f * f.conjugated();
  complexd acc{};
  for (const auto& [k, c] : g.terms()) {
    double mom = 1.0;
    for (int e : k) mom *= gaussian_moment_1d(e, s);
    acc += c * mom;
  }
  return acc.real();
}

// ||F||^2 in L^2(C^d, mu_{s,tau}) for a holomorphic polynomial F: Wick
// evaluation of E[F(Z) conj(F(Z))] over independent coordinate pairs.
inline double poly_norm_sq_mu(const Polynomial& f, const TimeParams& p) {
  require_elliptic(p);
  const std::size_t d = f.dim();
  complexd acc{};
  for (const auto& [ka, ca] : f.terms()) {
    for (const auto& [kb, cb] : f.terms()) {
      complexd term = ca * std::conj(cb);
      for (std::size_t j = 0; j < d; ++j) term *= mu_pair_moment(ka[j], kb[j], p);
      acc += term;
    }
  }
  return acc.real();
}

}  // namespace ctsbt
