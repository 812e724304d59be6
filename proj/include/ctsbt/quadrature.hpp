#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace ctsbt {

// One-dimensional quadrature rule: sum_i w[i] f(x[i]).
struct Quad1D {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

namespace detail {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix of the
// orthogonal-polynomial recurrence, weights mu0 * (first eigvec comp)^2.
inline Quad1D golub_welsch(const std::vector<double>& offdiag, double mu0) {
  const int n = static_cast<int>(offdiag.size()) + 1;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) {
    jac(k, k + 1) = offdiag[k];
    jac(k + 1, k) = offdiag[k];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  Quad1D rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    rule.nodes[k] = es.eigenvalues()(k);
    const double v0 = es.eigenvectors()(0, k);
    rule.weights[k] = mu0 * v0 * v0;
  }
  return rule;
}

}  // namespace detail

// Gauss-Legendre on [-1, 1], exact for polynomials of degree <= 2n-1.
inline Quad1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("quadrature order must be >= 1");
  std::vector<double> b(n - 1);
  for (int k = 1; k < n; ++k) b[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  return detail::golub_welsch(b, 2.0);
}

// Gauss-Hermite with weight exp(-x^2), exact for degree <= 2n-1.
inline Quad1D gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("quadrature order must be >= 1");
  std::vector<double> b(n - 1);
  for (int k = 1; k < n; ++k) b[k - 1] = std::sqrt(k / 2.0);
  return detail::golub_welsch(b, std::sqrt(M_PI));
}

// Affine image of a rule on [-1,1] onto [lo, hi].
inline Quad1D scaled_to_interval(Quad1D rule, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  for (auto& x : rule.nodes) x = mid + half * x;
  for (auto& w : rule.weights) w *= half;
  return rule;
}

inline Quad1D gauss_legendre_on(int n, double lo, double hi) {
  return scaled_to_interval(gauss_legendre(n), lo, hi);
}

// Tensor-product integration over the given axes. The integrand receives
// the coordinate vector of the current node.
template <typename F>
auto tensor_integrate(const std::vector<Quad1D>& axes, F&& f) {
  const std::size_t d = axes.size();
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> x(d);
  using result_t = decltype(f(x));
  result_t acc{};
  bool done = d == 0;
  if (done) return acc;
  while (!done) {
    double w = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
      x[k] = axes[k].nodes[idx[k]];
      w *= axes[k].weights[idx[k]];
    }
    acc += w * f(x);
    std::size_t k = 0;
    while (k < d && ++idx[k] == axes[k].size()) {
      idx[k] = 0;
      ++k;
    }
    done = k == d;
  }
  return acc;
}

}  // namespace ctsbt
