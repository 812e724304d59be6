#pragma once

#include "ctsbt/params.hpp"
#include "ctsbt/quadrature.hpp"
#include "ctsbt/su2.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace ctsbt {

inline MatrixX kron(const MatrixX& a, const MatrixX& b) {
  MatrixX out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// Closed-form exponential of a traceless 2x2 matrix:
//   exp(A) = cosh(d) I + (sinh(d)/d) A with d = sqrt(-det A).
inline Matrix2 exp_traceless_2x2(const Matrix2& a) {
  const complexd d2 = -a.determinant();
  const complexd d = std::sqrt(d2);
  complexd ch, sh;
  if (std::abs(d) < 1e-6) {
    // series through d^6; error below 1e-42 at this threshold
    const complexd x = d2;
    ch = 1.0 + x / 2.0 + x * x / 24.0 + x * x * x / 720.0;
    sh = 1.0 + x / 6.0 + x * x / 120.0 + x * x * x / 5040.0;
  } else {
    ch = std::cosh(d);
    sh = std::sinh(d) / d;
  }
  return ch * Matrix2::Identity() + sh * a;
}

// Holomorphic irrep value along fast paths for small n (used in hot loops);
// falls back to the generic polar evaluation otherwise.
inline MatrixX rep_group_fast(const Irrep& r, const Matrix2& g) {
  if (r.n == 1) return MatrixX::Ones(1, 1);
  if (r.n == 2) return g;
  if (r.n == 3) {
    // symmetric square in the orthonormal weight basis
    const complexd a = g(0, 0), b = g(0, 1), c = g(1, 0), d = g(1, 1);
    const double r2 = std::sqrt(2.0);
    MatrixX m(3, 3);
    m << a * a, r2 * a * b, b * b, r2 * a * c, a * d + b * c, r2 * b * d, c * c,
        r2 * c * d, d * d;
    return m;
  }
  return rep_group(r, g);
}

// Function of matrix-entry type F(z) = Tr(pi(z) A) on the group and its
// complexification.
struct MatrixEntryFn {
  Irrep rep;
  MatrixX coeff;

  complexd eval(const Matrix2& z) const {
    return (rep_group(rep, z) * coeff).trace();
  }
};

// ---------------------------------------------------------------------------
// Lifted action of left-invariant vector fields on products of entries.
//
// |F(z)|^2 = Tr(sigma(z) S) with sigma = pi (x) conj(pi) and S = A (x) conj(A).
// A left-invariant field in direction W acts on the state slot by the matrix
// M(W) below; second-order operators are sums of squares of these.

struct LiftedOps {
  Irrep rep;
  int pairs = 1;
  int dim = 0;  // n^(2*pairs)
  std::array<MatrixX, 3> m_e;   // directions e_a
  std::array<MatrixX, 3> m_je;  // directions J e_a
};

// pairs copies of (pi, conj pi); each site contributes one generator term.
inline LiftedOps multi_lifted_ops(const Irrep& r, int pairs) {
  if (pairs < 1) throw std::invalid_argument("pairs must be >= 1");
  LiftedOps ops;
  ops.rep = r;
  ops.pairs = pairs;
  const int n_sites = 2 * pairs;
  int dim = 1;
  for (int i = 0; i < n_sites; ++i) dim *= r.n;
  ops.dim = dim;

  const auto site_op = [&](int site, const MatrixX& x) {
    MatrixX out = MatrixX::Identity(1, 1);
    for (int i = 0; i < n_sites; ++i) {
      out = kron(out, i == site ? x : MatrixX::Identity(r.n, r.n));
    }
    return out;
  };

  const complexd iu{0.0, 1.0};
  for (int a = 0; a < 3; ++a) {
    MatrixX h = MatrixX::Zero(dim, dim);
    MatrixX g = MatrixX::Zero(dim, dim);
    for (int p = 0; p < pairs; ++p) {
      h += site_op(2 * p, r.pi[a]);
      g += site_op(2 * p + 1, r.pi[a].conjugate());
    }
    ops.m_e[a] = h + g;
    ops.m_je[a] = iu * h - iu * g;
  }
  return ops;
}

inline LiftedOps lifted_ops(const Irrep& r) { return multi_lifted_ops(r, 1); }

// Real-linear extension M(W) for W = X + JY in sl(2,C).
inline MatrixX lift_vector(const LiftedOps& ops, const Matrix2& w) {
  const JSplit sp = j_split(w);
  MatrixX out = MatrixX::Zero(ops.dim, ops.dim);
  for (int a = 0; a < 3; ++a) {
    out += inner_k(su2_basis()[a], sp.x) * ops.m_e[a];
    out += inner_k(su2_basis()[a], sp.y) * ops.m_je[a];
  }
  return out;
}

inline MatrixX lift_laplacian_k(const LiftedOps& ops) {
  MatrixX out = MatrixX::Zero(ops.dim, ops.dim);
  for (int a = 0; a < 3; ++a) out += ops.m_e[a] * ops.m_e[a];
  return out;
}

// Holomorphic and antiholomorphic second-order operators sum_a d_a^2.
inline MatrixX lift_dsq(const LiftedOps& ops) {
  MatrixX out = MatrixX::Zero(ops.dim, ops.dim);
  const complexd iu{0.0, 1.0};
  for (int a = 0; a < 3; ++a) {
    const MatrixX hol = 0.5 * (ops.m_e[a] - iu * ops.m_je[a]);
    out += hol * hol;
  }
  return out;
}

inline MatrixX lift_dbarsq(const LiftedOps& ops) {
  MatrixX out = MatrixX::Zero(ops.dim, ops.dim);
  const complexd iu{0.0, 1.0};
  for (int a = 0; a < 3; ++a) {
    const MatrixX ah = 0.5 * (ops.m_e[a] + iu * ops.m_je[a]);
    out += ah * ah;
  }
  return out;
}

// Laplacian of the (s,tau) geometry: sum of squares over the orthonormal
// frame of the associated left-invariant metric.
inline MatrixX lift_laplacian_stau(const LiftedOps& ops, const TimeParams& p) {
  const auto frame = frame_abc(time_to_metric(p));
  MatrixX out = MatrixX::Zero(ops.dim, ops.dim);
  for (const auto& v : frame) {
    const MatrixX m = lift_vector(ops, v);
    out += m * m;
  }
  return out;
}

// Residual of the operator identity  s Delta_K = Delta_{s,tau} + tau d^2
// + conj(tau) dbar^2  on the lifted space.
inline double lift_identity_residual(const LiftedOps& ops, const TimeParams& p) {
  const MatrixX lhs = p.s * lift_laplacian_k(ops);
  const MatrixX rhs = lift_laplacian_stau(ops, p) + p.tau * lift_dsq(ops) +
                      std::conj(p.tau) * lift_dbarsq(ops);
  return (lhs - rhs).norm() / std::max(1.0, lhs.norm());
}

// exp of a Hermitian matrix through its eigendecomposition.
inline MatrixX herm_exp(const MatrixX& h) {
  Eigen::SelfAdjointEigenSolver<MatrixX> es(h);
  const Eigen::VectorXd lam = es.eigenvalues();
  const MatrixX& v = es.eigenvectors();
  MatrixX out = MatrixX::Zero(h.rows(), h.cols());
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    out += std::exp(lam(k)) * (v.col(k) * v.col(k).adjoint());
  }
  return out;
}

inline MatrixX pair_state(const MatrixX& a) { return kron(a, a.conjugate()); }

// ---------------------------------------------------------------------------
// Transform and exact norms.

// Heat evolution on matrix entries: e^{tau Delta_K / 2} multiplies the
// coefficient by exp(-tau (n^2-1)/4); the holomorphic extension is then
// evaluation of the same entry function on the complexified group.
inline MatrixEntryFn transform_me(const MatrixEntryFn& f, complexd tau) {
  return {f.rep, std::exp(-0.5 * tau * f.rep.casimir_scalar()) * f.coeff};
}

// Preimage under the transform (surjectivity witness).
inline MatrixEntryFn transform_preimage(const MatrixEntryFn& target, complexd tau) {
  return {target.rep, std::exp(0.5 * tau * target.rep.casimir_scalar()) * target.coeff};
}

// int_K |f|^2 rho_s dk = Tr(e^{(s/2) C_sigma} (A (x) conj A)) with C_sigma
// the Casimir of the pair lift.
inline double norm_sq_rho_s(const MatrixEntryFn& f, double s) {
  const LiftedOps ops = lifted_ops(f.rep);
  const MatrixX e = herm_exp(0.5 * s * lift_laplacian_k(ops));
  return (e * pair_state(f.coeff)).trace().real();
}

// int_{K_C} |F|^2 dmu_{s,tau} for an entry function F; the pair lift of
// Delta_{s,tau} is Hermitian, so the exponential is exact via its
// eigendecomposition.
inline double norm_sq_mu_stau(const MatrixEntryFn& f, const TimeParams& p) {
  const LiftedOps ops = lifted_ops(f.rep);
  const MatrixX lap = lift_laplacian_stau(ops, p);
  if ((lap - lap.adjoint()).norm() > 1e-9 * std::max(1.0, lap.norm())) {
    throw std::logic_error("pair lift of Delta_{s,tau} lost hermiticity");
  }
  const MatrixX e = herm_exp(0.5 * lap);
  return (e * pair_state(f.coeff)).trace().real();
}

// int_K |f|^2 dk = |A|_F^2 / n by Schur orthogonality.
inline double norm_sq_l2k(const MatrixEntryFn& f) {
  return f.coeff.squaredNorm() / double(f.rep.n);
}

// ---------------------------------------------------------------------------
// Transform by quadrature: (B_tau f)(z) = int_K rho_C(tau, z k^{-1}) f(k) dk.
// The k-loop runs in Euler coordinates with the middle d-matrix cached per
// theta node, and the heat series uses coefficients precomputed for tau.
inline complexd transform_quadrature_su2(const MatrixEntryFn& f, complexd tau,
                                         const Matrix2& z, int order,
                                         double tol = 1e-12) {
  const double t = tau.real();
  if (t <= 0.0) throw std::domain_error("Re(tau) must be positive");

  // series length from the tail bound with |lambda| <= op-norm of z
  const double znorm = std::sqrt(
      Eigen::SelfAdjointEigenSolver<Matrix2>(z.adjoint() * z).eigenvalues()(1));
  const double llam = std::log(std::max(1.0, znorm));
  if (llam * llam / t > 600.0) {
    throw std::runtime_error("heat kernel series overflows for this argument");
  }
  int n_terms = 0;
  for (int m = 1; m <= 20000; ++m) {
    const double bound =
        10.0 * double(m) * m * std::exp(-t * (double(m) * m - 1.0) / 4.0 + (m - 1) * llam);
    if (bound < tol) {
      n_terms = m - 1;
      break;
    }
  }
  if (n_terms == 0) throw std::runtime_error("heat series did not truncate");
  std::vector<complexd> coef(n_terms + 1);
  for (int m = 1; m <= n_terms; ++m) {
    coef[m] = double(m) * std::exp(-tau * (double(m) * m - 1.0) / 4.0);
  }

  const HaarRule rule = haar_quadrature(order);
  const Irrep& r = f.rep;
  const double wa = 1.0 / double(rule.phi.size());
  const double wb = 1.0 / double(rule.psi.size());

  complexd acc{};
  for (std::size_t it = 0; it < rule.theta.size(); ++it) {
    const double th = std::acos(rule.theta.nodes[it]);
    const double wt = 0.5 * rule.theta.weights[it] * wa * wb;
    const MatrixX d = rep_middle_euler(r, th);
    const double ct = std::cos(0.5 * th), st = std::sin(0.5 * th);
    for (double a : rule.phi) {
      const Eigen::VectorXcd pa = rep_phase_euler(r, a);
      for (double b : rule.psi) {
        // k = z(a) y(th) z(b) entrywise
        const complexd k00 = ct * std::polar(1.0, 0.5 * (a + b));
        const complexd k01 = -st * std::polar(1.0, 0.5 * (a - b));
        const complexd k10 = st * std::polar(1.0, -0.5 * (a - b));
        const complexd k11 = ct * std::polar(1.0, -0.5 * (a + b));
        // tr(z k^dagger) / 2 drives the heat series at z k^{-1}
        const complexd c = 0.5 * (z(0, 0) * std::conj(k00) + z(0, 1) * std::conj(k01) +
                                  z(1, 0) * std::conj(k10) + z(1, 1) * std::conj(k11));
        complexd um2{0.0, 0.0}, um1{1.0, 0.0};
        complexd heat{};
        for (int m = 1; m <= n_terms; ++m) {
          heat += coef[m] * um1;
          const complexd um = 2.0 * c * um1 - um2;
          um2 = um1;
          um1 = um;
        }
        // f(k) = sum_{ij} pa_i d_{ij} pb_j A_{ji}
        complexd fk{};
        for (int i = 0; i < r.n; ++i) {
          for (int j = 0; j < r.n; ++j) {
            fk += pa(i) * d(i, j) * std::polar(1.0, r.jz(j) * b) * f.coeff(j, i);
          }
        }
        acc += wt * heat * fk;
      }
    }
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Exact expectations of the time-discretized sampler.
//
// One step multiplies by exp(sqrt(h) sum_j xi_j V_j) with iid standard
// normal xi over the metric frame. Its expected pair lift
//   T_h = E[ sigma(exp(sqrt(h) W)) ]
// is computed by tensorized Gauss-Hermite quadrature; the integrand is
// entire in xi with scale sqrt(h), so a modest order already reaches
// machine precision. E over n_steps then follows from T_h^n_steps.
inline MatrixX discrete_step_pair(const Irrep& r, const TimeParams& p, double h,
                                  int pairs = 1, int gh_order = 8) {
  const auto frame = frame_abc(time_to_metric(p));
  const Quad1D gh = gauss_hermite(gh_order);
  const int nq = int(gh.size());
  const double sh = std::sqrt(h);

  int dim = 1;
  for (int i = 0; i < 2 * pairs; ++i) dim *= r.n;
  MatrixX acc = MatrixX::Zero(dim, dim);

  std::size_t total = 1;
  for (int j = 0; j < 6; ++j) total *= std::size_t(nq);
  const double norm = std::pow(M_PI, -3.0);  // (1/sqrt(pi))^6

  std::array<int, 6> idx{};
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    double w = norm;
    Matrix2 wmat = Matrix2::Zero();
    for (int j = 0; j < 6; ++j) {
      idx[j] = int(rem % std::size_t(nq));
      rem /= std::size_t(nq);
      w *= gh.weights[idx[j]];
      const double xi = std::sqrt(2.0) * gh.nodes[idx[j]];
      wmat += (sh * xi) * frame[j];
    }
    const Matrix2 g = exp_traceless_2x2(wmat);
    const MatrixX rep = rep_group_fast(r, g);
    const MatrixX repc = rep.conjugate();
    MatrixX one = MatrixX::Identity(1, 1);
    for (int pp = 0; pp < pairs; ++pp) one = kron(kron(one, rep), repc);
    acc += w * one;
  }
  return acc;
}

inline MatrixX matrix_power(MatrixX base, long long n) {
  MatrixX out = MatrixX::Identity(base.rows(), base.cols());
  while (n > 0) {
    if (n & 1) out = out * base;
    base = base * base;
    n >>= 1;
  }
  return out;
}

// vec of the identity in the pair index convention of kron().
inline Eigen::VectorXcd pair_vec_identity(int n, int pairs = 1) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(1);
  v(0) = 1.0;
  Eigen::VectorXcd vi(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) vi(i * n + j) = (i == j) ? 1.0 : 0.0;
  }
  for (int p = 0; p < pairs; ++p) {
    Eigen::VectorXcd nxt(v.size() * vi.size());
    for (Eigen::Index a = 0; a < v.size(); ++a) {
      nxt.segment(a * vi.size(), vi.size()) = v(a) * vi;
    }
    v = nxt;
  }
  return v;
}

// Exact continuum moments E[ (Tr Z Z^*)^m ] under mu_{s,tau}; m = 1 gives
// 2 e^{3t/2}, and every m depends on tau only through t = Re tau. Unlike the
// single-pair case the multi-pair lift is not Hermitian when u != 0, so the
// exponential goes through the general Pade route.
inline double nu_moment_exact(const TimeParams& p, int m) {
  const LiftedOps ops = multi_lifted_ops(irrep(2), m);
  const MatrixX lap = lift_laplacian_stau(ops, p);
  const MatrixX e = (0.5 * lap).exp();
  const Eigen::VectorXcd v = pair_vec_identity(2, m);
  return (v.adjoint() * e * v)(0).real();
}

inline double expect_trace_zzstar(const TimeParams& p) {
  return nu_moment_exact(p, 1);
}

// The same moments for the discretized sampler with n_steps steps.
inline double nu_moment_discrete(const TimeParams& p, int m, int n_steps,
                                 int gh_order = 8) {
  const MatrixX step = discrete_step_pair(irrep(2), p, 1.0 / n_steps, m, gh_order);
  const MatrixX tn = matrix_power(step, n_steps);
  const Eigen::VectorXcd v = pair_vec_identity(2, m);
  return (v.adjoint() * tn * v)(0).real();
}

// Discrete-scheme value of E[ |F(Z_1)|^2 ] for an entry function.
inline double norm_sq_mu_discrete(const MatrixEntryFn& f, const TimeParams& p,
                                  int n_steps, int gh_order = 8) {
  const MatrixX step = discrete_step_pair(f.rep, p, 1.0 / n_steps, 1, gh_order);
  const MatrixX tn = matrix_power(step, n_steps);
  return (tn * pair_state(f.coeff)).trace().real();
}

}  // namespace ctsbt
