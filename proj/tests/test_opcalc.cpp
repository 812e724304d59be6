#include "ctsbt/opcalc.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <vector>

using namespace ctsbt;

namespace {

MatrixEntryFn random_entry_fn(int n, CounterRng& rng) {
  MatrixX a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = complexd{rng.normal(), rng.normal()};
  }
  return {irrep(n), a};
}

double abs2_at(const MatrixEntryFn& f, const Matrix2& z) {
  return std::norm(f.eval(z));
}

std::vector<TimeParams> small_param_grid() {
  return {
      {1.0, {1.0, 0.0}},  {0.7, {0.9, 0.3}},  {1.4, {1.1, -0.6}},
      {3.0, {2.0, 1.2}},  {2.0, {3.1, 0.4}},
  };
}

}  // namespace

TEST(OpCalc, KronBasics) {
  MatrixX a(2, 2), b(2, 2);
  a << 1.0, 2.0, 3.0, 4.0;
  b << 0.0, 1.0, complexd{0.0, 1.0}, 2.0;
  const MatrixX k = kron(a, b);
  ASSERT_EQ(k.rows(), 4);
  EXPECT_EQ(k(0, 1), complexd(1.0, 0.0));
  EXPECT_EQ(k(1, 0), complexd(0.0, 1.0));
  EXPECT_EQ(k(2, 1), complexd(3.0, 0.0) * b(0, 1));
  EXPECT_NEAR(std::abs(k.trace() - a.trace() * b.trace()), 0.0, 1e-14);
  MatrixX c(2, 2), d(2, 2);
  c << 2.0, 0.0, 1.0, 1.0;
  d << 1.0, 1.0, 0.0, complexd{0.0, -1.0};
  EXPECT_LT((kron(a, b) * kron(c, d) - kron(a * c, b * d)).norm(), 1e-13);
}

TEST(OpCalc, ExpTraceless2x2MatchesPade) {
  CounterRng rng(21, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix2 w = random_sl2(rng);
    EXPECT_LT((exp_traceless_2x2(w) - w.exp()).norm(), 1e-13 * w.exp().norm());
    const Matrix2 tiny = 1e-8 * w;
    EXPECT_LT((exp_traceless_2x2(tiny) - tiny.exp()).norm(), 1e-15);
  }
}

TEST(OpCalc, RepGroupFastMatchesGeneric) {
  CounterRng rng(22, 0);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix2 w = random_sl2(rng);
    w *= 0.6 / std::max(1.0, w.norm());
    const Matrix2 g = w.exp();
    for (int n : {1, 2, 3}) {
      const Irrep r = irrep(n);
      EXPECT_LT((rep_group_fast(r, g) - rep_group(r, g)).norm(), 1e-11) << n;
    }
  }
}

TEST(OpCalc, LiftedFirstOrderMatchesDirectionalDerivative) {
  CounterRng rng(23, 0);
  const MatrixEntryFn f = random_entry_fn(3, rng);
  const LiftedOps ops = lifted_ops(f.rep);
  Matrix2 wz = random_sl2(rng);
  wz *= 0.4 / std::max(1.0, wz.norm());
  const Matrix2 z = wz.exp();
  const MatrixX sigma_z =
      kron(rep_group(f.rep, z), rep_group(f.rep, z).conjugate());
  const MatrixX s = pair_state(f.coeff);

  std::vector<Matrix2> dirs = {su2_basis()[0], complexd{0.0, 1.0} * su2_basis()[1]};
  dirs.push_back(0.3 * su2_basis()[2] +
                 complexd{0.0, -0.8} * su2_basis()[0]);
  const double h = 1e-5;
  for (const auto& w : dirs) {
    const double num =
        (abs2_at(f, z * (h * w).exp()) - abs2_at(f, z * (-h * w).exp())) /
        (2.0 * h);
    const double lift = (sigma_z * lift_vector(ops, w) * s).trace().real();
    EXPECT_NEAR(num, lift, 1e-5 * std::max(1.0, std::abs(lift)));
  }
}

TEST(OpCalc, LiftedSecondOrderMatchesLaplacian) {
  CounterRng rng(24, 0);
  const MatrixEntryFn f = random_entry_fn(2, rng);
  const LiftedOps ops = lifted_ops(f.rep);
  const TimeParams p{1.2, {0.9, 0.4}};
  const auto frame = frame_abc(time_to_metric(p));

  Matrix2 wz = random_sl2(rng);
  wz *= 0.3 / std::max(1.0, wz.norm());
  for (const Matrix2& z : {Matrix2(Matrix2::Identity()), Matrix2(wz.exp())}) {
    const MatrixX sigma_z =
        kron(rep_group(f.rep, z), rep_group(f.rep, z).conjugate());
    const MatrixX s = pair_state(f.coeff);
    const double h = 1e-4;
    double num = 0.0;
    for (const auto& v : frame) {
      num += (abs2_at(f, z * (h * v).exp()) - 2.0 * abs2_at(f, z) +
              abs2_at(f, z * (-h * v).exp())) /
             (h * h);
    }
    const double lift =
        (sigma_z * lift_laplacian_stau(ops, p) * s).trace().real();
    EXPECT_NEAR(num, lift, 1e-4 * std::max(1.0, std::abs(lift)));
  }
}

TEST(OpCalc, LiftedBracketsFollowAlgebra) {
  const LiftedOps ops = lifted_ops(irrep(4));
  const auto br = [](const MatrixX& x, const MatrixX& y) { return x * y - y * x; };
  const double r2 = std::sqrt(2.0);
  EXPECT_LT((br(ops.m_e[0], ops.m_e[1]) + r2 * ops.m_e[2]).norm(), 1e-11);
  EXPECT_LT((br(ops.m_e[0], ops.m_je[1]) + r2 * ops.m_je[2]).norm(), 1e-11);
  EXPECT_LT(br(ops.m_e[0], ops.m_je[0]).norm(), 1e-12);
  // J e_a directions commute up to -[e_a, e_b]: [Je_1, Je_2] = +sqrt2 e_3
  EXPECT_LT((br(ops.m_je[0], ops.m_je[1]) - r2 * ops.m_e[2]).norm(), 1e-11);
}

TEST(OpCalc, PairLiftCasimirSpectrum) {
  // pi_n (x) conj(pi_n) splits into odd dimensions 1, 3, ..., 2n-1; the
  // lifted K-Laplacian must have eigenvalue -(m^2-1)/2 with multiplicity m.
  for (int n : {2, 3}) {
    const LiftedOps ops = lifted_ops(irrep(n));
    const MatrixX lap = lift_laplacian_k(ops);
    EXPECT_LT((lap - lap.adjoint()).norm(), 1e-12);
    Eigen::SelfAdjointEigenSolver<MatrixX> es(lap);
    std::vector<double> expect;
    for (int m = 1; m <= 2 * n - 1; m += 2) {
      for (int k = 0; k < m; ++k) expect.push_back(-0.5 * (double(m) * m - 1.0));
    }
    std::sort(expect.begin(), expect.end());
    for (std::size_t i = 0; i < expect.size(); ++i) {
      EXPECT_NEAR(es.eigenvalues()(Eigen::Index(i)), expect[i], 1e-11);
    }
    // holomorphic/antiholomorphic second-order parts are the scalar Casimir
    const double cn = 0.5 * (double(n) * n - 1.0);
    const MatrixX id = MatrixX::Identity(ops.dim, ops.dim);
    EXPECT_LT((lift_dsq(ops) + cn * id).norm(), 1e-11);
    EXPECT_LT((lift_dbarsq(ops) + cn * id).norm(), 1e-11);
  }
}

TEST(OpCalc, OperatorIdentityHolds) {
  for (const auto& p : small_param_grid()) {
    for (int n : {2, 3, 4}) {
      EXPECT_LT(lift_identity_residual(lifted_ops(irrep(n)), p), 1e-12)
          << n << " s=" << p.s;
    }
  }
  // also on the two-pair lift
  EXPECT_LT(lift_identity_residual(multi_lifted_ops(irrep(2), 2),
                                   {1.3, {0.8, -0.5}}),
            1e-12);
}

TEST(OpCalc, StauLiftDependsOnlyOnRealPart) {
  // On the single-pair lift the u-dependence cancels identically.
  const LiftedOps ops = lifted_ops(irrep(3));
  const MatrixX l0 = lift_laplacian_stau(ops, {1.5, {0.9, 0.0}});
  const MatrixX lp = lift_laplacian_stau(ops, {1.5, {0.9, 0.7}});
  const MatrixX lm = lift_laplacian_stau(ops, {1.5, {0.9, -0.7}});
  EXPECT_LT((lp - l0).norm(), 1e-11 * l0.norm());
  EXPECT_LT((lm - l0).norm(), 1e-11 * l0.norm());
  EXPECT_LT((l0 - l0.adjoint()).norm(), 1e-11 * l0.norm());
}

TEST(OpCalc, NormRhoSMatchesHaarQuadrature) {
  CounterRng rng(25, 0);
  const HaarRule rule = haar_quadrature(24);
  for (int n : {2, 3}) {
    const MatrixEntryFn f = random_entry_fn(n, rng);
    for (double s : {0.6, 1.5}) {
      double quad = 0.0;
      rule.for_each([&](const Matrix2& k, double w) {
        quad += w * std::norm(f.eval(k)) * heat_kernel_su2(s, k);
      });
      const double exact = norm_sq_rho_s(f, s);
      EXPECT_NEAR(quad, exact, 1e-9 * std::max(1.0, exact)) << n << "," << s;
    }
  }
}

TEST(OpCalc, NormL2KMatchesHaarQuadrature) {
  CounterRng rng(26, 0);
  const HaarRule rule = haar_quadrature(8);
  for (int n : {1, 2, 3, 4}) {
    const MatrixEntryFn f = random_entry_fn(n, rng);
    double quad = 0.0;
    rule.for_each([&](const Matrix2& k, double w) {
      quad += w * std::norm(f.eval(k));
    });
    const double exact = norm_sq_l2k(f);
    EXPECT_NEAR(quad, exact, 1e-11 * std::max(1.0, exact)) << n;
  }
}

TEST(OpCalc, TransformIsometry) {
  CounterRng rng(27, 0);
  for (int n : {1, 2, 3, 4, 5}) {
    const MatrixEntryFn f = random_entry_fn(n, rng);
    for (const auto& p : small_param_grid()) {
      const MatrixEntryFn bf = transform_me(f, p.tau);
      const double lhs = norm_sq_mu_stau(bf, p);
      const double rhs = norm_sq_rho_s(f, p.s);
      EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, rhs)) << n << " s=" << p.s;
    }
  }
}

TEST(OpCalc, TransformPreimageRoundTrip) {
  CounterRng rng(28, 0);
  const MatrixEntryFn target = random_entry_fn(3, rng);
  const complexd tau{1.0, 0.4};
  const MatrixEntryFn pre = transform_preimage(target, tau);
  const MatrixEntryFn back = transform_me(pre, tau);
  EXPECT_LT((back.coeff - target.coeff).norm(), 1e-13 * target.coeff.norm());
}

TEST(OpCalc, TransformQuadratureMatchesExact) {
  CounterRng rng(29, 0);
  std::vector<Matrix2> points;
  for (int i = 0; i < 2; ++i) {
    Matrix2 w = random_sl2(rng);
    w *= 0.5 / std::max(1.0, w.norm());
    points.push_back(w.exp());
  }
  for (int n : {2, 3}) {
    const MatrixEntryFn f = random_entry_fn(n, rng);
    for (const complexd tau : {complexd{1.0, 0.0}, complexd{1.0, 0.5},
                               complexd{1.0, -0.5}}) {
      const MatrixEntryFn bf = transform_me(f, tau);
      for (const auto& z : points) {
        const complexd exact = bf.eval(z);
        const complexd quad = transform_quadrature_su2(f, tau, z, 32);
        EXPECT_NEAR(std::abs(quad - exact), 0.0,
                    1e-9 * std::max(1.0, std::abs(exact)))
            << n << " tau=" << tau;
      }
    }
  }
}

TEST(OpCalc, ExpectTraceZZStarClosedForm) {
  for (const auto& p : small_param_grid()) {
    const double expect = 2.0 * std::exp(1.5 * p.t());
    EXPECT_NEAR(expect_trace_zzstar(p), expect, 1e-10 * expect) << p.s;
  }
}

TEST(OpCalc, NuMomentsDependOnlyOnT) {
  // K-averaging invariance: moments of Tr(Z Z^*) under mu_{s,tau} are
  // functions of t = Re tau alone.
  const double t = 0.9;
  const std::vector<TimeParams> same_t = {
      {1.0, {t, 0.0}}, {2.5, {t, 0.6}}, {0.8, {t, -0.3}}, {4.0, {t, 1.5}}};
  for (int m : {1, 2}) {
    const double ref = nu_moment_exact(same_t.front(), m);
    for (const auto& p : same_t) {
      EXPECT_NEAR(nu_moment_exact(p, m), ref, 1e-9 * std::abs(ref)) << m;
    }
  }
  // and they do change when t changes
  EXPECT_GT(std::abs(nu_moment_exact({1.0, {1.4, 0.0}}, 1) -
                     nu_moment_exact({1.0, {0.9, 0.0}}, 1)),
            1e-2);
}

TEST(OpCalc, DiscreteStepApproximatesGenerator) {
  const TimeParams p{1.0, {0.8, 0.3}};
  const LiftedOps ops = lifted_ops(irrep(2));
  const MatrixX lap = lift_laplacian_stau(ops, p);
  const MatrixX id = MatrixX::Identity(ops.dim, ops.dim);
  const double r1 = (discrete_step_pair(irrep(2), p, 0.01) - id - 0.005 * lap).norm();
  const double r2 =
      (discrete_step_pair(irrep(2), p, 0.005) - id - 0.0025 * lap).norm();
  // second-order remainder: residual ~ C h^2
  EXPECT_LT(r1, 1e-2);
  EXPECT_LT(r2, r1 / 2.5);
}

TEST(OpCalc, DiscreteMomentsApproachContinuum) {
  const TimeParams p{1.0, {1.0, 0.0}};
  const double exact = expect_trace_zzstar(p);
  const double d200 = nu_moment_discrete(p, 1, 200);
  const double d800 = nu_moment_discrete(p, 1, 800);
  EXPECT_NEAR(d200, exact, 0.02 * exact);
  EXPECT_NEAR(d800, exact, 0.006 * exact);
  EXPECT_LT(std::abs(d800 - exact), std::abs(d200 - exact));
}

TEST(OpCalc, NormMuDiscreteTracksExact) {
  CounterRng rng(30, 0);
  const TimeParams p{1.2, {0.9, -0.4}};
  for (int n : {2, 3}) {
    const MatrixEntryFn f = random_entry_fn(n, rng);
    const MatrixEntryFn bf = transform_me(f, p.tau);
    const double exact = norm_sq_mu_stau(bf, p);
    const double disc = norm_sq_mu_discrete(bf, p, 200);
    EXPECT_NEAR(disc, exact, 0.03 * std::abs(exact)) << n;
  }
}
