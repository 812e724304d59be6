// Applies the complex-time transform to one matrix entry and evaluates the
// result at a group-complexification point, by closed form and by kernel
// convolution, then shows the norm identity the transform preserves.

#include <cstdio>

#include "ctsbt/opcalc.hpp"

using namespace ctsbt;

int main() {
  const TimeParams p{1.2, {0.9, 0.4}};
  const Irrep rep = irrep(3);

  MatrixX a = MatrixX::Zero(3, 3);
  a(0, 0) = 1.0;
  a(1, 2) = complexd(0.5, -0.25);
  const MatrixEntryFn f{rep, a};

  CounterRng rng(42, 0);
  Matrix2 w = random_sl2(rng);
  w *= 0.4 / w.norm();
  const Matrix2 z = exp_traceless_2x2(w);

  const MatrixEntryFn bf = transform_me(f, p.tau);
  const complexd exact = bf.eval(z);
  const complexd quad = transform_quadrature_su2(f, p.tau, z, 32);

  std::printf("s = %g, tau = %g%+gi\n", p.s, p.t(), p.u());
  std::printf("transform at z:  closed form %.12f%+.12fi\n", exact.real(),
              exact.imag());
  std::printf("                 convolution %.12f%+.12fi\n", quad.real(),
              quad.imag());

  const double before = norm_sq_rho_s(f, p.s);
  const double after = norm_sq_mu_stau(bf, p);
  std::printf("norm sq before:  %.12f\n", before);
  std::printf("norm sq after:   %.12f (isometry defect %.2e)\n", after,
              std::abs(after - before) / before);
  return 0;
}
