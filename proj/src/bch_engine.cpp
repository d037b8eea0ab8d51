#include "bures/bch_engine.hpp"

namespace bures {

Complex commutator_scalar(const Mat2C& n1, const Vec2C& v1, const Mat2C& n2, const Vec2C& v2) {
  return -symplectic_product(n1 * v1, n2 * v2);
}

MergeResult bch_merge(const LinExpOp& op1, const LinExpOp& op2) {
  const Vec2C x = op1.exponent();
  const Vec2C y = op2.exponent();
  const Complex half_commutator = 0.5 * commutator_scalar(Mat2C::Identity(), x, Mat2C::Identity(), y);
  return {op1.log_scalar + op2.log_scalar + half_commutator, x + y};
}

DisplacementComposition displacement_compose(Complex k1, Complex k2, GConvention convention) {
  // D(k1)^dagger = D(-k1)
  const MergeResult merged = bch_merge(LinExpOp::displacement(-k1), LinExpOp::displacement(k2));
  Complex g = merged.combined_vec(0);
  if (convention == GConvention::PrintedConjugate) g = k2 - std::conj(k1);
  // The commutator of two conjugate-pair exponents is purely imaginary.
  return {g, Complex(0.0, merged.scalar_log.imag())};
}

}  // namespace bures
