#pragma once

#include "bures/core_algebra.hpp"

namespace bures {

/// exp(log_scalar) * exp[(a^dagger, a) * coeff * vec].
///
/// Only exponents linear in a and a^dagger are representable, so the
/// commutator of any two exponents is a c-number and the merge below is exact.
struct LinExpOp {
  Complex log_scalar{0.0, 0.0};
  Mat2C coeff = Mat2C::Identity();
  Vec2C vec = Vec2C::Zero();

  /// coeff * vec: the coefficients of (a^dagger, a) in the exponent.
  Vec2C exponent() const { return coeff * vec; }

  static LinExpOp displacement(Complex k) { return {Complex{}, Mat2C::Identity(), pair_vec(k).vec()}; }
};

struct MergeResult {
  Complex scalar_log;
  Vec2C combined_vec;
};

/// The c-number [Omega1, Omega2] for Omega_i = (a^dagger, a) n_i v_i, i.e.
/// -(n1 v1)^T Sigma (n2 v2).
Complex commutator_scalar(const Mat2C& n1, const Vec2C& v1, const Mat2C& n2, const Vec2C& v2);

/// e^{X} e^{Y} = e^{[X, Y]/2} e^{X+Y}, exact for scalar commutators.
MergeResult bch_merge(const LinExpOp& op1, const LinExpOp& op2);

enum class GConvention {
  Difference,          // g = k2 - k1
  PrintedConjugate,    // g = k2 - conj(k1), as printed; kept for comparison only
};

struct DisplacementComposition {
  Complex g;
  /// log c in D(k1)^dagger D(k2) = c D(g); purely imaginary.
  Complex c_log;
};

/// D(k1)^dagger D(k2) = c * D(g). c_log always refers to the exact composition;
/// the convention only selects which g is reported.
DisplacementComposition displacement_compose(Complex k1, Complex k2,
                                             GConvention convention = GConvention::Difference);

}  // namespace bures
