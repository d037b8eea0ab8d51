#pragma once

#include <complex>

#include <Eigen/Dense>

namespace bures {

using Complex = std::complex<double>;
using Mat2C = Eigen::Matrix2cd;
using Vec2C = Eigen::Vector2cd;

/// Tolerance for purely algebraic identities (symplecticity, annihilation).
inline constexpr double kStructuralTol = 1e-12;
/// Default tolerance for comparisons between physical quantities.
inline constexpr double kDefaultPhysicalTol = 1e-8;

/// One single-mode displaced squeezed thermal state
///   rho = D(k) S(r) rho_th(beta) S(r)^dagger D(k)^dagger
/// with D(k) = exp(k a^dagger - k^* a), S(r) = exp(r/2 (a^2 - a^dagger^2)) and
/// rho_th proportional to exp(-beta a^dagger a).
///
/// beta must be finite and strictly positive. The squeeze phase is reserved and
/// must be zero.
class StateParams {
 public:
  static StateParams from_beta(Complex k, double r, double beta, double phase = 0.0);
  static StateParams from_nbar(Complex k, double r, double nbar, double phase = 0.0);

  Complex k() const noexcept { return k_; }
  double r() const noexcept { return r_; }
  double beta() const noexcept { return beta_; }
  double phase() const noexcept { return 0.0; }
  /// Mean thermal photon number 1/(e^beta - 1) of the undisplaced, unsqueezed core.
  double nbar() const;

  StateParams with_k(Complex k) const;

 private:
  StateParams(Complex k, double r, double beta) : k_(k), r_(r), beta_(beta) {}

  Complex k_;
  double r_;
  double beta_;
};

/// The column (v1, v2) multiplying (a^dagger, a). Vectors built from one
/// scalar have conjugate-pair form v2 = -conj(v1).
class PairVec {
 public:
  explicit PairVec(Complex g) : v_(g, -std::conj(g)) {}

  /// Accepts a general 2-vector, checking the conjugate-pair form to tol
  /// (relative to the vector norm). Throws ContractViolation otherwise.
  static PairVec from_vector(const Vec2C& v, double tol);

  Complex scalar() const noexcept { return v_(0); }
  const Vec2C& vec() const noexcept { return v_; }

 private:
  PairVec() = default;
  Vec2C v_;
};

inline PairVec pair_vec(Complex g) { return PairVec(g); }

/// Sigma = [[0, 1], [-1, 0]].
const Mat2C& symplectic_form();

/// M(r) = [[cosh r, -sinh r], [-sinh r, cosh r]], the matrix of
/// S(r)^dagger (a^dagger, a) S(r) = (a^dagger, a) M(r).
Mat2C squeeze_matrix(double r);

/// C(r) with S(r) (a^dagger, a) S(r)^dagger = (a^dagger, a) C(r); C(r) = M(r)^{-1} = M(-r).
Mat2C squeeze_conjugation(double r);

/// B(beta)^power = diag(exp(-power beta), exp(power beta)) for power in
/// {-1, -1/2, 1/2, 1}. Throws DomainError for beta <= 0 or other powers.
Mat2C thermal_matrix(double beta, double power);

/// max |m^T Sigma m - Sigma| <= tol.
bool check_symplectic(const Mat2C& m, double tol = kStructuralTol);

/// u^T Sigma v (plain transpose, no conjugation).
Complex symplectic_product(const Vec2C& u, const Vec2C& v);

// Numerically careful hyperbolic helpers shared by the closed forms.
double log_sinh(double x);  // x > 0
double log_cosh(double x);
/// log(exp(a) + exp(b)).
double log_add_exp(double a, double b);

}  // namespace bures
