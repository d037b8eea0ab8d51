#include "bures/core_algebra.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "bures/errors.hpp"

namespace bures {

namespace {

void require_finite(double x, const char* name) {
  if (!std::isfinite(x)) {
    throw DomainError(fmt::format("{} must be finite (got {})", name, x));
  }
}

void validate(Complex k, double r, double beta, double phase) {
  require_finite(k.real(), "Re(k)");
  require_finite(k.imag(), "Im(k)");
  require_finite(r, "r");
  if (std::isnan(beta)) throw DomainError("beta must not be NaN");
  if (beta == std::numeric_limits<double>::infinity()) {
    throw PureStateLimitError("beta = +inf (pure state) is not supported; use a large finite beta");
  }
  if (beta == 0.0) {
    throw InfiniteTemperatureError("beta = 0 (infinite temperature) has no normalisable thermal state");
  }
  if (beta < 0.0) throw DomainError(fmt::format("beta must be > 0 (got {})", beta));
  if (phase != 0.0) {
    throw DomainError("nonzero squeeze phase is not supported; the phase field must be exactly 0");
  }
}

}  // namespace

StateParams StateParams::from_beta(Complex k, double r, double beta, double phase) {
  validate(k, r, beta, phase);
  return StateParams(k, r, beta);
}

StateParams StateParams::from_nbar(Complex k, double r, double nbar, double phase) {
  if (!std::isfinite(nbar)) {
    throw InfiniteTemperatureError(fmt::format("nbar must be finite (got {})", nbar));
  }
  if (nbar == 0.0) {
    throw PureStateLimitError("nbar = 0 (pure state) is not supported; use a small positive nbar");
  }
  if (nbar < 0.0) throw DomainError(fmt::format("nbar must be > 0 (got {})", nbar));
  return from_beta(k, r, std::log1p(1.0 / nbar), phase);
}

double StateParams::nbar() const { return 1.0 / std::expm1(beta_); }

StateParams StateParams::with_k(Complex k) const { return from_beta(k, r_, beta_); }

PairVec PairVec::from_vector(const Vec2C& v, double tol) {
  const double scale = std::max(1.0, v.norm());
  if (std::abs(v(1) + std::conj(v(0))) > tol * scale) {
    throw ContractViolation(
        fmt::format("vector is not of conjugate-pair form (deviation {:.3e})",
                    std::abs(v(1) + std::conj(v(0)))));
  }
  PairVec out;
  out.v_ = v;
  return out;
}

const Mat2C& symplectic_form() {
  static const Mat2C sigma = [] {
    Mat2C s;
    s << 0.0, 1.0, -1.0, 0.0;
    return s;
  }();
  return sigma;
}

Mat2C squeeze_matrix(double r) {
  Mat2C m;
  m << std::cosh(r), -std::sinh(r), -std::sinh(r), std::cosh(r);
  return m;
}

Mat2C squeeze_conjugation(double r) { return squeeze_matrix(-r); }

Mat2C thermal_matrix(double beta, double power) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw DomainError(fmt::format("thermal_matrix: beta must be finite and > 0 (got {})", beta));
  }
  if (power != -1.0 && power != -0.5 && power != 0.5 && power != 1.0) {
    throw DomainError(fmt::format("thermal_matrix: unsupported power {}", power));
  }
  Mat2C b = Mat2C::Zero();
  b(0, 0) = std::exp(-power * beta);
  b(1, 1) = std::exp(power * beta);
  return b;
}

bool check_symplectic(const Mat2C& m, double tol) {
  const Mat2C& sigma = symplectic_form();
  const Mat2C residual = m.transpose() * sigma * m - sigma;
  return residual.cwiseAbs().maxCoeff() <= tol;
}

Complex symplectic_product(const Vec2C& u, const Vec2C& v) { return u(0) * v(1) - u(1) * v(0); }

double log_sinh(double x) {
  // sinh x = e^x (1 - e^{-2x}) / 2
  if (x > 20.0) return x + std::log1p(-std::exp(-2.0 * x)) - std::log(2.0);
  return std::log(std::sinh(x));
}

double log_cosh(double x) {
  x = std::abs(x);
  return x + std::log1p(std::exp(-2.0 * x)) - std::log(2.0);
}

double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace bures
