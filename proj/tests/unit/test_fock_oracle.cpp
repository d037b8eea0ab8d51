#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "bures/errors.hpp"
#include "bures/fock_oracle.hpp"

using namespace bures;
using namespace bures::fock;

namespace {

Complex expect(const FockMatrix& rho, const FockMatrix& op) { return (rho * op).trace(); }

double max_abs(const FockMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Ladder, SmallCutoffs) {
  const FockMatrix a2 = annihilation(2);
  EXPECT_EQ(a2(0, 1), Complex(1.0));
  EXPECT_EQ(a2(0, 0), Complex(0.0));
  EXPECT_EQ(a2(1, 0), Complex(0.0));
  EXPECT_EQ(a2(1, 1), Complex(0.0));

  const FockMatrix a3 = annihilation(3);
  const FockMatrix comm = a3 * creation(3) - creation(3) * a3;
  EXPECT_NEAR(comm(0, 0).real(), 1.0, 1e-15);
  EXPECT_NEAR(comm(1, 1).real(), 1.0, 1e-15);
  EXPECT_NEAR(comm(2, 2).real(), -2.0, 1e-15);
}

TEST(Ladder, NumberOperator) {
  const FockMatrix n = creation(40) * annihilation(40);
  for (int i = 0; i < 40; ++i) EXPECT_NEAR(n(i, i).real(), i, 1e-13);
}

TEST(MatrixExp, Basics) {
  EXPECT_LT(max_abs(matrix_exp(FockMatrix(FockMatrix::Zero(5, 5))) - FockMatrix::Identity(5, 5)), 1e-16);
  Eigen::VectorXcd d(4);
  d << Complex(0.5, 0.0), Complex(-3.0, 1.0), Complex(0.0, 2.0), Complex(6.0, 0.0);
  const FockMatrix e = matrix_exp(FockMatrix(d.asDiagonal()));
  for (int i = 0; i < 4; ++i) EXPECT_LT(std::abs(e(i, i) - std::exp(d(i))) / std::abs(std::exp(d(i))), 1e-14);
  const Complex k{0.4, 0.0};
  const FockMatrix gen = k * creation(60) - std::conj(k) * annihilation(60);
  const FockMatrix u = matrix_exp(gen);
  EXPECT_LT(max_abs(u.adjoint() * u - FockMatrix::Identity(60, 60)), 1e-10);
}

TEST(MatrixExp, RealAndComplexAgree) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Random(6, 6) * 3.0;
  EXPECT_LT(max_abs(matrix_exp(FockMatrix(m.cast<Complex>())) - matrix_exp(m).cast<Complex>()), 1e-10);
}

TEST(Displacement, ZeroIsIdentityAndPoissonPopulations) {
  EXPECT_LT(max_abs(displacement_op(0.0, 10) - FockMatrix::Identity(10, 10)), 1e-15);
  const Complex k = std::polar(1.2, 0.7);
  const double m = std::norm(k);
  const int n = static_cast<int>(std::ceil(8 * m + 30));
  const Eigen::VectorXcd psi = displacement_op(k, n).col(0);
  double log_fact = 0.0;
  for (int i = 0; i < 25; ++i) {
    if (i > 0) log_fact += std::log(i);
    const double poisson = std::exp(-m + i * std::log(m) - log_fact);
    EXPECT_NEAR(std::norm(psi(i)), poisson, 1e-8) << i;
  }
  // Coherent amplitudes carry the phase of k^n.
  EXPECT_NEAR(std::arg(psi(1)), 0.7, 1e-10);
}

TEST(Squeeze, EvenParityVacuum) {
  const Eigen::VectorXcd psi = squeeze_op(0.8, 80).col(0);
  for (int i = 1; i < 80; i += 2) EXPECT_EQ(std::abs(psi(i)), 0.0) << i;
  // <0|S(r)|0> = 1/sqrt(cosh r)
  EXPECT_NEAR(psi(0).real(), 1.0 / std::sqrt(std::cosh(0.8)), 1e-10);
  // Sign of the two-photon amplitude fixes the squeeze convention: <2|S|0> = -tanh(r)/sqrt(2 cosh r).
  EXPECT_NEAR(psi(2).real(), -std::tanh(0.8) / std::sqrt(2.0 * std::cosh(0.8)), 1e-10);
}

TEST(Thermal, Limits) {
  const FockMatrix cold = thermal_state(20.0, 5);
  EXPECT_NEAR(cold(0, 0).real(), 1.0, 1e-8);
  const double b = std::log(2.0);
  const FockMatrix t = thermal_state(b, thermal_cutoff(b));
  for (int i = 0; i < 30; ++i) EXPECT_NEAR(t(i, i).real(), std::pow(0.5, i + 1), 1e-15);
  for (double beta : {0.3, 1.0, 4.0}) {
    const int n = thermal_cutoff(beta);
    const FockMatrix rho = thermal_state(beta, n);
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += i * rho(i, i).real();
    EXPECT_NEAR(mean, 1.0 / std::expm1(beta), 1e-10) << beta;
  }
}

TEST(Thermal, RejectsShortCutoff) {
  try {
    thermal_state(0.5, 10);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find(std::to_string(thermal_cutoff(0.5))), std::string::npos) << e.what();
  }
}

TEST(DstState, Reductions) {
  const auto s = StateParams::from_beta(0.0, 0.0, 1.3);
  const int n = thermal_cutoff(1.3);
  EXPECT_LT(max_abs(dst_state(s, n) - thermal_state(1.3, n)), 1e-15);

  const auto coherent = StateParams::from_beta(0.5, 0.0, 20.0);
  const FockMatrix rho = dst_state(coherent, 40);
  EXPECT_NEAR((rho * rho).trace().real(), 1.0, 1e-6);
}

TEST(DstState, GaussianMoments) {
  struct Case {
    Complex k;
    double r, nbar;
  };
  for (const Case c : {Case{{0.3, -0.2}, 0.4, 0.5}, Case{{-0.7, 0.1}, 0.9, 1.2}, Case{{0.0, 1.0}, 0.2, 0.1}}) {
    const auto s = StateParams::from_nbar(c.k, c.r, c.nbar);
    const int n = 320;
    const FockMatrix rho = dst_state(s, n);
    const FockMatrix a = annihilation(n);
    const double ch = std::cosh(c.r), sh = std::sinh(c.r);
    EXPECT_LT(std::abs(expect(rho, a) - c.k), 1e-8);
    EXPECT_LT(std::abs(expect(rho, a * a) - (c.k * c.k - ch * sh * (2 * c.nbar + 1))), 1e-8);
    const double number = ch * ch * c.nbar + sh * sh * (c.nbar + 1) + std::norm(c.k);
    EXPECT_LT(std::abs(expect(rho, a.adjoint() * a) - number), 1e-8);
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-10);
  }
}

TEST(DstState, PurityIsThermalPurity) {
  for (double nbar : {0.1, 0.5, 2.0}) {
    const double target = 1.0 / (2 * nbar + 1);
    const auto bare = StateParams::from_nbar(0.0, 0.0, nbar);
    const FockMatrix t = dst_state(bare, thermal_cutoff(bare.beta()));
    EXPECT_NEAR((t * t).trace().real(), target, 1e-8);
    const auto dressed = StateParams::from_nbar({0.4, 0.3}, 0.5, nbar);
    const FockMatrix rho = dst_state(dressed, 220);
    EXPECT_NEAR((rho * rho).trace().real(), target, 1e-8) << nbar;
  }
}

TEST(Uhlmann, Examples) {
  const auto s = StateParams::from_nbar({0.2, 0.1}, 0.3, 0.8);
  const FockMatrix rho = dst_state(s, 90);
  EXPECT_NEAR(uhlmann_fidelity(rho, rho).fidelity, 1.0, 1e-10);

  FockMatrix p0 = FockMatrix::Zero(4, 4), p1 = FockMatrix::Zero(4, 4);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  EXPECT_NEAR(uhlmann_fidelity(p0, p1).fidelity, 0.0, 1e-12);

  const Complex k1{0.3, 0.1}, k2{-0.5, 0.4};
  const FockMatrix c1 = dst_state(StateParams::from_beta(k1, 0.0, 20.0), 50);
  const FockMatrix c2 = dst_state(StateParams::from_beta(k2, 0.0, 20.0), 50);
  EXPECT_NEAR(uhlmann_fidelity(c1, c2).fidelity, std::exp(-std::norm(k1 - k2)), 1e-5);
}

TEST(Uhlmann, RejectsNonDensityInput) {
  FockMatrix bad = FockMatrix::Identity(3, 3);
  const FockMatrix good = FockMatrix::Identity(3, 3) / 3.0;
  EXPECT_THROW(uhlmann_fidelity(bad, good), ContractViolation);
  FockMatrix skew = good;
  skew(0, 1) = Complex(0.0, 0.1);
  EXPECT_THROW(uhlmann_fidelity(skew, good), ContractViolation);
}

TEST(Uhlmann, BoundsSymmetryAndUnitaryInvariance) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> uk(-0.6, 0.6), ur(0.0, 0.6), un(0.1, 1.0);
  const int n = 120;
  for (int i = 0; i < 6; ++i) {
    const auto s1 = StateParams::from_nbar({uk(rng), uk(rng)}, ur(rng), un(rng));
    const auto s2 = StateParams::from_nbar({uk(rng), uk(rng)}, ur(rng), un(rng));
    const FockMatrix r1 = dst_state(s1, n), r2 = dst_state(s2, n);
    const double f12 = uhlmann_fidelity(r1, r2).fidelity;
    const double f21 = uhlmann_fidelity(r2, r1).fidelity;
    EXPECT_GE(f12, 0.0);
    EXPECT_LE(f12, 1.0 + 1e-9);
    EXPECT_NEAR(f12, f21, 1e-9);
    // A small common displacement applied inside the truncated space.
    const FockMatrix u = displacement_op({0.2, -0.1}, n);
    FockMatrix u1 = u * r1 * u.adjoint(), u2 = u * r2 * u.adjoint();
    u1 = 0.5 * (u1 + u1.adjoint());
    u2 = 0.5 * (u2 + u2.adjoint());
    u1 /= u1.trace().real();
    u2 /= u2.trace().real();
    EXPECT_NEAR(uhlmann_fidelity(u1, u2).fidelity, f12, 1e-8);
  }
}

TEST(Uhlmann, FactoredFormMatchesLiteral) {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> uk(-0.6, 0.6), ur(0.0, 0.6), un(0.3, 1.0);
  const int n = 100;
  for (int i = 0; i < 5; ++i) {
    const auto s1 = StateParams::from_nbar({uk(rng), uk(rng)}, ur(rng), un(rng));
    const auto s2 = StateParams::from_nbar({uk(rng), uk(rng)}, ur(rng), un(rng));
    const double literal = uhlmann_fidelity(dst_state(s1, n), dst_state(s2, n)).fidelity;
    const double factored = uhlmann_fidelity_factored(dst_factor(s1, n), dst_factor(s2, n)).fidelity;
    EXPECT_NEAR(literal, factored, 1e-8);
  }
}

TEST(Uhlmann, FactoredFormKeepsNearlyPureSelfFidelity) {
  // Strong squeezing on a cold core: many eigenvalues of rho sit at the rounding floor.
  const auto s = StateParams::from_nbar({0.3, 0.4}, 0.8, 0.1);
  const FockMatrix a = dst_factor(s, 65);
  EXPECT_NEAR(uhlmann_fidelity_factored(a, a).fidelity, 1.0, 1e-12);
  EXPECT_THROW(uhlmann_fidelity_factored(2.0 * a, a), ContractViolation);
}

TEST(Oracle, IdenticalStates) {
  const auto s = StateParams::from_nbar({0.5, 0.0}, 0.3, 0.5);
  const auto res = fidelity_oracle(s, s);
  EXPECT_NEAR(res.fidelity, 1.0, 1e-8);
  EXPECT_LE(res.convergence_gap, 1e-8);
  EXPECT_LT(res.cutoff_used, 200);
}

TEST(Oracle, ReferencePairConverges) {
  const auto s1 = StateParams::from_nbar(0.3, 0.2, 0.5);
  const auto s2 = StateParams::from_nbar({0.1, 0.2}, 0.5, 1.0);
  const auto res = fidelity_oracle(s1, s2);
  EXPECT_LE(res.convergence_gap, 1e-8);
  EXPECT_GE(res.cutoffs.size(), 2u);
  EXPECT_EQ(res.cutoffs.size(), res.values.size());
  EXPECT_EQ(res.cutoffs.back(), res.cutoff_used);
  EXPECT_GT(res.fidelity, 0.8);
  EXPECT_LT(res.fidelity, 0.9);
}

TEST(Oracle, LargeSeparation) {
  const auto s1 = StateParams::from_nbar(0.0, 0.1, 0.2);
  const auto s2 = StateParams::from_nbar(4.0, 0.1, 0.2);
  const auto res = fidelity_oracle(s1, s2);
  EXPECT_LT(res.fidelity, 1e-6);
  EXPECT_LE(res.convergence_gap, 1e-8);
}

TEST(Oracle, CeilingRaisesConvergenceError) {
  const auto s1 = StateParams::from_nbar(0.0, 0.9, 2.0);
  const auto s2 = StateParams::from_nbar(1.0, 0.0, 0.2);
  OracleOptions o;
  o.cutoff_ceiling = 60;
  try {
    fidelity_oracle(s1, s2, o);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_FALSE(e.cutoffs().empty());
  }
  o.tol = 1e-12;
  EXPECT_THROW(fidelity_oracle(s1, s2, o), DomainError);
}

TEST(Oracle, CutoffConvergenceIsMonotone) {
  const auto s1 = StateParams::from_nbar(0.0, 0.9, 0.5);
  const auto s2 = StateParams::from_nbar({1.0, 0.3}, 0.4, 0.2);
  auto at = [&](int n) { return uhlmann_fidelity(dst_state(s1, n), dst_state(s2, n)).fidelity; };
  // Pre-asymptotic ladder: gaps are far above the rounding floor.
  const double f27 = at(27), f36 = at(36), f48 = at(48), f64 = at(64);
  EXPECT_GT(std::abs(f27 - f36), std::abs(f36 - f48));
  EXPECT_GT(std::abs(f36 - f48), std::abs(f48 - f64));
}

TEST(Oracle, ThermalPairMatchesDiagonalSeries) {
  for (const auto& [n1, n2] : {std::pair{0.2, 1.0}, std::pair{1.0, 2.0}, std::pair{2.0, 0.2}}) {
    const auto s1 = StateParams::from_nbar(0.0, 0.0, n1);
    const auto s2 = StateParams::from_nbar(0.0, 0.0, n2);
    const int n = std::max(thermal_cutoff(s1.beta()), thermal_cutoff(s2.beta()));
    const FockMatrix t1 = thermal_state(s1.beta(), n), t2 = thermal_state(s2.beta(), n);
    double series = 0.0;
    for (int i = 0; i < n; ++i) series += std::sqrt(t1(i, i).real() * t2(i, i).real());
    const double exact = std::pow(std::sqrt((n1 + 1) * (n2 + 1)) - std::sqrt(n1 * n2), -2.0);
    EXPECT_NEAR(series * series, exact, 1e-11);
    EXPECT_NEAR(fidelity_oracle(s1, s2).fidelity, exact, 1e-9);
  }
}

TEST(Oracle, StartingCutoffCoversThermalTail) {
  const auto s1 = StateParams::from_nbar(0.0, 0.0, 5.0);
  const auto s2 = StateParams::from_nbar(0.0, 0.0, 0.1);
  EXPECT_GE(starting_cutoff(s1, s2), thermal_cutoff(s1.beta()));
}
