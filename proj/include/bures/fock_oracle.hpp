#pragma once

#include <vector>

#include <Eigen/Dense>

#include "bures/core_algebra.hpp"

namespace bures::fock {

/// Dense operator on the number basis |0>, ..., |cutoff - 1>.
using FockMatrix = Eigen::MatrixXcd;

inline constexpr int kDefaultCutoffCeiling = 1024;
/// Largest thermal population mass allowed beyond the cutoff.
inline constexpr double kThermalTailBound = 1e-12;

FockMatrix annihilation(int cutoff);
FockMatrix creation(int cutoff);

/// Scaling and squaring around a truncated Taylor series.
Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& m);
FockMatrix matrix_exp(const FockMatrix& m);

/// exp(k a^dagger - k^* a) on the truncated space.
FockMatrix displacement_op(Complex k, int cutoff);
/// exp(r/2 (a^2 - a^dagger^2)) on the truncated space.
FockMatrix squeeze_op(double r, int cutoff);

/// Smallest cutoff whose thermal tail exp(-beta N) is below kThermalTailBound.
int thermal_cutoff(double beta);
/// diag((1 - e^{-beta}) e^{-beta n}). Throws DomainError naming the required
/// cutoff when the tail beyond `cutoff` exceeds kThermalTailBound.
FockMatrix thermal_state(double beta, int cutoff);

/// A = D S diag(sqrt(p)) with p the thermal populations, so that rho = A A^dagger.
FockMatrix dst_factor(const StateParams& s, int cutoff);
/// D S rho_th S^dagger D^dagger.
FockMatrix dst_state(const StateParams& s, int cutoff);

struct UhlmannResult {
  double fidelity = 0.0;
  /// Most negative eigenvalue of sqrt(rho1) rho2 sqrt(rho1) before clamping (0 if none).
  double spectrum_floor = 0.0;
  /// Sum of |lambda| over clamped eigenvalues.
  double clamped_mass = 0.0;
  /// True when a clamped eigenvalue exceeded 1e-12 of the spectral radius.
  bool clamp_above_threshold = false;
};

/// (tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2 by Hermitian eigendecomposition.
/// Throws ContractViolation when either input is not a density matrix
/// (Hermitian to 1e-10, unit trace to 1e-8, eigenvalues >= -1e-10).
///
/// Eigenvalues of rho at the rounding floor come out of the square roots as
/// ~sqrt(eps) each, so for nearly pure states this loses ~1e-8.
UhlmannResult uhlmann_fidelity(const FockMatrix& rho1, const FockMatrix& rho2);

/// Same fidelity from factors rho_i = A_i A_i^dagger: the squared trace norm
/// of A1^dagger A2 (singular values, no square roots of noisy eigenvalues).
/// This is what the oracle ladder uses. Throws ContractViolation unless
/// |A_i|_F^2 = tr rho_i is within 1e-8 of 1.
UhlmannResult uhlmann_fidelity_factored(const FockMatrix& a1, const FockMatrix& a2);

struct OracleOptions {
  double tol = kDefaultPhysicalTol;
  /// 0 selects the population-spread heuristic.
  int start_cutoff = 0;
  int cutoff_ceiling = kDefaultCutoffCeiling;
};

struct OracleResult {
  double fidelity = 0.0;
  int cutoff_used = 0;
  /// |F(N) - F(previous N)| at termination.
  double convergence_gap = 0.0;
  double spectrum_floor = 0.0;
  double clamped_mass = 0.0;
  std::vector<int> cutoffs;
  std::vector<double> values;
};

/// Starting cutoff for the ladder: covers displacement, squeezing and thermal
/// population spread, and never below thermal_cutoff of either state.
int starting_cutoff(const StateParams& s1, const StateParams& s2);

/// Uhlmann fidelity (factored form) at cutoffs N0, 1.5 N0, ... until successive values
/// differ by at most tol. Throws ConvergenceError at the ceiling.
OracleResult fidelity_oracle(const StateParams& s1, const StateParams& s2, const OracleOptions& opts = {});

}  // namespace bures::fock
