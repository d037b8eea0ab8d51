#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bures/bch_engine.hpp"
#include "bures/core_algebra.hpp"
#include "bures/fock_oracle.hpp"

namespace bures {

/// Which 2x2 matrix plays the role of the squeeze conjugation in the reduction.
///
/// The operator identity is S(r) (a^dagger, a) S(r)^dagger = (a^dagger, a) M(-r).
/// `AsPrinted` substitutes M(r) there instead, which is what the printed Q1, R
/// and epsilon formulas are consistent with.
enum class SqueezeConvention { OperatorConsistent, AsPrinted };

enum class ReductionMethod { MatrixPipeline, PrintedFormula };
enum class BaseSource { OracleCalibrated, PrintedBase, ClosedForm };

/// Quadratic-form matrix of log delta1: C2^{-T} B2^{-1/2} Sigma B2^{1/2} C2^{-1}.
Mat2C delta1_form(const StateParams& s2, SqueezeConvention conv = SqueezeConvention::OperatorConsistent);

/// Closed-form Q1. With AsPrinted this is exactly the printed matrix
///   [[sh b2 sh 2r2, ch b2 + sh b2 ch 2r2], [-ch b2 + sh b2 ch 2r2, sh b2 sh 2r2]];
/// OperatorConsistent flips the sign of r2.
Mat2C q1_matrix(const StateParams& s2, SqueezeConvention conv = SqueezeConvention::OperatorConsistent);

double log_delta1(const StateParams& s1, const StateParams& s2, Complex g,
                  SqueezeConvention conv = SqueezeConvention::OperatorConsistent);
/// Same quantity through q1_matrix.
double log_delta1_q1(const StateParams& s2, Complex g, SqueezeConvention conv = SqueezeConvention::OperatorConsistent);
double delta1(const StateParams& s1, const StateParams& s2, Complex g,
              SqueezeConvention conv = SqueezeConvention::OperatorConsistent);

/// B2^{-1/2} C2^{-1} C1 B1^{-1/2} - B2^{1/2} C2^{-1} C1 B1^{1/2}.
Mat2C matching_matrix(const StateParams& s1, const StateParams& s2,
                      SqueezeConvention conv = SqueezeConvention::OperatorConsistent);

/// The displayed (1/Delta)[[sh((b2+b1)/2) ch(r1-r2), ...]] matrix, verbatim.
/// It coincides with the transposed inverse of matching_matrix under AsPrinted.
Mat2C printed_p_display(const StateParams& s1, const StateParams& s2);

/// Delta = cosh b1 cosh b2 + sinh b1 sinh b2 cosh 2(r1 - r2) - 1, evaluated as
/// 2 sinh^2((b1 + b2)/2) + 2 sinh b1 sinh b2 sinh^2(r1 - r2).
double delta_denominator(const StateParams& s1, const StateParams& s2);
double log_delta_denominator(const StateParams& s1, const StateParams& s2);

/// Solves matching_matrix * (l, -l^*) = (B2^{-1/2} - B2^{1/2}) C2^{-1} (g, -g^*).
/// Throws DegenerateInputError when |det| < 1e-14.
PairVec solve_l(const StateParams& s1, const StateParams& s2, Complex g,
                SqueezeConvention conv = SqueezeConvention::OperatorConsistent);

struct Delta2Evaluation {
  /// 1/2 (A_- w)^T Sigma (A_+ w), A_{+-} = B2^{+-1/2} C2^{-1} C1 B1^{+-1/2}.
  double log_value = 0.0;
  /// -1/2 (A_- w)^T Sigma (B2^{-1/2} - B2^{1/2}) C2^{-1} v, after the quadratic term drops.
  double log_value_reduced = 0.0;
  /// |w^T (A_-^T Sigma A_-) w|, scaled by max(1, |A_-|^2 |w|^2).
  double annihilation_residual = 0.0;
  PairVec l{Complex{}};
};

/// Throws ContractViolation when the annihilation residual exceeds 1e-10.
Delta2Evaluation evaluate_delta2(const StateParams& s1, const StateParams& s2, Complex g,
                                 SqueezeConvention conv = SqueezeConvention::OperatorConsistent);
double delta2(const StateParams& s1, const StateParams& s2, Complex g,
              SqueezeConvention conv = SqueezeConvention::OperatorConsistent);

/// (eps1 + eps2) / Delta, the printed closed form of log(delta1/delta2).
double log_ratio_printed(const StateParams& s1, const StateParams& s2, Complex g);
double ratio_printed(const StateParams& s1, const StateParams& s2, Complex g);
/// The printed R with delta1/delta2 = exp[1/2 v^T R v].
Mat2C r_matrix_printed(const StateParams& s1, const StateParams& s2);

/// Printed Y and 2 sinh(b1/4) sinh(b2/4) prefactor; base = prefactor / sqrt(sqrt(Y) - 1).
double printed_y(const StateParams& s1, const StateParams& s2);
double printed_prefactor(const StateParams& s1, const StateParams& s2);
/// Empty when sqrt(Y) <= 1.
std::optional<double> base_printed(const StateParams& s1, const StateParams& s2);

/// Undisplaced squeezed-thermal fidelity 2 sinh(b1/2) sinh(b2/2) / (sqrt(1 + Delta/2) - 1).
double base_closed_form(const StateParams& s1, const StateParams& s2);

struct BaseFactorTrace {
  double y = 0.0;
  std::optional<double> printed;
  std::optional<double> oracle_calibrated;
  std::optional<fock::OracleResult> oracle;
  double closed_form = 0.0;
  BaseSource source = BaseSource::OracleCalibrated;
  /// The value selected by `source`.
  double base = 0.0;
};

/// Computes every base-factor route but runs the oracle only when `source`
/// is OracleCalibrated or `with_oracle` is set.
BaseFactorTrace base_factor(const StateParams& s1, const StateParams& s2, BaseSource source = BaseSource::OracleCalibrated,
                            const fock::OracleOptions& oracle = {}, bool with_oracle = false);

struct ReductionTrace {
  ReductionMethod method = ReductionMethod::MatrixPipeline;
  double log_delta1 = 0.0;
  double log_delta2 = 0.0;
  double log_ratio = 0.0;
  PairVec l_vec{Complex{}};
  Mat2C p = Mat2C::Zero();
  double delta_denom = 0.0;
  /// Matrix pipeline only.
  double annihilation_residual = 0.0;

  double delta1() const;
  double delta2() const;
  double ratio() const;
};

ReductionTrace reduce_matrix_pipeline(const StateParams& s1, const StateParams& s2, Complex g,
                                      SqueezeConvention conv = SqueezeConvention::OperatorConsistent);
ReductionTrace reduce_printed(const StateParams& s1, const StateParams& s2, Complex g);

struct FidelityOptions {
  double tol = kDefaultPhysicalTol;
  bool run_oracle = true;
  bool run_printed = true;
  BaseSource base_source = BaseSource::OracleCalibrated;
  GConvention g_convention = GConvention::Difference;
  SqueezeConvention squeeze_convention = SqueezeConvention::OperatorConsistent;
  fock::OracleOptions oracle;
};

struct Discrepancy {
  std::string name;
  double magnitude = 0.0;
  std::string detail;
};

struct FidelityReport {
  // Reported values are clamped to [0, 1]; every clamp leaves a "range:*" flag.
  double value_matrix_pipeline = 0.0;
  std::optional<double> value_printed;
  std::optional<double> value_oracle;
  double log_value_matrix_pipeline = 0.0;

  DisplacementComposition displacement;
  ReductionTrace pipeline;
  std::optional<ReductionTrace> printed;
  BaseFactorTrace base;
  std::optional<fock::OracleResult> oracle;

  std::vector<Discrepancy> flags;
  /// First of Q1, P, Delta, R, Y where the printed path leaves the matrix path; empty if none.
  std::string first_divergent;

  bool has_flag(const std::string& name) const;
};

/// F = (delta1/delta2) * (tr sqrt(rho+ rho-))^2 by every configured route.
FidelityReport fidelity(const StateParams& s1, const StateParams& s2, const FidelityOptions& opts = {});

const char* to_string(BaseSource s);
const char* to_string(ReductionMethod m);

}  // namespace bures
