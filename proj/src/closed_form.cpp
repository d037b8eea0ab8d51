#include "bures/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "bures/errors.hpp"

namespace bures {

namespace {

constexpr double kDetFloor = 1e-14;
constexpr double kAnnihilationTol = 1e-10;
// exp(x) for x below this is reported as an underflow (value < 1e-300).
const double kLogUnderflow = std::log(1e-300);

Mat2C conjugation(double r, SqueezeConvention conv) {
  return conv == SqueezeConvention::OperatorConsistent ? squeeze_conjugation(r) : squeeze_matrix(r);
}

Mat2C inverse2(const Mat2C& m) {
  const Complex det = m.determinant();
  Mat2C inv;
  inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return inv / det;
}

double real_quadratic(const Vec2C& u, const Mat2C& q, const Vec2C& v) {
  const Complex value = u.transpose() * q * v;
  const double scale = 1.0 + std::abs(value.real());
  if (std::abs(value.imag()) > 1e-9 * scale) {
    throw ContractViolation(fmt::format("quadratic form has imaginary part {:.3e}", value.imag()));
  }
  return value.real();
}

double safe_exp(double log_value) { return log_value < kLogUnderflow ? 0.0 : std::exp(log_value); }

}  // namespace

Mat2C delta1_form(const StateParams& s2, SqueezeConvention conv) {
  const Mat2C c2_inv = inverse2(conjugation(s2.r(), conv));
  return c2_inv.transpose() * thermal_matrix(s2.beta(), -0.5) * symplectic_form() *
         thermal_matrix(s2.beta(), 0.5) * c2_inv;
}

Mat2C q1_matrix(const StateParams& s2, SqueezeConvention conv) {
  const double r2 = conv == SqueezeConvention::AsPrinted ? s2.r() : -s2.r();
  const double b2 = s2.beta();
  const double diag = std::sinh(b2) * std::sinh(2.0 * r2);
  const double sc = std::sinh(b2) * std::cosh(2.0 * r2);
  Mat2C q;
  q << diag, std::cosh(b2) + sc, -std::cosh(b2) + sc, diag;
  return q;
}

double log_delta1(const StateParams& /*s1*/, const StateParams& s2, Complex g, SqueezeConvention conv) {
  const Vec2C v = pair_vec(g).vec();
  return 0.5 * real_quadratic(v, delta1_form(s2, conv), v);
}

double log_delta1_q1(const StateParams& s2, Complex g, SqueezeConvention conv) {
  const Vec2C v = pair_vec(g).vec();
  return 0.5 * real_quadratic(v, q1_matrix(s2, conv), v);
}

double delta1(const StateParams& s1, const StateParams& s2, Complex g, SqueezeConvention conv) {
  return safe_exp(log_delta1(s1, s2, g, conv));
}

Mat2C matching_matrix(const StateParams& s1, const StateParams& s2, SqueezeConvention conv) {
  const Mat2C core = inverse2(conjugation(s2.r(), conv)) * conjugation(s1.r(), conv);
  return thermal_matrix(s2.beta(), -0.5) * core * thermal_matrix(s1.beta(), -0.5) -
         thermal_matrix(s2.beta(), 0.5) * core * thermal_matrix(s1.beta(), 0.5);
}

Mat2C printed_p_display(const StateParams& s1, const StateParams& s2) {
  const double sum = std::sinh(0.5 * (s2.beta() + s1.beta()));
  const double diff = std::sinh(0.5 * (s2.beta() - s1.beta()));
  const double dr = s1.r() - s2.r();
  Mat2C p;
  p << sum * std::cosh(dr), diff * std::sinh(dr), -diff * std::sinh(dr), -sum * std::cosh(dr);
  return p / delta_denominator(s1, s2);
}

double log_delta_denominator(const StateParams& s1, const StateParams& s2) {
  const double thermal = 2.0 * log_sinh(0.5 * (s1.beta() + s2.beta()));
  const double dr = std::abs(s1.r() - s2.r());
  const double squeeze = dr == 0.0 ? -std::numeric_limits<double>::infinity()
                                   : log_sinh(s1.beta()) + log_sinh(s2.beta()) + 2.0 * log_sinh(dr);
  return std::log(2.0) + log_add_exp(thermal, squeeze);
}

double delta_denominator(const StateParams& s1, const StateParams& s2) {
  return std::exp(log_delta_denominator(s1, s2));
}

PairVec solve_l(const StateParams& s1, const StateParams& s2, Complex g, SqueezeConvention conv) {
  const Mat2C p = matching_matrix(s1, s2, conv);
  const Complex det = p.determinant();
  if (std::abs(det) < kDetFloor) {
    throw DegenerateInputError(
        fmt::format("matching matrix is singular (|det| = {:.3e} = 2 Delta, Delta = {:.3e})", std::abs(det),
                    delta_denominator(s1, s2)));
  }
  const Vec2C v = pair_vec(g).vec();
  const Vec2C rhs =
      (thermal_matrix(s2.beta(), -0.5) - thermal_matrix(s2.beta(), 0.5)) * inverse2(conjugation(s2.r(), conv)) * v;
  const Vec2C w = inverse2(p) * rhs;
  const double residual = (p * w - rhs).norm();
  if (residual > 1e-10 * std::max(rhs.norm(), std::numeric_limits<double>::min())) {
    if (rhs.norm() > 0.0) {
      throw ContractViolation(fmt::format("matching system residual {:.3e} too large", residual));
    }
  }
  return PairVec::from_vector(w, 1e-10);
}

Delta2Evaluation evaluate_delta2(const StateParams& s1, const StateParams& s2, Complex g, SqueezeConvention conv) {
  const PairVec l = solve_l(s1, s2, g, conv);
  const Vec2C& w = l.vec();
  const Vec2C v = pair_vec(g).vec();
  const Mat2C c2_inv = inverse2(conjugation(s2.r(), conv));
  const Mat2C core = c2_inv * conjugation(s1.r(), conv);
  const Mat2C a_minus = thermal_matrix(s2.beta(), -0.5) * core * thermal_matrix(s1.beta(), -0.5);
  const Mat2C a_plus = thermal_matrix(s2.beta(), 0.5) * core * thermal_matrix(s1.beta(), 0.5);
  const Mat2C& sigma = symplectic_form();

  Delta2Evaluation out;
  out.l = l;
  const Vec2C lhs = a_minus * w;
  out.log_value = 0.5 * real_quadratic(lhs, sigma, a_plus * w);
  const Mat2C q = (thermal_matrix(s2.beta(), -0.5) - thermal_matrix(s2.beta(), 0.5)) * c2_inv;
  out.log_value_reduced = -0.5 * real_quadratic(lhs, sigma, q * v);

  const Complex quadratic = w.transpose() * (a_minus.transpose() * sigma * a_minus) * w;
  const double scale = std::max(1.0, a_minus.squaredNorm() * w.squaredNorm());
  out.annihilation_residual = std::abs(quadratic) / scale;
  if (out.annihilation_residual > kAnnihilationTol) {
    throw ContractViolation(
        fmt::format("quadratic l-term does not vanish (residual {:.3e})", out.annihilation_residual));
  }
  return out;
}

double delta2(const StateParams& s1, const StateParams& s2, Complex g, SqueezeConvention conv) {
  return safe_exp(evaluate_delta2(s1, s2, g, conv).log_value);
}

double log_ratio_printed(const StateParams& s1, const StateParams& s2, Complex g) {
  const double log_denom = log_delta_denominator(s1, s2);
  const double b1 = s1.beta();
  const double b2 = s2.beta();
  const double coeff1 = std::exp(log_sinh(b1) + 2.0 * log_sinh(0.5 * b2) - log_denom);
  const double coeff2 = std::exp(2.0 * log_sinh(0.5 * b1) + log_sinh(b2) - log_denom);
  const double g_sq_sum = 2.0 * (g * g).real();  // g^2 + g*^2
  const double g_abs2 = std::norm(g);
  const double eps1 = g_sq_sum * std::sinh(2.0 * s1.r()) - 2.0 * g_abs2 * std::cosh(2.0 * s1.r());
  const double eps2 = g_sq_sum * std::sinh(2.0 * s2.r()) - 2.0 * g_abs2 * std::cosh(2.0 * s2.r());
  return coeff1 * eps1 + coeff2 * eps2;
}

double ratio_printed(const StateParams& s1, const StateParams& s2, Complex g) {
  return safe_exp(log_ratio_printed(s1, s2, g));
}

Mat2C r_matrix_printed(const StateParams& s1, const StateParams& s2) {
  const double denom = delta_denominator(s1, s2);
  auto block = [](double r) {
    Mat2C m;
    m << std::sinh(2.0 * r), std::cosh(2.0 * r), std::cosh(2.0 * r), std::sinh(2.0 * r);
    return m;
  };
  const double c1 = 2.0 / denom * std::sinh(s1.beta()) * std::pow(std::sinh(0.5 * s2.beta()), 2);
  const double c2 = 2.0 / denom * std::pow(std::sinh(0.5 * s1.beta()), 2) * std::sinh(s2.beta());
  return symplectic_form() + c1 * block(s1.r()) + c2 * block(s2.r());
}

double printed_y(const StateParams& s1, const StateParams& s2) {
  auto ch2 = [](double x) { return std::pow(std::cosh(x), 2); };
  auto sh2 = [](double x) { return std::pow(std::sinh(x), 2); };
  const double r1 = s1.r(), r2 = s2.r();
  const double plus = 0.25 * (s1.beta() + s2.beta());
  const double minus = 0.25 * (s1.beta() - s2.beta());
  return ch2(r1 - r2) * ch2(plus) + ch2(r1 + r2) * ch2(plus) - sh2(r1 - r2) * ch2(minus) -
         ch2(r1 + r2) * ch2(minus);
}

double printed_prefactor(const StateParams& s1, const StateParams& s2) {
  return 2.0 * std::sinh(0.25 * s1.beta()) * std::sinh(0.25 * s2.beta());
}

std::optional<double> base_printed(const StateParams& s1, const StateParams& s2) {
  const double y = printed_y(s1, s2);
  if (!(y > 1.0)) return std::nullopt;
  return printed_prefactor(s1, s2) / std::sqrt(std::sqrt(y) - 1.0);
}

double base_closed_form(const StateParams& s1, const StateParams& s2) {
  // 2 s1 s2 / (sqrt(1 + h) - 1) = 2 s1 s2 (sqrt(1 + h) + 1) / h with h = Delta / 2.
  const double log_h = log_delta_denominator(s1, s2) - std::log(2.0);
  const double log_root_plus_one =
      log_h > 600.0 ? 0.5 * log_h : std::log1p(std::sqrt(1.0 + std::exp(log_h)));
  const double log_base = std::log(2.0) + log_sinh(0.5 * s1.beta()) + log_sinh(0.5 * s2.beta()) +
                          log_root_plus_one - log_h;
  return std::exp(log_base);
}

BaseFactorTrace base_factor(const StateParams& s1, const StateParams& s2, BaseSource source,
                            const fock::OracleOptions& oracle, bool with_oracle) {
  BaseFactorTrace out;
  out.source = source;
  out.y = printed_y(s1, s2);
  out.printed = base_printed(s1, s2);
  out.closed_form = base_closed_form(s1, s2);
  if (source == BaseSource::OracleCalibrated || with_oracle) {
    out.oracle = fock::fidelity_oracle(s1.with_k(0.0), s2.with_k(0.0), oracle);
    out.oracle_calibrated = out.oracle->fidelity;
  }
  switch (source) {
    case BaseSource::OracleCalibrated:
      out.base = *out.oracle_calibrated;
      break;
    case BaseSource::PrintedBase:
      if (!out.printed) {
        throw DomainError(fmt::format("printed base factor undefined: sqrt(Y) <= 1 (Y = {})", out.y));
      }
      out.base = *out.printed;
      break;
    case BaseSource::ClosedForm:
      out.base = out.closed_form;
      break;
  }
  return out;
}

double ReductionTrace::delta1() const { return safe_exp(log_delta1); }
double ReductionTrace::delta2() const { return safe_exp(log_delta2); }
double ReductionTrace::ratio() const { return safe_exp(log_ratio); }

ReductionTrace reduce_matrix_pipeline(const StateParams& s1, const StateParams& s2, Complex g,
                                      SqueezeConvention conv) {
  ReductionTrace t;
  t.method = ReductionMethod::MatrixPipeline;
  t.log_delta1 = log_delta1(s1, s2, g, conv);
  const Delta2Evaluation d2 = evaluate_delta2(s1, s2, g, conv);
  t.log_delta2 = d2.log_value;
  t.annihilation_residual = d2.annihilation_residual;
  t.l_vec = d2.l;
  t.log_ratio = t.log_delta1 - t.log_delta2;
  t.p = matching_matrix(s1, s2, conv);
  t.delta_denom = delta_denominator(s1, s2);
  return t;
}

ReductionTrace reduce_printed(const StateParams& s1, const StateParams& s2, Complex g) {
  ReductionTrace t;
  t.method = ReductionMethod::PrintedFormula;
  t.log_delta1 = log_delta1_q1(s2, g, SqueezeConvention::AsPrinted);
  t.log_ratio = log_ratio_printed(s1, s2, g);
  t.log_delta2 = t.log_delta1 - t.log_ratio;
  t.p = printed_p_display(s1, s2);
  t.delta_denom = delta_denominator(s1, s2);
  // Row form (l, -l^*) = (g, -g^*) M2^{-T} (B2^{-1/2} - B2^{1/2}) P_display.
  const Vec2C v = pair_vec(g).vec();
  const Mat2C m2_inv = inverse2(squeeze_matrix(s2.r()));
  const Vec2C w = (v.transpose() * m2_inv.transpose() *
                   (thermal_matrix(s2.beta(), -0.5) - thermal_matrix(s2.beta(), 0.5)) * t.p)
                      .transpose();
  t.l_vec = PairVec::from_vector(w, 1e-8);
  return t;
}

bool FidelityReport::has_flag(const std::string& name) const {
  for (const auto& f : flags) {
    if (f.name == name) return true;
  }
  return false;
}

namespace {

double report_value(double raw, double slack, const std::string& method, std::vector<Discrepancy>& flags) {
  if (raw < -slack || raw > 1.0 + slack || !std::isfinite(raw)) {
    flags.push_back({"range:" + method, raw, "value outside [0, 1]; reported clamped"});
  }
  if (!std::isfinite(raw)) return raw > 0 ? 1.0 : 0.0;
  return std::clamp(raw, 0.0, 1.0);
}

}  // namespace

FidelityReport fidelity(const StateParams& s1, const StateParams& s2, const FidelityOptions& opts) {
  FidelityReport rep;
  rep.displacement = displacement_compose(s1.k(), s2.k(), opts.g_convention);
  const Complex g = rep.displacement.g;

  rep.pipeline = reduce_matrix_pipeline(s1, s2, g, opts.squeeze_convention);
  rep.base = base_factor(s1, s2, opts.base_source, opts.oracle);

  rep.log_value_matrix_pipeline = rep.pipeline.log_ratio + std::log(rep.base.base);
  if (rep.log_value_matrix_pipeline < kLogUnderflow) {
    rep.flags.push_back({"underflow:matrix-pipeline", rep.log_value_matrix_pipeline, "log value below log(1e-300)"});
  }
  rep.value_matrix_pipeline =
      report_value(safe_exp(rep.log_value_matrix_pipeline), 1e-12, "matrix-pipeline", rep.flags);

  const double tol = opts.tol;
  if (opts.run_printed) {
    rep.printed = reduce_printed(s1, s2, g);
    if (rep.base.printed) {
      rep.value_printed = report_value(rep.printed->ratio() * *rep.base.printed, 1e-12, "printed", rep.flags);
    } else {
      rep.flags.push_back({"printed-domain", rep.base.y, "sqrt(Y) <= 1: printed base factor undefined"});
    }

    std::vector<Discrepancy> divergences;
    const double d_q1 = std::abs(rep.printed->log_delta1 - rep.pipeline.log_delta1);
    if (d_q1 > tol) divergences.push_back({"Q1", d_q1, "log delta1: printed Q1 vs matrix expression"});
    // The printed P display is the transposed inverse of the matching matrix.
    const double d_p = (rep.printed->p - inverse2(rep.pipeline.p).transpose()).cwiseAbs().maxCoeff();
    if (d_p > tol) divergences.push_back({"P", d_p, "printed P display vs inverse transpose of matching matrix"});
    const double d_delta =
        std::abs(rep.pipeline.delta_denom + 0.5 * rep.pipeline.p.determinant().real()) / rep.pipeline.delta_denom;
    if (d_delta > tol) divergences.push_back({"Delta", d_delta, "Delta vs -det(P)/2 (relative)"});
    const double d_r = std::abs(rep.printed->log_ratio - rep.pipeline.log_ratio);
    if (d_r > tol) divergences.push_back({"R", d_r, "log(delta1/delta2): printed R vs matrix pipeline"});
    if (rep.base.printed) {
      const double d_y = std::abs(*rep.base.printed - rep.base.base);
      if (d_y > tol) divergences.push_back({"Y", d_y, "printed base factor (Y with prefactor) vs selected base"});
    }
    if (!divergences.empty()) rep.first_divergent = divergences.front().name;
    rep.flags.insert(rep.flags.end(), divergences.begin(), divergences.end());
  }

  if (opts.run_oracle) {
    rep.oracle = fock::fidelity_oracle(s1, s2, opts.oracle);
    rep.value_oracle = report_value(rep.oracle->fidelity, 1e-9, "oracle", rep.flags);
    const double gap = std::abs(*rep.value_oracle - rep.value_matrix_pipeline);
    if (gap > 100.0 * tol) {
      rep.flags.push_back({"pipeline-vs-oracle", gap, "matrix pipeline differs from the Fock oracle"});
    }
  }
  return rep;
}

const char* to_string(BaseSource s) {
  switch (s) {
    case BaseSource::OracleCalibrated:
      return "oracle-calibrated";
    case BaseSource::PrintedBase:
      return "printed-base";
    case BaseSource::ClosedForm:
      return "closed-form";
  }
  return "?";
}

const char* to_string(ReductionMethod m) {
  return m == ReductionMethod::MatrixPipeline ? "matrix-pipeline" : "printed-formula";
}

}  // namespace bures
