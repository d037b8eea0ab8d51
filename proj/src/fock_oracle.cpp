#include "bures/fock_oracle.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "bures/errors.hpp"

namespace bures::fock {

namespace {

void require_cutoff(int cutoff) {
  if (cutoff < 2) throw DomainError(fmt::format("cutoff must be >= 2 (got {})", cutoff));
}

template <typename Matrix>
double norm1(const Matrix& m) {
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

template <typename Matrix>
Matrix expm_impl(const Matrix& m) {
  if (m.rows() != m.cols()) throw DomainError("matrix_exp: matrix must be square");
  if (!m.allFinite()) throw DomainError("matrix_exp: non-finite entries");
  const auto n = m.rows();
  if (n == 0) return m;

  constexpr double kTheta = 0.5;
  constexpr int kMaxSquarings = 64;
  const double norm = norm1(m);
  int squarings = 0;
  if (norm > kTheta) squarings = static_cast<int>(std::ceil(std::log2(norm / kTheta)));
  if (squarings > kMaxSquarings) {
    throw DomainError(fmt::format(
        "matrix_exp: norm {:.3e} needs {} squarings (limit {}); rescale the generator", norm, squarings,
        kMaxSquarings));
  }
  const Matrix x = m / std::ldexp(1.0, squarings);

  Matrix sum = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= 40; ++k) {
    term = (term * x) / static_cast<double>(k);
    sum += term;
    if (norm1(term) <= 1e-17 * norm1(sum)) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

void require_density(const FockMatrix& rho, const char* name) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) {
    throw ContractViolation(fmt::format("{} must be a non-empty square matrix", name));
  }
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-10) {
    throw ContractViolation(fmt::format("{} is not Hermitian (deviation {:.3e})", name, herm));
  }
  const double trace = rho.trace().real();
  if (std::abs(trace - 1.0) > 1e-8) {
    throw ContractViolation(fmt::format("{} trace {:.12f} differs from 1", name, trace));
  }
}

}  // namespace

FockMatrix annihilation(int cutoff) {
  require_cutoff(cutoff);
  FockMatrix a = FockMatrix::Zero(cutoff, cutoff);
  for (int n = 1; n < cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

FockMatrix creation(int cutoff) { return annihilation(cutoff).adjoint(); }

Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& m) { return expm_impl(m); }
FockMatrix matrix_exp(const FockMatrix& m) { return expm_impl(m); }

FockMatrix displacement_op(Complex k, int cutoff) {
  require_cutoff(cutoff);
  // D(|k| e^{i theta}) = R D(|k|) R^dagger with R = exp(i theta a^dagger a), so
  // the exponential itself is real.
  const double modulus = std::abs(k);
  const double theta = std::arg(k);
  Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(cutoff, cutoff);
  for (int n = 1; n < cutoff; ++n) {
    const double s = modulus * std::sqrt(static_cast<double>(n));
    gen(n, n - 1) = s;   // a^dagger
    gen(n - 1, n) = -s;  // -a
  }
  const Eigen::MatrixXd real = matrix_exp(gen);
  FockMatrix d(cutoff, cutoff);
  for (int col = 0; col < cutoff; ++col) {
    for (int row = 0; row < cutoff; ++row) {
      d(row, col) = real(row, col) * std::polar(1.0, theta * (row - col));
    }
  }
  return d;
}

FockMatrix squeeze_op(double r, int cutoff) {
  require_cutoff(cutoff);
  Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(cutoff, cutoff);
  for (int n = 2; n < cutoff; ++n) {
    const double s = 0.5 * r * std::sqrt(static_cast<double>(n) * (n - 1));
    gen(n - 2, n) = s;   // a^2
    gen(n, n - 2) = -s;  // -a^dagger^2
  }
  return matrix_exp(gen).cast<Complex>();
}

int thermal_cutoff(double beta) {
  if (!(beta > 0.0)) throw DomainError("thermal_cutoff: beta must be > 0");
  return static_cast<int>(std::ceil(-std::log(kThermalTailBound) / beta));
}

FockMatrix thermal_state(double beta, int cutoff) {
  require_cutoff(cutoff);
  if (!(beta > 0.0)) throw DomainError("thermal_state: beta must be > 0");
  const int required = thermal_cutoff(beta);
  if (cutoff < required) {
    throw DomainError(fmt::format("thermal tail e^(-beta N) = {:.3e} exceeds {:.0e} at cutoff {}; need cutoff >= {}",
                                  std::exp(-beta * cutoff), kThermalTailBound, cutoff, required));
  }
  FockMatrix rho = FockMatrix::Zero(cutoff, cutoff);
  const double ground = -std::expm1(-beta);
  for (int n = 0; n < cutoff; ++n) rho(n, n) = ground * std::exp(-beta * n);
  return rho;
}

FockMatrix dst_factor(const StateParams& s, int cutoff) {
  const FockMatrix w = displacement_op(s.k(), cutoff) * squeeze_op(s.r(), cutoff);
  const Eigen::VectorXd root = thermal_state(s.beta(), cutoff).diagonal().real().cwiseSqrt();
  return w * root.asDiagonal();
}

FockMatrix dst_state(const StateParams& s, int cutoff) {
  const FockMatrix a = dst_factor(s, cutoff);
  FockMatrix rho = a * a.adjoint();
  return 0.5 * (rho + rho.adjoint());
}

UhlmannResult uhlmann_fidelity(const FockMatrix& rho1, const FockMatrix& rho2) {
  require_density(rho1, "rho1");
  require_density(rho2, "rho2");
  if (rho1.rows() != rho2.rows()) throw ContractViolation("density matrices differ in dimension");

  Eigen::SelfAdjointEigenSolver<FockMatrix> eig1(rho1);
  Eigen::VectorXd lambda1 = eig1.eigenvalues();
  if (lambda1.minCoeff() < -1e-10) {
    throw ContractViolation(fmt::format("rho1 has eigenvalue {:.3e} < -1e-10", lambda1.minCoeff()));
  }
  if (Eigen::SelfAdjointEigenSolver<FockMatrix>(rho2, Eigen::EigenvaluesOnly).eigenvalues().minCoeff() < -1e-10) {
    throw ContractViolation("rho2 has an eigenvalue below -1e-10");
  }
  const Eigen::VectorXd root1 = lambda1.cwiseMax(0.0).cwiseSqrt();
  const FockMatrix sqrt1 = eig1.eigenvectors() * root1.asDiagonal() * eig1.eigenvectors().adjoint();

  FockMatrix inner = sqrt1 * rho2 * sqrt1;
  inner = 0.5 * (inner + inner.adjoint());
  const Eigen::VectorXd mu =
      Eigen::SelfAdjointEigenSolver<FockMatrix>(inner, Eigen::EigenvaluesOnly).eigenvalues();

  UhlmannResult out;
  const double radius = mu.cwiseAbs().maxCoeff();
  double trace_sqrt = 0.0;
  for (const double m : mu) {
    if (m < 0.0) {
      out.spectrum_floor = std::min(out.spectrum_floor, m);
      out.clamped_mass += -m;
      if (-m > 1e-12 * radius) out.clamp_above_threshold = true;
      continue;
    }
    trace_sqrt += std::sqrt(m);
  }
  out.fidelity = trace_sqrt * trace_sqrt;
  return out;
}

UhlmannResult uhlmann_fidelity_factored(const FockMatrix& a1, const FockMatrix& a2) {
  if (a1.rows() != a2.rows()) throw ContractViolation("factors differ in dimension");
  for (const FockMatrix* a : {&a1, &a2}) {
    const double trace = a->squaredNorm();
    if (!(std::abs(trace - 1.0) <= 1e-8)) {
      throw ContractViolation(fmt::format("factor gives trace {:.12f}, not within 1e-8 of 1", trace));
    }
  }
  // tr sqrt(sqrt(rho1) rho2 sqrt(rho1)) is the trace norm of sqrt(rho1) sqrt(rho2), and
  // sqrt(rho_i) = A_i V_i^dagger for some unitary V_i, so it equals the trace norm of A1^dagger A2.
  const FockMatrix b = a1.adjoint() * a2;
  const Eigen::VectorXd sigma = Eigen::BDCSVD<FockMatrix>(b).singularValues();
  UhlmannResult out;
  const double trace_norm = sigma.sum();
  out.fidelity = trace_norm * trace_norm;
  return out;
}

int starting_cutoff(const StateParams& s1, const StateParams& s2) {
  const double rmax = std::max(std::abs(s1.r()), std::abs(s2.r()));
  const double shr = std::sinh(rmax);
  const double spread = 30.0 + 8.0 * (std::norm(s1.k()) + std::norm(s2.k())) + 10.0 * shr * shr +
                        10.0 * std::max(s1.nbar(), s2.nbar());
  return std::max({static_cast<int>(std::ceil(spread)), thermal_cutoff(s1.beta()), thermal_cutoff(s2.beta())});
}

OracleResult fidelity_oracle(const StateParams& s1, const StateParams& s2, const OracleOptions& opts) {
  if (!(opts.tol >= 1e-10)) throw DomainError(fmt::format("oracle tolerance must be >= 1e-10 (got {})", opts.tol));
  int cutoff = opts.start_cutoff > 0 ? opts.start_cutoff : starting_cutoff(s1, s2);
  if (cutoff > opts.cutoff_ceiling) {
    throw ConvergenceError(
        fmt::format("starting cutoff {} already exceeds the ceiling {}", cutoff, opts.cutoff_ceiling), {cutoff},
        {});
  }

  OracleResult out;
  std::vector<double> gaps;
  auto evaluate = [&](int n) {
    const UhlmannResult u = uhlmann_fidelity_factored(dst_factor(s1, n), dst_factor(s2, n));
    out.cutoffs.push_back(n);
    out.values.push_back(u.fidelity);
    out.spectrum_floor = u.spectrum_floor;
    out.clamped_mass = u.clamped_mass;
    return u.fidelity;
  };

  double previous = evaluate(cutoff);
  while (true) {
    if (cutoff >= opts.cutoff_ceiling) {
      throw ConvergenceError(fmt::format("fidelity did not converge to {:.1e} below cutoff ceiling {}", opts.tol,
                                         opts.cutoff_ceiling),
                             out.cutoffs, gaps);
    }
    cutoff = std::min(opts.cutoff_ceiling, static_cast<int>(std::lround(1.5 * cutoff)));
    const double current = evaluate(cutoff);
    const double gap = std::abs(current - previous);
    gaps.push_back(gap);
    if (gap <= opts.tol) {
      out.fidelity = current;
      out.cutoff_used = cutoff;
      out.convergence_gap = gap;
      return out;
    }
    previous = current;
  }
}

}  // namespace bures::fock
