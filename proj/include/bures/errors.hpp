#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bures {

// Invalid parameters: nonpositive beta, non-finite inputs, unsupported powers.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// beta == 0: the thermal core has no normalisable density operator.
class InfiniteTemperatureError : public DomainError {
 public:
  using DomainError::DomainError;
};

// beta == +inf: pure-state endpoint, unreachable through the closed forms.
class PureStateLimitError : public DomainError {
 public:
  using DomainError::DomainError;
};

// The 2x2 matching system for the auxiliary displacement is (numerically) singular.
class DegenerateInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical postcondition was violated (non-Hermitian density matrix,
// identity residual above tolerance, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The adaptive cutoff ladder did not stabilise below the ceiling.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<int> cutoffs, std::vector<double> gaps)
      : std::runtime_error(what), cutoffs_(std::move(cutoffs)), gaps_(std::move(gaps)) {}

  const std::vector<int>& cutoffs() const noexcept { return cutoffs_; }
  const std::vector<double>& gaps() const noexcept { return gaps_; }

 private:
  std::vector<int> cutoffs_;
  std::vector<double> gaps_;
};

}  // namespace bures
