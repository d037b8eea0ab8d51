#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "bures/core_algebra.hpp"
#include "bures/reconciliation.hpp"

namespace bures::cli {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kUsage = 2, kConvergence = 3, kIo = 4 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `a`, `bi`, `a+bi`, `a-bi` with optional leading sign and no spaces; `i`
/// alone is the imaginary unit. Throws UsageError.
Complex parse_complex(const std::string& text);

struct Axis {
  std::string name;  // re_k1, im_k1, r1, beta1, nbar1 and the same with 2
  double start = 0.0;
  double stop = 0.0;
  int count = 1;

  double value(int i) const;
};

/// NAME=start:stop:count. Throws UsageError.
Axis parse_axis(const std::string& text);

/// Points written by `snapshot --regolden`.
std::vector<GridPoint> golden_points();

/// Entry point; subcommands compute, sweep, verify and snapshot.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bures::cli
