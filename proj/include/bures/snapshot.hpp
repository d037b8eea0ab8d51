#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "bures/core_algebra.hpp"

namespace bures {

/// One golden oracle value.
///
/// Plain-text format, one record per whitespace-separated line:
///
///   re_k1 im_k1 r1 re_k2 im_k2 r2 beta1 beta2 fidelity cutoff tol version
///
/// Reals are written with 17 significant digits. Blank lines and lines starting
/// with '#' are ignored.
struct SnapshotRecord {
  StateParams s1;
  StateParams s2;
  double fidelity = 0.0;
  int cutoff = 0;
  double tol = 0.0;
  std::string version;
};

class SnapshotFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_snapshot_record(const SnapshotRecord& rec);
/// Throws SnapshotFormatError on malformed input.
SnapshotRecord parse_snapshot_record(const std::string& line);

void write_snapshot(std::ostream& out, const std::vector<SnapshotRecord>& records);
std::vector<SnapshotRecord> read_snapshot(std::istream& in);

}  // namespace bures
