#include "bures/snapshot.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "bures/errors.hpp"

namespace bures {

std::string format_snapshot_record(const SnapshotRecord& rec) {
  return fmt::format("{:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {} {:.17g} {}",
                     rec.s1.k().real(), rec.s1.k().imag(), rec.s1.r(), rec.s2.k().real(), rec.s2.k().imag(),
                     rec.s2.r(), rec.s1.beta(), rec.s2.beta(), rec.fidelity, rec.cutoff, rec.tol, rec.version);
}

SnapshotRecord parse_snapshot_record(const std::string& line) {
  std::istringstream in(line);
  double v[9];
  for (double& x : v) {
    if (!(in >> x)) throw SnapshotFormatError(fmt::format("expected 9 reals in snapshot record: '{}'", line));
  }
  int cutoff = 0;
  double tol = 0.0;
  std::string version;
  if (!(in >> cutoff >> tol >> version)) {
    throw SnapshotFormatError(fmt::format("expected cutoff, tol and version in snapshot record: '{}'", line));
  }
  std::string extra;
  if (in >> extra) throw SnapshotFormatError(fmt::format("trailing field '{}' in snapshot record", extra));
  try {
    return SnapshotRecord{StateParams::from_beta({v[0], v[1]}, v[2], v[6]),
                          StateParams::from_beta({v[3], v[4]}, v[5], v[7]), v[8], cutoff, tol, version};
  } catch (const DomainError& e) {
    throw SnapshotFormatError(fmt::format("invalid state in snapshot record: {}", e.what()));
  }
}

void write_snapshot(std::ostream& out, const std::vector<SnapshotRecord>& records) {
  out << "# bures Fock-oracle golden values\n"
         "# re_k1 im_k1 r1 re_k2 im_k2 r2 beta1 beta2 fidelity cutoff tol version\n";
  for (const auto& rec : records) out << format_snapshot_record(rec) << '\n';
}

std::vector<SnapshotRecord> read_snapshot(std::istream& in) {
  std::vector<SnapshotRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      out.push_back(parse_snapshot_record(line));
    } catch (const SnapshotFormatError& e) {
      throw SnapshotFormatError(fmt::format("line {}: {}", lineno, e.what()));
    }
  }
  return out;
}

}  // namespace bures
