#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bures/closed_form.hpp"

namespace bures {

enum class Verdict { Consistent, TypoConfirmed, Inconclusive };
const char* to_string(Verdict v);

/// One printed formula compared against the matrix pipeline and the oracle.
struct ReconciliationEntry {
  std::string formula;
  double max_abs_deviation = 0.0;
  std::string worst_case;
  Verdict verdict = Verdict::Inconclusive;
  std::string note;
};

struct ThresholdCheck {
  std::string id;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct ReconciliationReport {
  std::vector<ReconciliationEntry> entries;
  std::vector<ThresholdCheck> checks;
  std::size_t grid_points = 0;

  bool passed() const;
  const ReconciliationEntry* find(const std::string& formula) const;
  const ThresholdCheck* check(const std::string& id) const;
};

struct GridPoint {
  StateParams s1;
  StateParams s2;
};

enum class GridPreset { Standard, Quick };

/// Standard: g in {0.2, 0.5+0.3i, 1.0} x r1, r2 in {0, 0.4, 0.9} x
/// (nbar1, nbar2) in {(0.2, 1.0), (1.0, 2.0), (2.0, 0.2)}, with k1 = 0, k2 = g.
/// Quick: a 2x2x2x2 subset.
std::vector<GridPoint> verification_grid(GridPreset preset);

struct VerifyOptions {
  GridPreset preset = GridPreset::Standard;
  double tol = kDefaultPhysicalTol;
  fock::OracleOptions oracle;
  unsigned threads = 0;
};

/// Runs the grid through the matrix pipeline, the printed formulas and the
/// oracle, and adjudicates each suspected misprint.
ReconciliationReport run_verification(const VerifyOptions& opts = {});

void write_report_text(std::ostream& out, const ReconciliationReport& rep);

}  // namespace bures
