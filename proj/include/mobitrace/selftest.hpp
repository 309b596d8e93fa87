#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace mobitrace {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestOptions {
  std::uint64_t seed = 20240601;
  std::size_t trajectories = 1000;
  double tolerance = 1e-9;
  /// Test hook: multiplies every summarized rg before the checks run.
  double rg_tamper = 1.0;
};

/// Trace and Pythagorean identities, the closed-form angle cross-check, and
/// oracle agreement over a seeded corpus.
std::vector<PropertyResult> run_selftest(const SelftestOptions& options = {});

/// One `PASS|FAIL name: detail` line per property.
void write_selftest_report(std::ostream& out, const std::vector<PropertyResult>& results);

}  // namespace mobitrace
