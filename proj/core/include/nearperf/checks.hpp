#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nearperf {

/// Randomized property suites over generated instances.
enum class Suite { linalg, mixed, cone, ladic, relk, torsion, all };

std::optional<Suite> parse_suite(std::string_view name);
std::string_view suite_name(Suite s);

struct PropertyResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t passed = 0;
  /// Case index and message of the first few failures.
  std::vector<std::pair<std::size_t, std::string>> failures;
};

struct SuiteResult {
  std::string suite;
  std::size_t cases = 0;
  std::size_t passed = 0;  // cases where every property held
  std::vector<PropertyResult> properties;
  bool ok() const { return passed == cases; }
};

/// Case k of property p draws from an mt19937_64 seeded by (seed, suite, p, k), so results
/// do not depend on which other suites or properties run. `all` expands to every suite.
std::vector<SuiteResult> run_checks(Suite s, std::uint64_t seed, std::size_t cases);

}  // namespace nearperf
