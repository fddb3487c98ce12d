#pragma once

#include <optional>
#include <string>
#include <vector>

#include "io.hpp"
#include "nearperf/checks.hpp"
#include "nearperf/torsion.hpp"

namespace nearperf::io {

/// Everything a report can contain; unset parts are omitted from the text.
struct ReportData {
  std::string source;
  ValidationReport validation;
  std::optional<long> chi;
  std::map<Int, long> chi_l;
  std::map<int, bool> action_trivial;  // per degree, when an action is given
  std::optional<RelativeEuler> chi_rel;
  std::optional<double> seconds;  // only with --timing
};

/// Failures a report records as violated checks (chi_l ≠ chi, routes disagreeing, …).
std::vector<std::string> violated(const ReportData& r);

ReportData compute_report(const Instance& inst, const std::string& source, const std::vector<Int>& primes,
                          const std::optional<Trivialization>& lambda);

/// Block-style YAML, keys in fixed order.
std::string render(const ReportData& r);
std::string render(const RelativeEuler& e);
std::string render_checks(const std::vector<SuiteResult>& results, std::uint64_t seed, std::size_t cases,
                          std::optional<double> seconds);

}  // namespace nearperf::io
