#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "nearperf/mixed_module.hpp"
#include "nearperf/npc.hpp"

namespace nearperf::io {

/// Malformed input; line and column are 1-based (0 when unknown).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string file, int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Optional generator of a cyclic group acting on every term.
struct Action {
  std::size_t order = 1;
  std::map<int, RatMatrix> generators;
};

struct Instance {
  NearlyPerfectComplex npc;
  std::optional<Action> action;
};

/// Instance document:
///
///   modules:            # optional named modules
///     A: {free_rank: 1, torsion: [2], q_rank: 0, qz_rank: 1}
///   complex:
///     min_degree: 0
///     terms: [A, {free_rank: 1}]
///     differentials: [[[1, 0, "1/2"]]]   # d^i as rows of dim C^{i+1}
///   lattices: {3: 1}
///   tau: {3: [[0], [1]]}
///   action: {order: 2, generators: {0: [[0, 1], [1, 0]]}}
///
/// Rationals are integers or "num/den" strings.
Instance parse_instance(const std::string& text, const std::string& file = "<input>");
Instance load_instance(const std::string& path);

struct Trivialization {
  RatMatrix lambda;
  std::optional<RatMatrix> lambda_tilde;
};

/// {lambda: [[...]], lambda_tilde: [[...]]}; empty matrices are written [].
Trivialization parse_trivialization(const std::string& text, const std::string& file = "<input>");
Trivialization load_trivialization(const std::string& path);

/// "num/den", or "num" when den = 1.
std::string format_rational(Rat q);
/// Inverse of format_rational; throws ParseError.
Rat parse_rational(const std::string& s);

}  // namespace nearperf::io
