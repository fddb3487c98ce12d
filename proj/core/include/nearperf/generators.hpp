#pragma once

#include <cstdint>
#include <random>

#include "nearperf/npc.hpp"
#include "nearperf/torsion.hpp"

namespace nearperf {

/// Hard limits for generated instances.
struct GeneratorBounds {
  static constexpr int max_length = 6;
  static constexpr std::size_t max_rank = 8;
  static constexpr long max_torsion = 1000;
  static constexpr std::size_t max_lattice_rank = 3;
};

enum class InstanceKind {
  perfect,             // free terms
  rationally_acyclic,  // free terms, finite cohomology
  finitely_generated,  // free and finite summands
  torsion_free,        // ℤ and ℚ summands
  nearly_perfect,      // everything, with lattices
  single_degree,       // one term, with lattices
};

/// Instances are direct sums of small blocks (ℤ, ℤ →n→ ℤ, ℤ/n, ℤ → ℚ, ℚ/ℤ, ℤ →1/n→ ℚ/ℤ, …)
/// mixed by random automorphisms of each term.
struct InstanceOptions {
  InstanceKind kind = InstanceKind::perfect;
  int lo = 0;
  int length = 3;
  std::size_t max_rank = 4;    // per term
  std::size_t max_blocks = 4;
  long max_torsion = 12;
  std::size_t max_lattice_rank = 2;
  /// Euler characteristic zero, so that a trivialization exists.
  bool balanced = false;
};

NearlyPerfectComplex random_npc(std::mt19937_64& rng, const InstanceOptions& opts);
BoundedComplex random_complex(std::mt19937_64& rng, const InstanceOptions& opts);

IntMatrix random_unimodular(std::mt19937_64& rng, std::size_t n);
/// Entries num/den with |num| ≤ 4, den ≤ 3.
RatMatrix random_invertible_rational(std::mt19937_64& rng, std::size_t n);

/// α : Q → P with P = Q ⊕ (acyclic blocks), mixed, plus a null-homotopic perturbation.
ChainMap random_quasi_iso(std::mt19937_64& rng, const BoundedComplex& q);

/// Up to max_steps nested sublattices per nonzero cohomology group.
Filtration random_filtration(std::mt19937_64& rng, const BoundedComplex& m, int max_steps = 2);
/// Throws PreconditionError if the odd and even graded ranks differ.
GradedTrivialization random_trivialization(std::mt19937_64& rng, const BoundedComplex& m, const Filtration& f);

/// ℤ[C_order]^copies with a conjugated regular action; cohomologically trivial.
CyclicModule random_cohomologically_trivial(std::mt19937_64& rng, std::size_t order, std::size_t max_copies);

}  // namespace nearperf
