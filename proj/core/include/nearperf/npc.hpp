#pragma once

#include <map>
#include <string>
#include <vector>

#include "nearperf/complexes.hpp"

namespace nearperf {

/// A bounded complex C with lattices L_i ≅ ℤ^{r_i} and maps
/// τ_i : Hom(L_i, ℚ/ℤ) = (ℚ/ℤ)^{r_i} → H^i(C) onto the divisible part.
///
/// τ_i is given by a rational matrix T_i (dim C^i × r_i) whose columns are
/// cocycles; T_i viewed on ℚ^{r_i} is a homomorphism ℚ^{r_i} → C^i, it sends ℤ^{r_i}
/// into coboundaries, and the induced map (ℚ/ℤ)^{r_i} → H^i(C) is τ_i.
struct NearlyPerfectComplex {
  BoundedComplex complex;
  std::map<int, std::size_t> ranks;
  std::map<int, RatMatrix> tau;

  std::size_t rank(int i) const;
  RatMatrix tau_matrix(int i) const;
  /// Degrees where C or some L_i is nonzero, as [lo, hi] (empty if lo > hi).
  std::pair<int, int> support() const;
};

struct ValidationIssue {
  int degree = 0;
  std::string invariant;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool valid() const { return issues.empty(); }
  std::string to_string() const;
};

/// Checks every defining condition; never throws.
ValidationReport validate(const NearlyPerfectComplex& n);

/// Per-degree witness of 0 → H^i(C)_codiv → H^i(Cone) → Hom(L_{i+1}, ℤ) → 0.
struct SequenceWitness {
  int degree = 0;
  MixedModule codiv;    // H^i(C)_codiv
  MixedModule middle;   // H^i(Cone)
  MixedModule lattice;  // Hom(L_{i+1}, ℤ) = ℤ^{r_{i+1}}
  ModuleHom f;
  ModuleHom g;
  bool f_injective = false;
  bool g_surjective = false;
  bool middle_exact = false;
  bool exact() const { return f_injective && g_surjective && middle_exact; }
};

struct ConeData {
  BoundedComplex q;  // Q^i = Hom(L_i, ℚ) = ℚ^{r_i}, zero differentials
  ChainMap alpha;    // Q → C
  Cone cone;
  CohomologyRecord cone_cohomology;
  std::vector<SequenceWitness> witnesses;
};

/// Requires a valid instance (PreconditionError carrying the report otherwise).
ConeData build_cone(const NearlyPerfectComplex& n);

/// Image of χ(C) in K₀(ℤ) = ℤ via a perfect replacement of the cone.
long chi(const NearlyPerfectComplex& n);
long chi(const ConeData& cone);

/// Reference value for complexes with one nonzero term C = C^d:
/// (−1)^d (rank F − rank M) with F ↠ C_codiv free of minimal rank and
/// M = ker(Hom(L_d, ℚ) ⊕ F → C).
long chi_single_degree_formula(const NearlyPerfectComplex& n);

}  // namespace nearperf
