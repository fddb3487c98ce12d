#pragma once

#include <map>
#include <vector>

#include "nearperf/mixed_module.hpp"

namespace nearperf {

/// Cochain complex C^lo → … → C^hi of mixed modules; zero outside [lo, hi].
class BoundedComplex {
 public:
  BoundedComplex() = default;
  /// terms[k] sits in degree lo + k; diffs[k] : C^{lo+k} → C^{lo+k+1}.
  /// Checks shapes and d ∘ d = 0.
  BoundedComplex(int lo, std::vector<MixedModule> terms, std::vector<ModuleHom> diffs);

  /// Complex with a single term in degree `deg`.
  static BoundedComplex concentrated(int deg, const MixedModule& m);

  int lo() const { return lo_; }
  int hi() const { return lo_ + static_cast<int>(terms_.size()) - 1; }
  bool empty() const { return terms_.empty(); }

  const MixedModule& term(int i) const;
  ModuleHom differential(int i) const;

  bool is_perfect() const;
  bool is_torsion_free() const;

 private:
  int lo_ = 0;
  std::vector<MixedModule> terms_;
  std::vector<ModuleHom> diffs_;
};

/// C[1]: C[1]^i = C^{i+1} with differential −d.
BoundedComplex shift(const BoundedComplex& c);
/// Degreewise direct sum (terms normalised; coordinates through the injections).
BoundedComplex direct_sum(const BoundedComplex& a, const BoundedComplex& b);

class ChainMap {
 public:
  ChainMap() = default;
  /// Missing components are zero. Checks that the square at every degree commutes.
  ChainMap(BoundedComplex source, BoundedComplex target, std::map<int, ModuleHom> components);

  static ChainMap identity(const BoundedComplex& c);

  const BoundedComplex& source() const { return src_; }
  const BoundedComplex& target() const { return tgt_; }
  ModuleHom component(int i) const;

  /// g * f is g ∘ f.
  friend ChainMap operator*(const ChainMap& g, const ChainMap& f);

 private:
  BoundedComplex src_;
  BoundedComplex tgt_;
  std::map<int, ModuleHom> comps_;
};

/// H^i = Z^i / B^i with the data needed to move between cocycles and classes.
struct CohomologyGroup {
  int degree = 0;
  MixedModule term;       // C^i
  Subgroup cocycles;      // X ∩ d⁻¹(Y^{i+1}) in the ambient coordinates of C^i
  Subgroup coboundaries;  // Y^i + d(X^{i−1})
  MixedModule module;
  RatMatrix to_h;    // ambient coordinates of C^i → coordinates of H^i (meaningful on cocycles)
  RatMatrix from_h;  // representative cocycles of the normal form generators

  /// Z^i as a module with its inclusion into C^i.
  Kernel cocycle_module() const;
  /// The projection Z^i → H^i.
  ModuleHom cocycle_projection() const;
  Kernel divisible() const { return divisible_part(module); }
  Cokernel codivisible() const { return codivisible_quotient(module); }
};

class CohomologyRecord {
 public:
  CohomologyRecord() = default;
  CohomologyRecord(int lo, std::vector<CohomologyGroup> groups) : lo_(lo), groups_(std::move(groups)) {}
  int lo() const { return lo_; }
  int hi() const { return lo_ + static_cast<int>(groups_.size()) - 1; }
  /// Group in degree i; throws DimensionError outside the stored range.
  const CohomologyGroup& at(int i) const;
  /// H^i, the zero module outside the stored range.
  MixedModule module_at(int i) const;
  bool is_acyclic() const;

 private:
  int lo_ = 0;
  std::vector<CohomologyGroup> groups_;
};

CohomologyGroup cohomology_at(const BoundedComplex& c, int i);
CohomologyRecord cohomology(const BoundedComplex& c);
/// Map induced on H^i by a chain map.
ModuleHom induced_map(const ChainMap& f, const CohomologyGroup& source, const CohomologyGroup& target);

/// Cone^i = A^{i+1} ⊕ B^i with d(a, b) = (−d_A a, f(a) + d_B b).
struct Cone {
  BoundedComplex complex;
  std::map<int, ModuleHom> inj_source;   // A^{i+1} → Cone^i
  std::map<int, ModuleHom> inj_target;   // B^i → Cone^i
  std::map<int, ModuleHom> proj_source;  // Cone^i → A^{i+1}
  std::map<int, ModuleHom> proj_target;  // Cone^i → B^i
  ChainMap from_target;                  // B → Cone
  ChainMap to_shifted_source;            // Cone → A[1]

  ModuleHom injection_source(int i) const;
  ModuleHom injection_target(int i) const;
  ModuleHom projection_source(int i) const;
  ModuleHom projection_target(int i) const;
};

Cone cone(const ChainMap& f);
bool is_acyclic(const BoundedComplex& c);
bool is_quasi_iso(const ChainMap& f);

struct Replacement {
  BoundedComplex complex;
  ChainMap map;  // complex → original, a quasi-isomorphism
};

/// Perfect complex quasi-isomorphic to C (all H^i must be finitely generated).
/// Returns C itself with the identity when C is already perfect.
Replacement perfect_replacement(const BoundedComplex& c);

struct Lift {
  ChainMap h;                  // P → Q
  std::map<int, ModuleHom> s;  // s^i : P^i → C^{i−1}, with βh − α = ds + sd
};

/// For α : P → C with P perfect and β : Q → C a quasi-isomorphism.
Lift lift_through_quasi_iso(const ChainMap& alpha, const ChainMap& beta);

/// Σ (−1)^i rank P^i.
long euler_rank(const BoundedComplex& p);

}  // namespace nearperf
