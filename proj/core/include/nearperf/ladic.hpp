#pragma once

#include <map>
#include <vector>

#include "nearperf/npc.hpp"

namespace nearperf {

/// A complex of ℤ_l-modules held through an integer model: the terms of `model`
/// are ℤ^a ⊕ ⊕ℤ/l^k and the completed complex is model ⊗ ℤ_l.
struct LAdicComplex {
  Int prime;
  BoundedComplex model;

  LAdicModule term(int i) const { return localize(model.term(i), prime); }
  LAdicModule cohomology(int i) const;
  /// Σ (−1)^i rank over ℤ_l; every term must be free.
  long euler_rank() const;
};

/// lim C/l^n C. The divisible summands vanish and ℤ/n becomes ℤ/l^{v_l(n)}.
LAdicComplex complete_complex(const BoundedComplex& c, const Int& l);

/// The completed chain map between the completed source and target.
struct LAdicChainMap {
  LAdicComplex source;
  LAdicComplex target;
  ChainMap model;
};

LAdicChainMap complete_map(const ChainMap& f, const Int& l);
/// True iff the cone of the completed map has vanishing cohomology over ℤ_l.
bool is_quasi_iso(const LAdicChainMap& f);

/// |H^i(P ⊗ ℤ/l^n)| against the orders predicted by the completed cohomology.
struct FiniteLevelCheck {
  long level = 0;
  Int direct;     // computed on the complex P / l^n
  Int predicted;  // |Ĥ^i / l^n| · |Ĥ^{i+1}[l^n]|
  bool agrees() const { return direct == predicted; }
};

/// 0 → Ĥ^i(P)_codiv → H^i(P̂) → T_l(H^{i+1}(P)_div) → 0 for a complex P with
/// torsion-free terms, realised over ℤ before tensoring with ℤ_l:
/// f is induced by P → P/P_div and g is the connecting map into the lattice
/// Λ ⊆ H^{i+1}(P_div) whose quotient is H^{i+1}(P)_div.
struct CompletionWitness {
  int degree = 0;
  Int prime;
  MixedModule codiv;   // H^i(P)_codiv
  MixedModule middle;  // H^i(P/P_div), the integer model of H^i(P̂)
  MixedModule lattice; // Λ ≅ ℤ^c
  RatMatrix lattice_generators;  // Λ's generators as vectors of P^{i+1}
  ModuleHom f;
  ModuleHom g;
  LAdicModule left;    // H^i(P)_codiv ⊗ ℤ_l
  LAdicModule centre;  // H^i(P̂)
  LAdicModule right;   // T_l(H^{i+1}(P)_div)
  bool f_injective = false;
  bool g_surjective = false;
  bool middle_exact = false;
  bool right_is_tate_module = false;  // Λ ⊗ ℤ_l ≅ T_l(H^{i+1}(P)_div)
  std::vector<FiniteLevelCheck> levels;

  bool exact() const;
};

/// Requires torsion-free terms (PreconditionError otherwise). Levels n = 1..max_level.
CompletionWitness completion_sequence(const BoundedComplex& p, const Int& l, int i, int max_level = 4);

/// Maps between the sequences of P and P' induced by φ : P → P'.
struct CompletionSequenceMap {
  ModuleHom left;
  ModuleHom middle;
  ModuleHom right;
  bool commutes = false;
};

/// Both sequences are built in degree i; `commutes` compares the two squares exactly.
CompletionSequenceMap completion_naturality(const ChainMap& phi, const Int& l, int i);

/// Quasi-isomorphism P → C with P^i = ℤ^{m_i} ⊕ ℚ^{s_i}; identity if C is already torsion-free.
/// Each H^i is presented by ℤ^{a+t} ⊕ ℚ^{b+c} modulo ℤ^{t+c}.
Replacement torsion_free_replacement(const BoundedComplex& c);

/// Alternating rank of the completion of a torsion-free replacement of C.
long chi_l(const NearlyPerfectComplex& n, const Int& l);

/// Endomorphism of Hom(L_{i+1}, ℤ/l^k) obtained from the connecting maps of
/// P → P → P/l^k and of the cone of Hom(L, ℚ) → P; entries in [0, l^k).
struct SnakeCheck {
  Int modulus;
  IntMatrix endomorphism;
  bool is_minus_identity() const;
};

SnakeCheck snake_sign_check(const NearlyPerfectComplex& n, const Int& l, long k, int i);

}  // namespace nearperf
