#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "nearperf/complexes.hpp"
#include "nearperf/npc.hpp"
#include "nearperf/relk.hpp"

namespace nearperf {

/// Decreasing filtration H^i = F^0 ⊇ F^1 ⊇ … ⊇ F^m ⊇ F^{m+1} = 0 on the cohomology of a complex.
/// steps[i] holds F^1, …, F^m as subgroups of the normal form coordinates of H^i; the
/// relations of H^i are added when the pieces are computed. Degrees without an entry
/// carry the trivial filtration.
struct Filtration {
  std::map<int, std::vector<Subgroup>> steps;
};

/// Gr^n H^i = F^n / F^{n+1}.
struct GradedPiece {
  int degree = 0;
  int step = 0;
  MixedModule module;
  /// Representatives in the coordinates of H^i of the free generators of `module`.
  RatMatrix lift;
};

/// All pieces, ascending by degree and then by step. Checks F^{n+1} ⊆ F^n.
std::vector<GradedPiece> graded_pieces(const BoundedComplex& m, const Filtration& f);

/// λ : Gr(H⁻) ⊗ ℚ → Gr(H⁺) ⊗ ℚ. Columns run over the free generators of the
/// odd-degree pieces, rows over the even-degree pieces, both in graded_pieces order.
struct GradedTrivialization {
  RatMatrix matrix;
};

/// Rational sections for one degree. H^i_ℚ has the free generators of H^i as basis.
struct DegreeSplitting {
  RatMatrix h_section;                 // m_i × h_i, cocycles lifting the basis of H^i_ℚ
  RatMatrix b_basis;                   // m_{i+1} × β_{i+1}, a basis of B^{i+1}_ℚ
  RatMatrix b_section;                 // m_i × β_{i+1}, d · b_section = b_basis
  std::vector<RatMatrix> gr_sections;  // per piece of degree i: h_i × g_n, lifts into F^n_ℚ
};

/// Sections for the chain ι₁…ι₇; m_i is the free rank of M^i.
struct SplittingChoice {
  std::map<int, DegreeSplitting> degrees;
};

SplittingChoice canonical_splitting(const BoundedComplex& m, const Filtration& f);
/// The canonical choice perturbed by random elements of the kernels and random bases.
SplittingChoice random_splitting(const BoundedComplex& m, const Filtration& f, std::uint64_t seed);
/// Throws PreconditionError unless every section composes with its projection to the identity.
void check_splitting(const BoundedComplex& m, const Filtration& f, const SplittingChoice& s);

/// λ_M : M⁻ ⊗ ℚ → M⁺ ⊗ ℚ on the free coordinates of the odd and even terms (ascending degree).
RatMatrix lambda_on_terms(const BoundedComplex& m, const Filtration& f, const GradedTrivialization& lambda,
                          const SplittingChoice& s);

/// [P⁻, λ_P, P⁺] in K₀(ℤ, ℚ) for a perfect complex.
PosRational chi_rel_perfect(const BoundedComplex& p, const Filtration& f, const GradedTrivialization& lambda);
PosRational chi_rel_perfect(const BoundedComplex& p, const Filtration& f, const GradedTrivialization& lambda,
                            const SplittingChoice& s);

/// [M⁻, λ_M, M⁺] in G₀(ℤ, ℚ) for finitely generated terms.
PosRational module_class(const BoundedComplex& m, const Filtration& f, const GradedTrivialization& lambda,
                         const SplittingChoice& s);
/// [Gr(H⁻), λ, Gr(H⁺)] in G₀(ℤ, ℚ).
PosRational graded_class(const BoundedComplex& m, const Filtration& f, const GradedTrivialization& lambda);

/// Π |H^even| / Π |H^odd| for a complex with finite cohomology.
PosRational cohomology_order_ratio(const BoundedComplex& m);

/// Gr(H(f)) on the free generators: odd pieces and even pieces, in graded_pieces order.
/// Throws ContractViolation if H(f) does not respect the filtrations.
struct GradedMap {
  RatMatrix odd;
  RatMatrix even;
};
GradedMap graded_map(const ChainMap& f, const Filtration& source, const Filtration& target);

/// Filtration on the source of a quasi-isomorphism with F^n = H(f)⁻¹(F^n).
Filtration pull_back(const ChainMap& f, const Filtration& target);
/// λ moved to the source of a filtered quasi-isomorphism: Gr(H⁺f)⁻¹ λ Gr(H⁻f).
GradedTrivialization pull_back(const ChainMap& f, const Filtration& source, const Filtration& target,
                               const GradedTrivialization& lambda);

/// T = K ⊕ Q with K^i = P^{i−1} ⊕ P^i, d_K(x, y) = (y, 0); coordinates ordered (P^{i−1}, P^i, Q^i).
struct Surjectification {
  BoundedComplex t;
  ChainMap beta;   // T → Q, the projection
  ChainMap gamma;  // T → P, (x, y, q) ↦ d x + y + α q
  bool gamma_surjective = false;
  bool cocycles_surjective = false;  // Z^i(T) → Z^i(P)
  bool beta_quasi_iso = false;
  bool gamma_quasi_iso = false;
  bool same_on_cohomology = false;  // H(α β) = H(γ)
  bool holds() const {
    return gamma_surjective && cocycles_surjective && beta_quasi_iso && gamma_quasi_iso && same_on_cohomology;
  }
};

/// For a quasi-isomorphism α : Q → P of perfect complexes.
Surjectification surjectify(const ChainMap& alpha);

/// The square K → V, K'' → V'' of exact rows 0 → K' → K → K'' → 0 over 0 → V' → V → V'' → 0,
/// all over ℚ. `incl_k` : K → V and `incl_k2` : K'' → V'' are injective, ε : V → V'' and
/// δ : K → K'' are surjective, and ε · incl_k = incl_k2 · δ.
struct SectionDiagram {
  RatMatrix eps;
  RatMatrix delta;
  RatMatrix incl_k;
  RatMatrix incl_k2;
};

/// σ : V'' → V with ε σ = id and σ(K'') ⊆ K, where σ restricted to K'' is a section of δ.
RatMatrix compatible_section(const SectionDiagram& d);

/// Class of the middle term of a filtered quasi-isomorphism γ : T → P with γ^i and Z^i(γ)
/// surjective, computed with sections compatible with K = ker γ.
struct TransportCheck {
  PosRational class_total;   // T with sections compatible with K
  PosRational class_kernel;  // K, acyclic
  PosRational class_image;   // P with the induced sections
  bool restricts_to_kernel = false;  // λ_T |K⁻ = λ_K
  bool commutes = false;             // γ⁺ λ_T = λ_P γ⁻
  bool holds() const {
    return restricts_to_kernel && commutes && class_kernel == 1 && class_total == class_kernel * class_image;
  }
};

TransportCheck transport_through(const ChainMap& gamma, const Filtration& target, const GradedTrivialization& lambda,
                                 std::uint64_t seed);

/// Both halves of the comparison for a filtered quasi-isomorphism α : Q → P.
struct QuasiIsoComparison {
  PosRational class_source;  // χ^rel(Q, transported λ)
  PosRational class_target;  // χ^rel(P, λ)
  Surjectification surjection;
  TransportCheck via_gamma;
  TransportCheck via_beta;
  bool holds() const {
    return class_source == class_target && surjection.holds() && via_gamma.holds() && via_beta.holds() &&
           via_gamma.class_total == via_beta.class_total && via_gamma.class_image == class_target &&
           via_beta.class_image == class_source;
  }
};

QuasiIsoComparison compare_through(const ChainMap& alpha, const Filtration& target, const GradedTrivialization& lambda,
                                   std::uint64_t seed);

/// Block layout of Gr(H(Cone)) for an instance: for each degree, Hom(L_{i+1}, ℤ) (step 0)
/// then H^i(C)_codiv (step 1). Degrees ascend; only nonzero blocks are listed.
struct TrivializationBlock {
  int degree = 0;
  int step = 0;
  std::size_t size = 0;
};
std::vector<TrivializationBlock> trivialization_layout(const NearlyPerfectComplex& n);
/// Rows: even-degree blocks, columns: odd-degree blocks (the shape λ must have).
std::pair<std::size_t, std::size_t> trivialization_shape(const NearlyPerfectComplex& n);

struct RelativeEuler {
  PosRational value;          // χ^rel(C, λ)
  PosRational rational_route;  // from the perfect replacement of the cone, with λ̃
  LocalValuationVector per_prime;  // v_l from the completed torsion-free replacement, with λ̃
  PosRational correction;     // ∂ det(λ̃⁻¹ λ)
  PosRational forgetful;      // [H⁻_codiv ⊕ Hom(L₊, ℤ), λ, H⁺_codiv ⊕ Hom(L₋, ℤ)] in G₀
  long rank_image = 0;        // Euler rank of the cone's perfect replacement
  bool routes_agree() const { return assemble(per_prime) == rational_route; }
};

/// λ and λ̃ use the trivialization_layout coordinates; λ̃ defaults to λ.
RelativeEuler chi_rel_npc(const NearlyPerfectComplex& n, const RatMatrix& lambda);
RelativeEuler chi_rel_npc(const NearlyPerfectComplex& n, const RatMatrix& lambda, const RatMatrix& lambda_tilde);

}  // namespace nearperf
