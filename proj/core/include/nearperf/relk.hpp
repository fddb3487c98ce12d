#pragma once

#include <map>

#include "nearperf/mixed_module.hpp"

namespace nearperf {

/// Classes in K₀(ℤ, ℚ) and G₀(ℤ, ℚ) are positive rationals: a finite module maps
/// to its order and [A, g, B] to a generalised |det g|.
using PosRational = Rat;

/// [A, g, B] with A, B finitely generated and g : A⊗ℚ → B⊗ℚ invertible,
/// given on the free coordinates (free_rank(B) × free_rank(A)).
struct TripleClass {
  MixedModule a;
  RatMatrix g;
  MixedModule b;
};

/// Throws PreconditionError unless A, B are finitely generated and g is invertible.
void check_triple(const TripleClass& t);

/// [coker h] − [ker h] − [B/nB] + [ₙB] for a homomorphism h : A → B with h⊗ℚ = n·g.
PosRational g0_class_with(const TripleClass& t, const ModuleHom& h, const Int& n);
/// Evaluated with h = n·g on the free part and zero on torsion, for two values of n.
PosRational g0_class(const TripleClass& t);

/// A, B free: |det g|, cross-checked against |coker(n g)| / |ℤ^r / n|.
PosRational k0_class(const TripleClass& t);

/// Order of a finite module, cross-checked through the resolution ℤ^t →diag→ ℤ^t.
PosRational finite_module_class(const MixedModule& m);

/// ∂ : K₁(ℚ) = ℚ^× → K₀(ℤ, ℚ), u ↦ [ℤ, u, ℤ] = |u|.
PosRational boundary(const Rat& unit);
/// A square invertible matrix over ℚ, through its determinant.
PosRational boundary(const RatMatrix& unit);

/// Finitely supported map prime → exponent.
using LocalValuationVector = std::map<Int, long>;

/// v_l(q).
long localize(const PosRational& q, const Int& l);
/// (v_l(q))_l over the primes dividing q's numerator or denominator.
LocalValuationVector local_components(const PosRational& q);
/// Π l^{v_l}.
PosRational assemble(const LocalValuationVector& v);

}  // namespace nearperf
