#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "nearperf/linalg.hpp"

namespace nearperf {

/// A subgroup V + Λ of ℚ^n: V a rational subspace, Λ a finitely generated lattice.
///
/// Stored canonically: V by its reduced row echelon basis, Λ reduced modulo V
/// (zero at the pivot coordinates of V) and in Hermite form on the remaining
/// coordinates. Two subgroups are equal iff their stored data agree.
class Subgroup {
 public:
  Subgroup() = default;
  /// The zero subgroup of ℚ^dim.
  explicit Subgroup(std::size_t dim);

  /// Subgroup spanned over ℚ by the columns of `rational_gens` and over ℤ by
  /// the columns of `integral_gens`. Both have `dim` rows (or zero columns).
  static Subgroup generated(std::size_t dim, const RatMatrix& rational_gens, const RatMatrix& integral_gens);
  static Subgroup whole(std::size_t dim);
  static Subgroup lattice_of(const RatMatrix& integral_gens);
  static Subgroup span_of(const RatMatrix& rational_gens);

  std::size_t dim() const { return dim_; }
  /// Basis of V as columns (dim × k).
  RatMatrix span() const;
  std::size_t span_dim() const { return pivots_.size(); }
  const std::vector<std::size_t>& pivots() const { return pivots_; }
  /// Basis of Λ as columns (dim × r), zero at the pivots of V.
  const RatMatrix& lattice() const { return lattice_; }
  std::size_t lattice_rank() const { return lattice_.cols(); }

  /// x minus its component along V (so the result vanishes at the pivots).
  RatVector reduce(const RatVector& x) const;
  /// The quotient map ℚ^dim → ℚ^dim / V in coordinates: (dim − k) × dim.
  RatMatrix quotient_map() const;
  /// The coordinate section ℚ^dim / V → ℚ^dim: dim × (dim − k).
  RatMatrix section() const;
  std::vector<std::size_t> free_coordinates() const;

  bool contains(const RatVector& x) const;
  /// True iff every rational multiple of x lies in the subgroup, i.e. x ∈ V.
  bool contains_line(const RatVector& x) const;
  bool contains(const Subgroup& other) const;
  bool is_zero() const { return pivots_.empty() && lattice_.cols() == 0; }

  /// Coefficients (u, z) with x = span()·u + lattice()·z, z integral; nullopt if x is not contained.
  std::optional<std::pair<RatVector, IntVector>> decompose(const RatVector& x) const;

  friend bool operator==(const Subgroup& a, const Subgroup& b) {
    return a.dim_ == b.dim_ && a.rows_ == b.rows_ && a.lattice_ == b.lattice_;
  }

 private:
  std::size_t dim_ = 0;
  RatMatrix rows_;                   // RREF basis of V, k × dim
  std::vector<std::size_t> pivots_;  // pivot column of each row
  RatMatrix lattice_;                // dim × r
};

Subgroup sum(const Subgroup& a, const Subgroup& b);
/// F(S) for F : ℚ^dim → ℚ^m.
Subgroup image(const RatMatrix& f, const Subgroup& s);
/// {x ∈ D : g x ∈ S}.
Subgroup preimage_within(const Subgroup& d, const RatMatrix& g, const Subgroup& s);
Subgroup intersect(const Subgroup& a, const Subgroup& b);
/// Some x ∈ D with g x − t ∈ S, or nullopt.
std::optional<RatVector> solve_within(const Subgroup& d, const RatMatrix& g, const Subgroup& s, const RatVector& t);

/// Structure of the subquotient X / Y (Y ⊆ X ⊆ ℚ^n) as
/// ℤ^a ⊕ ⊕ℤ/t_i ⊕ ℚ^b ⊕ (ℚ/ℤ)^c, with explicit coordinate maps.
///
/// to_nf : ℚ^n → ℚ^{a+|t|+b+c} and from_nf in the other direction induce
/// mutually inverse isomorphisms between X/Y and the normal form, and
/// to_nf · from_nf is the identity matrix.
struct Subquotient {
  std::size_t free_rank = 0;
  IntVector torsion;
  std::size_t q_rank = 0;
  std::size_t qz_rank = 0;
  RatMatrix to_nf;
  RatMatrix from_nf;
};

Subquotient normalize(const Subgroup& x, const Subgroup& y);

/// Left inverse (BᵀB)⁻¹Bᵀ of a matrix with independent columns.
RatMatrix left_inverse(const RatMatrix& b);

}  // namespace nearperf
