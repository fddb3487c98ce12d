#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nearperf/subgroup.hpp"

namespace nearperf {

enum class Summand { Free, Torsion, Rational, RationalModOne };

/// ℤ^a ⊕ ℤ/n₁ ⊕ … ⊕ ℤ/n_t ⊕ ℚ^b ⊕ (ℚ/ℤ)^c with n₁ | n₂ | … and every nᵢ ≥ 2.
///
/// Realised as X / Y inside ℚ^{a+t+b+c}: X = ℤ^{a+t} ⊕ ℚ^{b+c},
/// Y = 0 ⊕ ⊕nᵢℤ ⊕ 0 ⊕ ℤ^c. Homomorphisms are rational matrices preserving X and Y.
class MixedModule {
 public:
  MixedModule() = default;
  MixedModule(std::size_t free_rank, IntVector torsion, std::size_t q_rank, std::size_t qz_rank);

  static MixedModule free(std::size_t a) { return {a, {}, 0, 0}; }
  static MixedModule rational(std::size_t b) { return {0, {}, b, 0}; }
  static MixedModule rational_mod_one(std::size_t c) { return {0, {}, 0, c}; }
  /// Finite module ⊕ℤ/nᵢ given by arbitrary orders (normalised to a divisibility chain).
  static MixedModule finite(const IntVector& orders);

  std::size_t free_rank() const { return a_; }
  const IntVector& torsion() const { return t_; }
  std::size_t q_rank() const { return b_; }
  std::size_t qz_rank() const { return c_; }

  std::size_t dim() const { return a_ + t_.size() + b_ + c_; }
  std::size_t torsion_offset() const { return a_; }
  std::size_t q_offset() const { return a_ + t_.size(); }
  std::size_t qz_offset() const { return a_ + t_.size() + b_; }
  Summand kind(std::size_t coord) const;
  /// Order of the cyclic summand at a torsion coordinate.
  const Int& order_at(std::size_t coord) const { return t_[coord - a_]; }

  Subgroup ambient() const;
  Subgroup relations() const;

  bool is_zero() const { return dim() == 0; }
  bool is_finitely_generated() const { return b_ == 0 && c_ == 0; }
  bool is_finite() const { return a_ == 0 && b_ == 0 && c_ == 0; }
  bool is_torsion_free() const { return t_.empty() && c_ == 0; }
  /// Order of a finite module; throws PreconditionError otherwise.
  Int order() const;

  friend bool operator==(const MixedModule& x, const MixedModule& y) {
    return x.a_ == y.a_ && x.t_ == y.t_ && x.b_ == y.b_ && x.c_ == y.c_;
  }

  std::string to_string() const;

 private:
  std::size_t a_ = 0;
  IntVector t_;
  std::size_t b_ = 0;
  std::size_t c_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, const MixedModule& m) { return os << m.to_string(); }

/// Rationally representable homomorphism, stored in canonical form: entries from ℤ
/// or finite columns into ℤ/n rows are reduced mod n, into ℚ/ℤ rows mod 1.
/// Equal homomorphisms have equal matrices.
class ModuleHom {
 public:
  ModuleHom() = default;
  /// Throws OutOfClassError if the matrix does not define a homomorphism.
  ModuleHom(MixedModule source, MixedModule target, const RatMatrix& m);

  static ModuleHom zero(const MixedModule& source, const MixedModule& target);
  static ModuleHom identity(const MixedModule& m);

  const MixedModule& source() const { return src_; }
  const MixedModule& target() const { return tgt_; }
  const RatMatrix& matrix() const { return m_; }

  bool is_zero() const { return m_.is_zero(); }
  /// Applies the representing matrix; the result is a representative, not reduced.
  RatVector apply(const RatVector& x) const { return m_.apply(x); }

  friend bool operator==(const ModuleHom& f, const ModuleHom& g) {
    return f.src_ == g.src_ && f.tgt_ == g.tgt_ && f.m_ == g.m_;
  }
  /// g * f is g ∘ f.
  friend ModuleHom operator*(const ModuleHom& g, const ModuleHom& f);
  friend ModuleHom operator+(const ModuleHom& f, const ModuleHom& g);
  friend ModuleHom operator-(const ModuleHom& f, const ModuleHom& g);
  friend ModuleHom operator-(const ModuleHom& f);
  friend ModuleHom operator*(const Int& k, const ModuleHom& f);

 private:
  MixedModule src_;
  MixedModule tgt_;
  RatMatrix m_;
};

/// True iff m maps the ambient and relation subgroups of `source` into those of `target`.
bool is_homomorphism(const MixedModule& source, const MixedModule& target, const RatMatrix& m);

/// Canonical representative (see ModuleHom); m must define a homomorphism.
RatMatrix canonical_matrix(const MixedModule& source, const MixedModule& target, const RatMatrix& m);

/// A subquotient X/Y of some ℚ^n identified with a normal form module.
/// `to` sends ℚ^n to the normal form coordinates, `from` goes back.
struct Presented {
  MixedModule module;
  RatMatrix to;
  RatMatrix from;
};

Presented present(const Subgroup& x, const Subgroup& y);

struct Kernel {
  MixedModule module;
  ModuleHom inclusion;
};

struct Cokernel {
  MixedModule module;
  ModuleHom projection;
};

Kernel kernel(const ModuleHom& f);
Cokernel cokernel(const ModuleHom& f);
/// Image of f with the factorisation f = inclusion ∘ corestriction.
struct Image {
  MixedModule module;
  ModuleHom corestriction;
  ModuleHom inclusion;
};
Image image(const ModuleHom& f);

bool is_injective(const ModuleHom& f);
bool is_surjective(const ModuleHom& f);
bool is_isomorphism(const ModuleHom& f);

struct DirectSum {
  MixedModule module;
  std::vector<ModuleHom> injections;
  std::vector<ModuleHom> projections;
};

DirectSum direct_sum(const std::vector<MixedModule>& parts);

/// Divisible part ℚ^b ⊕ (ℚ/ℤ)^c with its inclusion.
Kernel divisible_part(const MixedModule& m);
/// M / M_div = ℤ^a ⊕ torsion with its projection.
Cokernel codivisible_quotient(const MixedModule& m);
/// Elements killed by n.
Kernel n_torsion(const MixedModule& m, const Int& n);
/// M ⊗ ℤ/n.
Cokernel reduce_mod_n(const MixedModule& m, const Int& n);

/// ℤ_l^a ⊕ ⊕ℤ/l^{kᵢ}.
struct LAdicModule {
  Int prime;
  std::size_t free_rank = 0;
  std::vector<long> exponents;  // sorted, each ≥ 1

  friend bool operator==(const LAdicModule& x, const LAdicModule& y) {
    return x.prime == y.prime && x.free_rank == y.free_rank && x.exponents == y.exponents;
  }
  std::string to_string() const;
};

inline std::ostream& operator<<(std::ostream& os, const LAdicModule& m) { return os << m.to_string(); }

LAdicModule ladic_sum(const LAdicModule& x, const LAdicModule& y);
LAdicModule tate_module(const MixedModule& m, const Int& l);
LAdicModule complete(const MixedModule& m, const Int& l);
/// l-primary part of a finitely generated module tensored with ℤ_l.
LAdicModule localize(const MixedModule& m, const Int& l);

/// Module with an automorphism σ satisfying σ^order = 1 (a ℤ[C_order]-module).
struct CyclicModule {
  MixedModule module;
  ModuleHom sigma;
  std::size_t order = 1;
};

/// Checks that σ is an automorphism and σ^order = id.
bool is_valid_action(const CyclicModule& m);

/// Tate groups Ĥ⁰ = ker(τ−1)/im N and Ĥ¹ = ker N/im(τ−1) for the subgroup of order k
/// generated by τ = σ^{order/k}.
std::pair<MixedModule, MixedModule> tate_cohomology(const CyclicModule& m, std::size_t k);
bool is_cohomologically_trivial(const CyclicModule& m);
/// The completion of a torsion-free module with the induced action, tested for
/// vanishing Tate groups. Computed on the codivisible quotient ℤ^a and localised at l.
bool completion_is_cohomologically_trivial(const CyclicModule& m, const Int& l);

}  // namespace nearperf
