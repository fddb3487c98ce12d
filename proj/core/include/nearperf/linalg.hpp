#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "nearperf/matrix.hpp"

namespace nearperf {

/// U * A * V = D with U, V unimodular and D diagonal, d1 | d2 | ... and di >= 0.
struct SnfDecomposition {
  IntMatrix U;
  IntMatrix D;
  IntMatrix V;

  std::size_t rank() const;
  /// Diagonal entries d_0 ... d_{min(m,n)-1}.
  IntVector diagonal() const;
};

SnfDecomposition snf(const IntMatrix& a);

/// Column-style Hermite form: H = A * V with V unimodular; the first `rank`
/// columns of H are a reduced echelon basis of the column lattice, the rest are zero.
struct ColumnHermite {
  IntMatrix H;
  IntMatrix V;
  std::size_t rank = 0;
  std::vector<std::size_t> pivot_rows;
};

ColumnHermite column_hermite(const IntMatrix& a);

/// Basis (as columns) of the lattice spanned by the columns of `generators`,
/// in canonical reduced Hermite form.
IntMatrix lattice_basis(const IntMatrix& generators);

/// Some integer x with A x = b, or nullopt when none exists.
std::optional<IntVector> solve_integral(const IntMatrix& a, const IntVector& b);

/// Columns form a basis of the integer kernel {x : A x = 0}; the lattice is saturated.
IntMatrix kernel_basis(const IntMatrix& a);

Int determinant(const IntMatrix& a);

// Rational linear algebra.

struct RowEchelon {
  RatMatrix R;                     // reduced row echelon form
  std::vector<std::size_t> pivots;  // pivot column of each nonzero row
};

RowEchelon rref(const RatMatrix& a);
std::size_t rank(const RatMatrix& a);
/// Basis of {x : A x = 0} as columns (one per free variable, canonical).
RatMatrix nullspace(const RatMatrix& a);
/// Particular solution with free variables set to zero, or nullopt.
std::optional<RatVector> solve_rational(const RatMatrix& a, const RatVector& b);
/// Solves A X = B column by column; throws ContractViolation if inconsistent.
RatMatrix solve_rational_matrix(const RatMatrix& a, const RatMatrix& b);
RatMatrix inverse(const RatMatrix& a);
Rat determinant(const RatMatrix& a);
/// Canonical basis (columns) of the column span of A.
RatMatrix column_space(const RatMatrix& a);
/// Rows spanning {y : y A = 0}.
RatMatrix left_nullspace(const RatMatrix& a);

/// Upper bound on bits of any integer produced by the elimination kernels.
/// Zero (the default) disables the check.
void set_bit_limit(std::size_t bits);
std::size_t bit_limit();
void check_bits(const Int& v);

Int gcd(const Int& a, const Int& b);
Int lcm(const Int& a, const Int& b);
/// l-adic valuation of a nonzero integer.
long valuation(const Int& n, const Int& l);
long valuation(const Rat& q, const Int& l);
bool is_prime(const Int& n);
/// Distinct prime factors in increasing order (trial division; desk-scale inputs).
std::vector<Int> prime_factors(const Int& n);

}  // namespace nearperf
