#include "nearperf/linalg.hpp"

#include <atomic>
#include <string>
#include <utility>

namespace nearperf {

namespace {

std::atomic<std::size_t> g_bit_limit{0};

Int floor_div(const Int& a, const Int& b) {
  Int q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

bool divides(const Int& d, const Int& a) {
  if (d == 0) return a == 0;
  return mpz_divisible_p(a.get_mpz_t(), d.get_mpz_t()) != 0;
}

}  // namespace

RatMatrix to_rat(const IntMatrix& m) {
  RatMatrix r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = Rat(m(i, j));
  return r;
}

IntMatrix to_int(const RatMatrix& m) {
  IntMatrix r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (m(i, j).get_den() != 1) throw PreconditionError("matrix entry is not integral");
      r(i, j) = m(i, j).get_num();
    }
  return r;
}

bool is_integral(const RatMatrix& m) {
  for (const auto& v : m.data())
    if (v.get_den() != 1) return false;
  return true;
}

bool is_integral(const RatVector& v) {
  for (const auto& x : v)
    if (x.get_den() != 1) return false;
  return true;
}

Int common_denominator(const RatMatrix& m) {
  Int l = 1;
  for (const auto& v : m.data()) l = lcm(l, v.get_den());
  return l;
}

void set_bit_limit(std::size_t bits) { g_bit_limit.store(bits); }
std::size_t bit_limit() { return g_bit_limit.load(); }

void check_bits(const Int& v) {
  const std::size_t lim = g_bit_limit.load(std::memory_order_relaxed);
  if (lim != 0 && mpz_sizeinbase(v.get_mpz_t(), 2) > lim)
    throw BitLimitExceeded("integer exceeds configured bit limit of " + std::to_string(lim));
}

Int gcd(const Int& a, const Int& b) {
  Int g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return g;
}

Int lcm(const Int& a, const Int& b) {
  Int l;
  mpz_lcm(l.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return l;
}

long valuation(const Int& n, const Int& l) {
  require(n != 0, "valuation of zero");
  Int m = abs(n);
  long v = 0;
  while (divides(l, m)) {
    m /= l;
    ++v;
  }
  return v;
}

long valuation(const Rat& q, const Int& l) { return valuation(q.get_num(), l) - valuation(q.get_den(), l); }

bool is_prime(const Int& n) { return n >= 2 && mpz_probab_prime_p(n.get_mpz_t(), 30) > 0; }

std::vector<Int> prime_factors(const Int& n) {
  std::vector<Int> out;
  Int m = abs(n);
  for (Int p = 2; p * p <= m; ++p) {
    if (divides(p, m)) {
      out.push_back(p);
      while (divides(p, m)) m /= p;
    }
  }
  if (m > 1) out.push_back(m);
  return out;
}

// ---------------------------------------------------------------------------
// Smith normal form

std::size_t SnfDecomposition::rank() const {
  std::size_t r = 0;
  for (std::size_t i = 0; i < std::min(D.rows(), D.cols()); ++i)
    if (D(i, i) != 0) ++r;
  return r;
}

IntVector SnfDecomposition::diagonal() const {
  IntVector d;
  for (std::size_t i = 0; i < std::min(D.rows(), D.cols()); ++i) d.push_back(D(i, i));
  return d;
}

SnfDecomposition snf(const IntMatrix& input) {
  IntMatrix a = input;
  const std::size_t m = a.rows(), n = a.cols();
  IntMatrix u = IntMatrix::identity(m);
  IntMatrix v = IntMatrix::identity(n);

  for (std::size_t t = 0; t < std::min(m, n); ++t) {
    bool finished = false;
    while (true) {
      // Minimum-absolute-value pivot in the trailing submatrix.
      std::size_t pr = m, pc = n;
      Int best;
      for (std::size_t i = t; i < m; ++i)
        for (std::size_t j = t; j < n; ++j) {
          if (a(i, j) == 0) continue;
          if (pr == m || abs(a(i, j)) < best) {
            best = abs(a(i, j));
            pr = i;
            pc = j;
          }
        }
      if (pr == m) {
        finished = true;
        break;
      }
      a.swap_rows(t, pr);
      u.swap_rows(t, pr);
      a.swap_cols(t, pc);
      v.swap_cols(t, pc);

      bool clean = true;
      for (std::size_t i = t + 1; i < m; ++i) {
        if (a(i, t) == 0) continue;
        Int q = floor_div(a(i, t), a(t, t));
        a.add_row(i, t, -q);
        u.add_row(i, t, -q);
        if (a(i, t) != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < n; ++j) {
        if (a(t, j) == 0) continue;
        Int q = floor_div(a(t, j), a(t, t));
        a.add_col(j, t, -q);
        v.add_col(j, t, -q);
        if (a(t, j) != 0) clean = false;
      }
      check_bits(a(t, t));
      if (!clean) continue;

      // Enforce divisibility of the trailing block by the pivot.
      bool fixed = false;
      for (std::size_t i = t + 1; i < m && !fixed; ++i)
        for (std::size_t j = t + 1; j < n; ++j)
          if (!divides(a(t, t), a(i, j))) {
            a.add_row(t, i, 1);
            u.add_row(t, i, 1);
            fixed = true;
            break;
          }
      if (!fixed) break;
    }
    if (finished) break;
    if (a(t, t) < 0) {
      a.scale_row(t, -1);
      u.scale_row(t, -1);
    }
  }
  for (const auto& x : u.data()) check_bits(x);
  for (const auto& x : v.data()) check_bits(x);
  return {std::move(u), std::move(a), std::move(v)};
}

// ---------------------------------------------------------------------------
// Column Hermite form

ColumnHermite column_hermite(const IntMatrix& input) {
  IntMatrix h = input;
  const std::size_t m = h.rows(), n = h.cols();
  IntMatrix v = IntMatrix::identity(n);
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t i = 0; i < m && r < n; ++i) {
    while (true) {
      std::size_t pc = n;
      Int best;
      for (std::size_t j = r; j < n; ++j) {
        if (h(i, j) == 0) continue;
        if (pc == n || abs(h(i, j)) < best) {
          best = abs(h(i, j));
          pc = j;
        }
      }
      if (pc == n) break;
      h.swap_cols(r, pc);
      v.swap_cols(r, pc);
      bool clean = true;
      for (std::size_t j = r + 1; j < n; ++j) {
        if (h(i, j) == 0) continue;
        Int q = floor_div(h(i, j), h(i, r));
        h.add_col(j, r, -q);
        v.add_col(j, r, -q);
        if (h(i, j) != 0) clean = false;
      }
      check_bits(h(i, r));
      if (clean) break;
    }
    if (h(i, r) == 0) continue;
    if (h(i, r) < 0) {
      h.scale_col(r, -1);
      v.scale_col(r, -1);
    }
    for (std::size_t j = 0; j < r; ++j) {
      Int q = floor_div(h(i, j), h(i, r));
      h.add_col(j, r, -q);
      v.add_col(j, r, -q);
    }
    pivots.push_back(i);
    ++r;
  }
  return {std::move(h), std::move(v), r, std::move(pivots)};
}

IntMatrix lattice_basis(const IntMatrix& generators) {
  ColumnHermite ch = column_hermite(generators);
  return ch.H.block(0, 0, ch.H.rows(), ch.rank);
}

std::optional<IntVector> solve_integral(const IntMatrix& a, const IntVector& b) {
  if (b.size() != a.rows()) throw DimensionError("solve_integral: rhs length mismatch");
  ColumnHermite ch = column_hermite(a);
  IntVector y(a.cols());
  for (std::size_t k = 0; k < ch.rank; ++k) {
    const std::size_t p = ch.pivot_rows[k];
    Int s = b[p];
    for (std::size_t j = 0; j < k; ++j) s -= ch.H(p, j) * y[j];
    if (!divides(ch.H(p, k), s)) return std::nullopt;
    y[k] = s / ch.H(p, k);
  }
  // Non-pivot rows must be consistent.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Int s = 0;
    for (std::size_t j = 0; j < ch.rank; ++j) s += ch.H(i, j) * y[j];
    if (s != b[i]) return std::nullopt;
  }
  return ch.V.apply(y);
}

IntMatrix kernel_basis(const IntMatrix& a) {
  ColumnHermite ch = column_hermite(a);
  return ch.V.block(0, ch.rank, a.cols(), a.cols() - ch.rank);
}

Int determinant(const IntMatrix& a) {
  Rat d = determinant(to_rat(a));
  return d.get_num();
}

// ---------------------------------------------------------------------------
// Rational elimination

RowEchelon rref(const RatMatrix& input) {
  RatMatrix r = input;
  std::vector<std::size_t> pivots;
  const std::size_t m = r.rows(), n = r.cols();
  std::size_t row = 0;
  for (std::size_t c = 0; c < n && row < m; ++c) {
    std::size_t p = m;
    for (std::size_t i = row; i < m; ++i)
      if (r(i, c) != 0) {
        p = i;
        break;
      }
    if (p == m) continue;
    r.swap_rows(row, p);
    Rat inv = 1 / r(row, c);
    r.scale_row(row, inv);
    for (std::size_t i = 0; i < m; ++i)
      if (i != row && r(i, c) != 0) r.add_row(i, row, -r(i, c));
    pivots.push_back(c);
    ++row;
  }
  return {std::move(r), std::move(pivots)};
}

std::size_t rank(const RatMatrix& a) { return rref(a).pivots.size(); }

RatMatrix nullspace(const RatMatrix& a) {
  RowEchelon e = rref(a);
  const std::size_t n = a.cols();
  std::vector<bool> is_pivot(n, false);
  for (auto p : e.pivots) is_pivot[p] = true;
  std::vector<RatVector> basis;
  for (std::size_t f = 0; f < n; ++f) {
    if (is_pivot[f]) continue;
    RatVector x(n);
    x[f] = 1;
    for (std::size_t r = 0; r < e.pivots.size(); ++r) x[e.pivots[r]] = -e.R(r, f);
    basis.push_back(std::move(x));
  }
  return column_matrix(basis, n);
}

std::optional<RatVector> solve_rational(const RatMatrix& a, const RatVector& b) {
  if (b.size() != a.rows()) throw DimensionError("solve_rational: rhs length mismatch");
  RatMatrix aug(a.rows(), a.cols() + 1);
  aug.set_block(0, 0, a);
  for (std::size_t i = 0; i < a.rows(); ++i) aug(i, a.cols()) = b[i];
  RowEchelon e = rref(aug);
  RatVector x(a.cols());
  for (std::size_t r = 0; r < e.pivots.size(); ++r) {
    if (e.pivots[r] == a.cols()) return std::nullopt;
    x[e.pivots[r]] = e.R(r, a.cols());
  }
  return x;
}

RatMatrix solve_rational_matrix(const RatMatrix& a, const RatMatrix& b) {
  if (b.rows() != a.rows()) throw DimensionError("solve_rational_matrix: row mismatch");
  RatMatrix x(a.cols(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    auto s = solve_rational(a, b.column(j));
    ensure(s.has_value(), "solve_rational_matrix: inconsistent system");
    x.set_column(j, *s);
  }
  return x;
}

RatMatrix inverse(const RatMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("inverse of non-square matrix");
  const std::size_t n = a.rows();
  RatMatrix aug = hconcat(a, RatMatrix::identity(n));
  if (n == 0) return RatMatrix(0, 0);
  RowEchelon e = rref(aug);
  if (e.pivots.size() < n || e.pivots[n - 1] != n - 1) throw PreconditionError("matrix is singular");
  return e.R.block(0, n, n, n);
}

Rat determinant(const RatMatrix& input) {
  if (input.rows() != input.cols()) throw DimensionError("determinant of non-square matrix");
  RatMatrix a = input;
  const std::size_t n = a.rows();
  Rat det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = n;
    for (std::size_t i = c; i < n; ++i)
      if (a(i, c) != 0) {
        p = i;
        break;
      }
    if (p == n) return 0;
    if (p != c) {
      a.swap_rows(p, c);
      det = -det;
    }
    det *= a(c, c);
    for (std::size_t i = c + 1; i < n; ++i)
      if (a(i, c) != 0) a.add_row(i, c, -a(i, c) / a(c, c));
  }
  return det;
}

RatMatrix column_space(const RatMatrix& a) {
  RowEchelon e = rref(a.transpose());
  return e.R.block(0, 0, e.pivots.size(), a.rows()).transpose();
}

RatMatrix left_nullspace(const RatMatrix& a) { return nullspace(a.transpose()).transpose(); }

}  // namespace nearperf
