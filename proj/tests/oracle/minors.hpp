#pragma once

// Reference invariants computed from k x k minors. Exponential, small inputs only.

#include <gmpxx.h>

#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

using Grid = std::vector<std::vector<mpz_class>>;

inline mpz_class det_cofactor(const Grid& m) {
  const std::size_t n = m.size();
  if (n == 0) return 1;
  if (n == 1) return m[0][0];
  mpz_class s = 0;
  for (std::size_t c = 0; c < n; ++c) {
    if (m[0][c] == 0) continue;
    Grid sub;
    for (std::size_t i = 1; i < n; ++i) {
      std::vector<mpz_class> row;
      for (std::size_t j = 0; j < n; ++j)
        if (j != c) row.push_back(m[i][j]);
      sub.push_back(row);
    }
    mpz_class t = m[0][c] * det_cofactor(sub);
    s += (c % 2 == 0) ? t : mpz_class(-t);
  }
  return s;
}

inline void subsets(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& f) {
  std::vector<std::size_t> idx;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (idx.size() == k) {
      f(idx);
      return;
    }
    for (std::size_t i = start; i < n; ++i) {
      idx.push_back(i);
      rec(i + 1);
      idx.pop_back();
    }
  };
  rec(0);
}

/// gcd of all k x k minors (0 if all vanish).
inline mpz_class determinantal_divisor(const Grid& m, std::size_t cols, std::size_t k) {
  mpz_class g = 0;
  subsets(m.size(), k, [&](const std::vector<std::size_t>& rs) {
    subsets(cols, k, [&](const std::vector<std::size_t>& cs) {
      Grid sub;
      for (auto r : rs) {
        std::vector<mpz_class> row;
        for (auto c : cs) row.push_back(m[r][c]);
        sub.push_back(row);
      }
      mpz_class d = det_cofactor(sub);
      mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), d.get_mpz_t());
    });
  });
  return g;
}

/// Invariant factors d_k = D_k / D_{k-1}, for k up to min(rows, cols).
inline std::vector<mpz_class> invariant_factors(const Grid& m, std::size_t cols) {
  std::vector<mpz_class> out;
  mpz_class prev = 1;
  for (std::size_t k = 1; k <= std::min(m.size(), cols); ++k) {
    mpz_class dk = determinantal_divisor(m, cols, k);
    if (dk == 0) {
      out.push_back(0);
      prev = 0;
      continue;
    }
    out.push_back(dk / prev);
    prev = dk;
  }
  return out;
}

}  // namespace oracle
