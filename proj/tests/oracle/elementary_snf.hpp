#pragma once

// Diagonal of the Smith form by plain elementary operations: first nonzero pivot,
// extended-gcd 2x2 combinations, no transform tracking.

#include <gmpxx.h>

#include <algorithm>
#include <vector>

namespace oracle {

inline std::vector<mpz_class> elementary_snf_diagonal(std::vector<std::vector<mpz_class>> a, std::size_t cols) {
  const std::size_t m = a.size(), n = cols;
  const std::size_t k = std::min(m, n);
  for (std::size_t t = 0; t < k; ++t) {
    // bring any nonzero entry to (t,t)
    bool found = false;
    for (std::size_t i = t; i < m && !found; ++i)
      for (std::size_t j = t; j < n && !found; ++j)
        if (a[i][j] != 0) {
          std::swap(a[t], a[i]);
          for (auto& row : a) std::swap(row[t], row[j]);
          found = true;
        }
    if (!found) break;
    bool dirty = true;
    while (dirty) {
      dirty = false;
      for (std::size_t i = t + 1; i < m; ++i) {
        if (a[i][t] == 0) continue;
        mpz_class g, s, r;
        mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), r.get_mpz_t(), a[t][t].get_mpz_t(), a[i][t].get_mpz_t());
        mpz_class p = a[t][t] / g, q = a[i][t] / g;
        for (std::size_t j = 0; j < n; ++j) {
          mpz_class x = a[t][j], y = a[i][j];
          a[t][j] = s * x + r * y;
          a[i][j] = -q * x + p * y;
        }
      }
      for (std::size_t j = t + 1; j < n; ++j) {
        if (a[t][j] == 0) continue;
        mpz_class g, s, r;
        mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), r.get_mpz_t(), a[t][t].get_mpz_t(), a[t][j].get_mpz_t());
        mpz_class p = a[t][t] / g, q = a[t][j] / g;
        for (std::size_t i = 0; i < m; ++i) {
          mpz_class x = a[i][t], y = a[i][j];
          a[i][t] = s * x + r * y;
          a[i][j] = -q * x + p * y;
        }
        dirty = true;
      }
      if (dirty) continue;
      // divisibility of the rest by the pivot
      for (std::size_t i = t + 1; i < m && !dirty; ++i)
        for (std::size_t j = t + 1; j < n; ++j)
          if (a[i][j] % a[t][t] != 0) {
            for (std::size_t c = 0; c < n; ++c) a[t][c] += a[i][c];
            dirty = true;
            break;
          }
    }
  }
  std::vector<mpz_class> d(k);
  for (std::size_t t = 0; t < k; ++t) d[t] = abs(a[t][t]);
  return d;
}

}  // namespace oracle
