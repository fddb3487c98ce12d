#include "nearperf/generators.hpp"

#include <algorithm>

#include "nearperf/linalg.hpp"

namespace nearperf {

namespace {

enum class BlockKind { z, z_n_z, tors, z_q, qz, q_q, z_qz, z_tors, qz_qz };

struct Block {
  int lo = 0;
  std::vector<MixedModule> terms;  // one or two
  RatMatrix d;
  int tau_at = -1;  // index into terms
  RatMatrix tau;
};

std::vector<BlockKind> allowed(InstanceKind k) {
  using B = BlockKind;
  switch (k) {
    case InstanceKind::perfect: return {B::z, B::z_n_z};
    case InstanceKind::rationally_acyclic: return {B::z_n_z};
    case InstanceKind::finitely_generated: return {B::z, B::z_n_z, B::tors, B::z_tors};
    case InstanceKind::torsion_free: return {B::z, B::z_n_z, B::z_q, B::q_q};
    case InstanceKind::nearly_perfect:
      return {B::z, B::z_n_z, B::tors, B::z_q, B::qz, B::q_q, B::z_qz, B::z_tors, B::qz_qz};
    case InstanceKind::single_degree: return {B::z, B::tors, B::qz};
  }
  return {};
}

bool two_term(BlockKind k) {
  return k == BlockKind::z_n_z || k == BlockKind::z_q || k == BlockKind::q_q || k == BlockKind::z_qz ||
         k == BlockKind::z_tors || k == BlockKind::qz_qz;
}

long pick(std::mt19937_64& rng, long a, long b) { return std::uniform_int_distribution<long>(a, b)(rng); }

Block make_block(std::mt19937_64& rng, BlockKind k, int d, long max_torsion) {
  const MixedModule z = MixedModule::free(1), q = MixedModule::rational(1), qz = MixedModule::rational_mod_one(1);
  const long small = std::min<long>(max_torsion, 6);
  Block b;
  b.lo = d;
  switch (k) {
    case BlockKind::z: b.terms = {z}; break;
    case BlockKind::z_n_z:
      b.terms = {z, z};
      b.d = RatMatrix{{Rat(pick(rng, 1, max_torsion))}};
      break;
    case BlockKind::tors: b.terms = {MixedModule::finite({Int(pick(rng, 2, std::max(2L, max_torsion)))})}; break;
    case BlockKind::z_q:
      b.terms = {z, q};
      b.d = RatMatrix{{1}};
      b.tau_at = 1;
      b.tau = RatMatrix{{1}};
      break;
    case BlockKind::qz:
      b.terms = {qz};
      b.tau_at = 0;
      b.tau = RatMatrix{{1}};
      break;
    case BlockKind::q_q: {
      Rat c(pick(rng, 1, 4) * (pick(rng, 0, 1) ? 1 : -1), pick(rng, 1, 3));
      c.canonicalize();
      b.terms = {q, q};
      b.d = RatMatrix{{c}};
      break;
    }
    case BlockKind::z_qz: {
      const long n = pick(rng, 2, std::max(2L, small));
      b.terms = {z, qz};
      b.d = RatMatrix{{Rat(1, n)}};
      b.tau_at = 1;
      b.tau = RatMatrix{{Rat(1, n)}};
      break;
    }
    case BlockKind::z_tors:
      b.terms = {z, MixedModule::finite({Int(pick(rng, 2, std::max(2L, max_torsion)))})};
      b.d = RatMatrix{{1}};
      break;
    case BlockKind::qz_qz:
      b.terms = {qz, qz};
      b.d = RatMatrix{{1}};
      break;
  }
  return b;
}

/// A random automorphism of a normal form module, block lower triangular.
RatMatrix random_automorphism(std::mt19937_64& rng, const MixedModule& m) {
  const std::size_t a = m.free_rank(), t = m.torsion().size(), b = m.q_rank(), c = m.qz_rank();
  RatMatrix x = RatMatrix::identity(m.dim());
  x.set_block(0, 0, to_rat(random_unimodular(rng, a)));
  if (b > 0) x.set_block(m.q_offset(), m.q_offset(), random_invertible_rational(rng, b));
  x.set_block(m.qz_offset(), m.qz_offset(), to_rat(random_unimodular(rng, c)));
  for (std::size_t j = 0; j < a; ++j) {
    for (std::size_t i = 0; i < t; ++i) x(a + i, j) = pick(rng, -2, 2);
    for (std::size_t i = 0; i < b; ++i) x(m.q_offset() + i, j) = pick(rng, -2, 2);
    for (std::size_t i = 0; i < c; ++i) {
      Rat v(pick(rng, 0, 5), 6);
      v.canonicalize();
      x(m.qz_offset() + i, j) = v;
    }
  }
  return x;
}

struct Assembly {
  std::vector<Block> blocks;
  int lo = 0;
  int hi = 0;
};

NearlyPerfectComplex assemble(std::mt19937_64& rng, const Assembly& as, bool mix) {
  std::vector<MixedModule> terms;
  std::vector<DirectSum> sums;
  // Position of each block's term among the parts of its degree.
  std::vector<std::vector<int>> slot(as.blocks.size());
  for (int i = as.lo; i <= as.hi; ++i) {
    std::vector<MixedModule> parts;
    for (std::size_t k = 0; k < as.blocks.size(); ++k) {
      const Block& b = as.blocks[k];
      const int local = i - b.lo;
      if (local < 0 || local >= static_cast<int>(b.terms.size())) continue;
      slot[k].push_back(static_cast<int>(parts.size()));
      parts.push_back(b.terms[std::size_t(local)]);
    }
    sums.push_back(direct_sum(parts));
    terms.push_back(sums.back().module);
  }
  auto at = [&](int i) -> const DirectSum& { return sums[std::size_t(i - as.lo)]; };
  std::vector<RatMatrix> d;
  for (int i = as.lo; i < as.hi; ++i) d.emplace_back(at(i + 1).module.dim(), at(i).module.dim());
  std::map<int, RatMatrix> tau;
  for (std::size_t k = 0; k < as.blocks.size(); ++k) {
    const Block& b = as.blocks[k];
    if (b.terms.size() == 2) {
      const ModuleHom& p = at(b.lo).projections[std::size_t(slot[k][0])];
      const ModuleHom& e = at(b.lo + 1).injections[std::size_t(slot[k][1])];
      d[std::size_t(b.lo - as.lo)] = d[std::size_t(b.lo - as.lo)] + e.matrix() * b.d * p.matrix();
    }
    if (b.tau_at >= 0) {
      const int i = b.lo + b.tau_at;
      const RatMatrix col = at(i).injections[std::size_t(slot[k][std::size_t(b.tau_at)])].matrix() * b.tau;
      auto it = tau.find(i);
      if (it == tau.end())
        tau.emplace(i, col);
      else {
        RatMatrix both(col.rows(), it->second.cols() + 1);
        both.set_block(0, 0, it->second);
        both.set_block(0, it->second.cols(), col);
        it->second = both;
      }
    }
  }
  if (mix) {
    std::vector<RatMatrix> x, xinv;
    for (const auto& t : terms) {
      x.push_back(random_automorphism(rng, t));
      xinv.push_back(inverse(x.back()));
    }
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = x[k + 1] * d[k] * xinv[k];
    for (auto& [i, t] : tau) t = x[std::size_t(i - as.lo)] * t;
  }
  std::vector<ModuleHom> diffs;
  for (std::size_t k = 0; k < d.size(); ++k) diffs.emplace_back(terms[k], terms[k + 1], d[k]);
  NearlyPerfectComplex n;
  n.complex = BoundedComplex(as.lo, terms, diffs);
  for (auto& [i, t] : tau) {
    n.ranks[i] = t.cols();
    n.tau[i] = std::move(t);
  }
  return n;
}

long euler_estimate(const NearlyPerfectComplex& n, InstanceKind kind) {
  if (kind == InstanceKind::nearly_perfect || kind == InstanceKind::single_degree || kind == InstanceKind::torsion_free)
    return chi(n);
  long e = 0;
  for (int i = n.complex.lo(); i <= n.complex.hi(); ++i)
    e += (i % 2 == 0 ? 1 : -1) * static_cast<long>(n.complex.term(i).free_rank());
  return e;
}

void check_options(const InstanceOptions& o) {
  require(o.length >= 1 && o.length <= GeneratorBounds::max_length, "length must be in [1, 6]");
  require(o.max_rank >= 1 && o.max_rank <= GeneratorBounds::max_rank, "ranks must be in [1, 8]");
  require(o.max_torsion >= 1 && o.max_torsion <= GeneratorBounds::max_torsion, "torsion orders must be in [1, 1000]");
  require(o.max_lattice_rank <= GeneratorBounds::max_lattice_rank, "lattice ranks must be at most 3");
  require(o.kind != InstanceKind::single_degree || o.length == 1, "single-degree instances have length 1");
}

}  // namespace

IntMatrix random_unimodular(std::mt19937_64& rng, std::size_t n) {
  IntMatrix u(n, n);
  for (std::size_t i = 0; i < n; ++i) u(i, i) = 1;
  if (n < 2) {
    if (n == 1 && pick(rng, 0, 1)) u(0, 0) = -1;
    return u;
  }
  for (std::size_t s = 0; s < 2 * n + 2; ++s) {
    const std::size_t i = std::size_t(pick(rng, 0, long(n) - 1));
    std::size_t j = std::size_t(pick(rng, 0, long(n) - 2));
    if (j >= i) ++j;
    switch (pick(rng, 0, 3)) {
      case 0: u.swap_rows(i, j); break;
      case 1: u.scale_row(i, -1); break;
      default: u.add_row(i, j, Int(pick(rng, -2, 2)));
    }
  }
  return u;
}

RatMatrix random_invertible_rational(std::mt19937_64& rng, std::size_t n) {
  for (;;) {
    RatMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        Rat v(pick(rng, -4, 4), pick(rng, 1, 3));
        v.canonicalize();
        m(i, j) = v;
      }
    if (n == 0 || determinant(m) != 0) return m;
  }
}

NearlyPerfectComplex random_npc(std::mt19937_64& rng, const InstanceOptions& opts) {
  check_options(opts);
  const auto kinds = allowed(opts.kind);
  const int lo = opts.lo, hi = opts.lo + opts.length - 1;
  for (int attempt = 0; attempt < 200; ++attempt) {
    Assembly as{{}, lo, hi};
    std::map<int, std::size_t> dims, lattice;
    auto fits = [&](const Block& b) {
      for (std::size_t k = 0; k < b.terms.size(); ++k)
        if (dims[b.lo + int(k)] + b.terms[k].dim() > opts.max_rank) return false;
      return b.tau_at < 0 || lattice[b.lo + b.tau_at] + 1 <= opts.max_lattice_rank;
    };
    auto add = [&](const Block& b) {
      for (std::size_t k = 0; k < b.terms.size(); ++k) dims[b.lo + int(k)] += b.terms[k].dim();
      if (b.tau_at >= 0) ++lattice[b.lo + b.tau_at];
      as.blocks.push_back(b);
    };
    const long count = pick(rng, 1, long(opts.max_blocks));
    for (long c = 0; c < count; ++c) {
      const BlockKind k = kinds[std::size_t(pick(rng, 0, long(kinds.size()) - 1))];
      if (two_term(k) && hi == lo) continue;
      const int d = int(pick(rng, lo, two_term(k) ? hi - 1 : hi));
      const Block b = make_block(rng, k, d, opts.max_torsion);
      if (fits(b)) add(b);
    }
    NearlyPerfectComplex n = assemble(rng, as, false);
    if (opts.balanced) {
      const long e = euler_estimate(n, opts.kind);
      bool ok = true;
      for (long c = 0; c < std::abs(e) && ok; ++c) {
        // e > 0 needs an odd ℤ, e < 0 an even one.
        int d = lo;
        if ((e > 0) != ((d % 2 + 2) % 2 == 1)) ++d;
        Block b = make_block(rng, BlockKind::z, d, opts.max_torsion);
        ok = d <= hi && fits(b);
        if (ok) add(b);
      }
      if (!ok) continue;
    }
    n = assemble(rng, as, true);
    ensure(validate(n).valid(), "generated instance is invalid: " + validate(n).to_string());
    ensure(!opts.balanced || euler_estimate(n, opts.kind) == 0, "generated instance is not balanced");
    return n;
  }
  throw PreconditionError("no instance fits the requested options");
}

BoundedComplex random_complex(std::mt19937_64& rng, const InstanceOptions& opts) {
  return random_npc(rng, opts).complex;
}

ChainMap random_quasi_iso(std::mt19937_64& rng, const BoundedComplex& q) {
  require(q.is_perfect(), "random_quasi_iso expects a perfect complex");
  const int qlo = q.empty() ? 0 : q.lo(), qhi = q.empty() ? 0 : q.hi();
  std::map<int, std::size_t> extra;
  std::vector<int> pairs;
  for (long c = pick(rng, 1, 2); c > 0; --c) {
    const int d = int(pick(rng, qlo - 1, qhi));
    pairs.push_back(d);
    ++extra[d];
    ++extra[d + 1];
  }
  const int lo = std::min(qlo, *std::min_element(pairs.begin(), pairs.end()));
  const int hi = std::max(qhi, *std::max_element(pairs.begin(), pairs.end()) + 1);
  auto qr = [&](int i) { return q.term(i).free_rank(); };
  auto pr = [&](int i) { return qr(i) + (extra.count(i) ? extra.at(i) : 0); };
  // Extra coordinates: per degree, targets of pairs first, then sources.
  std::map<int, std::size_t> next_target, next_source;
  for (int d : pairs) ++next_target[d + 1];
  std::vector<RatMatrix> d(std::size_t(hi - lo));
  for (int i = lo; i < hi; ++i) {
    RatMatrix m(pr(i + 1), pr(i));
    m.set_block(0, 0, q.differential(i).matrix());
    d[std::size_t(i - lo)] = m;
  }
  std::map<int, std::size_t> used_target, used_source;
  for (int p : pairs) {
    const std::size_t src = qr(p) + next_target[p] + used_source[p]++;
    const std::size_t tgt = qr(p + 1) + used_target[p + 1]++;
    d[std::size_t(p - lo)](tgt, src) = pick(rng, 0, 1) ? 1 : -1;
  }
  std::vector<RatMatrix> u, uinv;
  for (int i = lo; i <= hi; ++i) {
    u.push_back(to_rat(random_unimodular(rng, pr(i))));
    uinv.push_back(inverse(u.back()));
  }
  auto U = [&](int i) -> const RatMatrix& { return u[std::size_t(i - lo)]; };
  auto Uinv = [&](int i) -> const RatMatrix& { return uinv[std::size_t(i - lo)]; };
  std::vector<MixedModule> terms;
  for (int i = lo; i <= hi; ++i) terms.push_back(MixedModule::free(pr(i)));
  std::vector<ModuleHom> diffs;
  std::vector<RatMatrix> dp;
  for (int i = lo; i < hi; ++i) {
    dp.push_back(U(i + 1) * d[std::size_t(i - lo)] * Uinv(i));
    diffs.emplace_back(terms[std::size_t(i - lo)], terms[std::size_t(i + 1 - lo)], dp.back());
  }
  const BoundedComplex p(lo, terms, diffs);
  auto DP = [&](int i) { return p.differential(i).matrix(); };
  std::map<int, RatMatrix> h;  // Q^i → P^{i−1}
  for (int i = lo; i <= hi + 1; ++i) {
    RatMatrix m(pr(i - 1), qr(i));
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = pick(rng, -1, 1);
    h[i] = m;
  }
  std::map<int, ModuleHom> comps;
  for (int i = lo; i <= hi; ++i) {
    RatMatrix incl(pr(i), qr(i));
    incl.set_block(0, 0, RatMatrix::identity(qr(i)));
    RatMatrix a = U(i) * incl + DP(i - 1) * h.at(i) + h.at(i + 1) * q.differential(i).matrix();
    comps.emplace(i, ModuleHom(q.term(i), p.term(i), a));
  }
  return ChainMap(q, p, comps);
}

Filtration random_filtration(std::mt19937_64& rng, const BoundedComplex& m, int max_steps) {
  Filtration f;
  if (m.empty()) return f;
  for (int i = m.lo(); i <= m.hi(); ++i) {
    const std::size_t dim = cohomology_at(m, i).module.dim();
    if (dim == 0) continue;
    const long steps = pick(rng, 0, max_steps);
    RatMatrix g(dim, std::size_t(pick(rng, 1, long(dim))));
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c) g(r, c) = pick(rng, -2, 2);
    for (long s = 0; s < steps; ++s) {
      f.steps[i].push_back(Subgroup::lattice_of(g));
      RatMatrix r(g.cols(), std::size_t(pick(rng, 1, long(g.cols()))));
      for (std::size_t a = 0; a < r.rows(); ++a)
        for (std::size_t b = 0; b < r.cols(); ++b) r(a, b) = pick(rng, -2, 2);
      g = g * r;
    }
  }
  return f;
}

GradedTrivialization random_trivialization(std::mt19937_64& rng, const BoundedComplex& m, const Filtration& f) {
  std::size_t odd = 0, even = 0;
  for (const auto& p : graded_pieces(m, f)) ((p.degree % 2 + 2) % 2 == 1 ? odd : even) += p.module.free_rank();
  require(odd == even, "graded ranks differ: " + std::to_string(odd) + " odd, " + std::to_string(even) + " even");
  return {random_invertible_rational(rng, odd)};
}

CyclicModule random_cohomologically_trivial(std::mt19937_64& rng, std::size_t order, std::size_t max_copies) {
  require(order >= 1 && max_copies >= 1, "order and copies must be positive");
  const std::size_t k = std::size_t(pick(rng, 1, long(max_copies)));
  const std::size_t n = order * k;
  RatMatrix s(n, n);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t j = 0; j < order; ++j) s(c * order + (j + 1) % order, c * order + j) = 1;
  const RatMatrix u = to_rat(random_unimodular(rng, n));
  const MixedModule m = MixedModule::free(n);
  return {m, ModuleHom(m, m, u * s * inverse(u)), order};
}

}  // namespace nearperf
