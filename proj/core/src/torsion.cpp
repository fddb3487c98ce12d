#include "nearperf/torsion.hpp"

#include <algorithm>
#include <random>
#include <utility>

#include "nearperf/ladic.hpp"
#include "nearperf/linalg.hpp"

namespace nearperf {

namespace {

std::string deg(int i) { return std::to_string(i); }
bool is_odd(int i) { return (i % 2 + 2) % 2 == 1; }

std::pair<int, int> range_of(const BoundedComplex& m) {
  return m.empty() ? std::pair{0, -1} : std::pair{m.lo(), m.hi()};
}

/// Free block d^i ⊗ ℚ : ℚ^{m_i} → ℚ^{m_{i+1}}.
RatMatrix rational_differential(const BoundedComplex& m, int i) {
  return m.differential(i).matrix().block(0, 0, m.term(i + 1).free_rank(), m.term(i).free_rank());
}

RatMatrix hstack(const std::vector<RatMatrix>& parts, std::size_t rows) {
  std::size_t cols = 0;
  for (const auto& p : parts) cols += p.cols();
  RatMatrix out(rows, cols);
  std::size_t c = 0;
  for (const auto& p : parts) {
    require(p.rows() == rows, "block has " + std::to_string(p.rows()) + " rows, expected " + std::to_string(rows));
    out.set_block(0, c, p);
    c += p.cols();
  }
  return out;
}

RatMatrix block_diagonal(const std::vector<RatMatrix>& parts) {
  std::size_t rows = 0, cols = 0;
  for (const auto& p : parts) rows += p.rows(), cols += p.cols();
  RatMatrix out(rows, cols);
  std::size_t r = 0, c = 0;
  for (const auto& p : parts) {
    out.set_block(r, c, p);
    r += p.rows();
    c += p.cols();
  }
  return out;
}

/// Extends the independent columns of `a` by columns of `pool` to a basis of span(a) + span(pool);
/// returns only the added columns.
RatMatrix complement_from(const RatMatrix& a, const RatMatrix& pool) {
  RatMatrix cur = a;
  std::vector<RatMatrix> added;
  std::size_t r = rank(cur);
  for (std::size_t j = 0; j < pool.cols(); ++j) {
    RatMatrix next = hstack({cur, pool.block(0, j, pool.rows(), 1)}, pool.rows());
    const std::size_t nr = rank(next);
    if (nr > r) {
      cur = std::move(next);
      r = nr;
      added.push_back(pool.block(0, j, pool.rows(), 1));
    }
  }
  return hstack(added, pool.rows());
}

/// Cohomology with its pieces, in the rational coordinates used by the splittings.
struct DegreeData {
  int degree = 0;
  std::size_t m = 0;  // free rank of M^i
  std::size_t h = 0;  // free rank of H^i
  CohomologyGroup group;
  std::vector<GradedPiece> pieces;
  RatMatrix projection;  // h × m: p_H on rational cocycles
  RatMatrix gr_basis;    // h × h: canonical lifts of all pieces side by side
};

std::vector<GradedPiece> pieces_at(const CohomologyGroup& g, int i, const Filtration& f) {
  const Subgroup amb = g.module.ambient();
  const Subgroup rel = g.module.relations();
  std::vector<Subgroup> chain{amb};
  if (auto it = f.steps.find(i); it != f.steps.end())
    for (const auto& s : it->second) {
      require(s.dim() == g.module.dim(), "filtration step in degree " + deg(i) + " has dimension " +
                                             std::to_string(s.dim()) + ", expected " +
                                             std::to_string(g.module.dim()));
      chain.push_back(sum(s, rel));
    }
  chain.push_back(rel);
  std::vector<GradedPiece> out;
  for (std::size_t n = 0; n + 1 < chain.size(); ++n) {
    require(chain[n].contains(chain[n + 1]),
            "filtration in degree " + deg(i) + " is not decreasing at step " + std::to_string(n + 1));
    Presented p = present(chain[n], chain[n + 1]);
    const std::size_t g_rank = p.module.free_rank();
    out.push_back({i, static_cast<int>(n), p.module, p.from.block(0, 0, p.from.rows(), g_rank)});
  }
  return out;
}

std::vector<DegreeData> degree_data(const BoundedComplex& m, const Filtration& f) {
  std::vector<DegreeData> out;
  const auto [lo, hi] = range_of(m);
  for (const auto& [i, steps] : f.steps)
    require(steps.empty() || (i >= lo && i <= hi), "filtration given in degree " + deg(i) + " outside the complex");
  for (int i = lo; i <= hi; ++i) {
    DegreeData d;
    d.degree = i;
    d.m = m.term(i).free_rank();
    d.group = cohomology_at(m, i);
    d.h = d.group.module.free_rank();
    d.pieces = pieces_at(d.group, i, f);
    d.projection = d.group.to_h.block(0, 0, d.h, d.m);
    std::vector<RatMatrix> lifts;
    for (const auto& p : d.pieces) lifts.push_back(p.lift.block(0, 0, d.h, p.lift.cols()));
    d.gr_basis = hstack(lifts, d.h);
    out.push_back(std::move(d));
  }
  return out;
}

/// Coordinates of a vector of H^i_ℚ in the canonical graded basis.
RatMatrix graded_coordinates(const DegreeData& d, const RatMatrix& v) {
  return solve_rational_matrix(d.gr_basis, v);
}

std::vector<std::size_t> piece_offsets(const DegreeData& d) {
  std::vector<std::size_t> off;
  std::size_t c = 0;
  for (const auto& p : d.pieces) {
    off.push_back(c);
    c += p.module.free_rank();
  }
  off.push_back(c);
  return off;
}

/// Total free rank of the graded pieces of one parity.
std::size_t graded_total(const std::vector<DegreeData>& dd, bool odd) {
  std::size_t t = 0;
  for (const auto& d : dd)
    if (is_odd(d.degree) == odd) t += d.h;
  return t;
}

RatMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  std::uniform_int_distribution<int> ent(-3, 3);
  RatMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = ent(rng);
  return m;
}

RatMatrix random_invertible(std::mt19937_64& rng, std::size_t n) {
  for (;;) {
    RatMatrix m = random_matrix(rng, n, n);
    if (n == 0 || determinant(m) != 0) return m;
  }
}

SplittingChoice splitting_from(const BoundedComplex& m, const std::vector<DegreeData>& dd) {
  SplittingChoice s;
  for (const auto& d : dd) {
    DegreeSplitting& x = s.degrees[d.degree];
    const RatMatrix dq = rational_differential(m, d.degree);
    x.b_basis = column_space(dq);
    x.b_section = solve_rational_matrix(dq, x.b_basis);
    x.h_section = d.group.from_h.block(0, 0, d.m, d.h);
    for (const auto& p : d.pieces) x.gr_sections.push_back(p.lift.block(0, 0, d.h, p.lift.cols()));
  }
  return s;
}

/// The matrix B^i ⊗ ℚ → M^i of the previous degree's basis (m_i × 0 if absent).
RatMatrix incoming_basis(const SplittingChoice& s, int i, std::size_t m_i) {
  auto it = s.degrees.find(i - 1);
  return it == s.degrees.end() ? RatMatrix(m_i, 0) : it->second.b_basis;
}

}  // namespace

std::vector<GradedPiece> graded_pieces(const BoundedComplex& m, const Filtration& f) {
  std::vector<GradedPiece> out;
  for (auto& d : degree_data(m, f))
    for (auto& p : d.pieces) out.push_back(std::move(p));
  return out;
}

SplittingChoice canonical_splitting(const BoundedComplex& m, const Filtration& f) {
  return splitting_from(m, degree_data(m, f));
}

SplittingChoice random_splitting(const BoundedComplex& m, const Filtration& f, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto dd = degree_data(m, f);
  SplittingChoice s = splitting_from(m, dd);
  for (const auto& d : dd) {
    DegreeSplitting& x = s.degrees.at(d.degree);
    const RatMatrix r = random_invertible(rng, x.b_basis.cols());
    const RatMatrix z = nullspace(rational_differential(m, d.degree));
    x.b_basis = x.b_basis * r;
    x.b_section = x.b_section * r + z * random_matrix(rng, z.cols(), r.cols());
  }
  for (const auto& d : dd) {
    DegreeSplitting& x = s.degrees.at(d.degree);
    const RatMatrix b = incoming_basis(s, d.degree, d.m);
    x.h_section = x.h_section + b * random_matrix(rng, b.cols(), d.h);
    // Lifts of Gr^n may move by anything in F^{n+1}, spanned by the later canonical lifts.
    const auto off = piece_offsets(d);
    for (std::size_t n = 0; n < d.pieces.size(); ++n) {
      const std::size_t later = d.h - off[n + 1];
      const RatMatrix deeper = d.gr_basis.block(0, off[n + 1], d.h, later);
      x.gr_sections[n] = x.gr_sections[n] + deeper * random_matrix(rng, later, x.gr_sections[n].cols());
    }
  }
  return s;
}

namespace {

void check_splitting_with(const BoundedComplex& m, const std::vector<DegreeData>& dd, const SplittingChoice& s) {
  for (const auto& d : dd) {
    auto it = s.degrees.find(d.degree);
    require(it != s.degrees.end(), "splitting misses degree " + deg(d.degree));
    const DegreeSplitting& x = it->second;
    const std::string at = " in degree " + deg(d.degree);
    const RatMatrix dq = rational_differential(m, d.degree);
    require(x.b_basis.rows() == dq.rows() && x.b_basis.cols() == rank(dq) && rank(x.b_basis) == x.b_basis.cols(),
            "boundary basis is not a basis" + at);
    require(rank(hstack({dq, x.b_basis}, dq.rows())) == x.b_basis.cols(), "boundary basis leaves B" + at);
    require(x.b_section.rows() == d.m && x.b_section.cols() == x.b_basis.cols() && dq * x.b_section == x.b_basis,
            "boundary section is not a section" + at);
    require(x.h_section.rows() == d.m && x.h_section.cols() == d.h, "cohomology section has the wrong shape" + at);
    require((dq * x.h_section).is_zero(), "cohomology section is not made of cocycles" + at);
    require(d.projection * x.h_section == RatMatrix::identity(d.h), "cohomology section is not a section" + at);
    require(x.gr_sections.size() == d.pieces.size(), "wrong number of filtration sections" + at);
    const auto off = piece_offsets(d);
    for (std::size_t n = 0; n < d.pieces.size(); ++n) {
      const RatMatrix& g = x.gr_sections[n];
      const std::size_t k = off[n + 1] - off[n];
      require(g.rows() == d.h && g.cols() == k, "filtration section " + std::to_string(n) + " has the wrong shape" + at);
      const RatMatrix c = graded_coordinates(d, g);
      RatMatrix expect(d.h, k);
      expect.set_block(off[n], 0, RatMatrix::identity(k));
      require(c.block(0, 0, off[n + 1], k) == expect.block(0, 0, off[n + 1], k),
              "filtration section " + std::to_string(n) + " is not a section into F^" + std::to_string(n) + at);
    }
  }
}

enum class Slot { graded, boundary };

struct Column {
  Slot slot;
  int index;  // boundary degree j for B^j, or position in the graded list
  std::size_t k;
};

/// Φ for one parity and the labels of its columns.
std::pair<RatMatrix, std::vector<Column>> frame(const std::vector<DegreeData>& dd, const SplittingChoice& s,
                                                bool odd) {
  std::vector<RatMatrix> blocks;
  std::vector<Column> cols;
  int graded = 0;
  for (const auto& d : dd) {
    if (is_odd(d.degree) != odd) continue;
    const DegreeSplitting& x = s.degrees.at(d.degree);
    const RatMatrix gr = hstack(x.gr_sections, d.h);
    const RatMatrix in = incoming_basis(s, d.degree, d.m);
    blocks.push_back(hstack({x.h_section * gr, in, x.b_section}, d.m));
    for (std::size_t k = 0; k < d.h; ++k) cols.push_back({Slot::graded, graded++, k});
    for (std::size_t k = 0; k < in.cols(); ++k) cols.push_back({Slot::boundary, d.degree, k});
    for (std::size_t k = 0; k < x.b_basis.cols(); ++k) cols.push_back({Slot::boundary, d.degree + 1, k});
    ensure(blocks.back().rows() == blocks.back().cols(), "splitting frame is not square" + std::string(" in degree ") +
                                                             deg(d.degree));
  }
  return {block_diagonal(blocks), cols};
}

RatMatrix lambda_with(const BoundedComplex& m, const std::vector<DegreeData>& dd, const GradedTrivialization& lambda,
                      const SplittingChoice& s) {
  const std::size_t odd = graded_total(dd, true), even = graded_total(dd, false);
  const RatMatrix& l = lambda.matrix;
  require(l.rows() == even && l.cols() == odd, "trivialization must be " + std::to_string(even) + "x" +
                                                   std::to_string(odd) + ", got " + std::to_string(l.rows()) + "x" +
                                                   std::to_string(l.cols()));
  require(odd == even && (odd == 0 || determinant(l) != 0), "trivialization is not invertible");
  check_splitting_with(m, dd, s);
  const auto [phi_minus, cols_minus] = frame(dd, s, true);
  const auto [phi_plus, cols_plus] = frame(dd, s, false);
  RatMatrix iota(phi_plus.cols(), phi_minus.cols());
  std::map<std::pair<int, std::size_t>, std::size_t> boundary_row;
  std::vector<std::size_t> graded_row;
  for (std::size_t r = 0; r < cols_plus.size(); ++r) {
    if (cols_plus[r].slot == Slot::graded)
      graded_row.push_back(r);
    else
      boundary_row[{cols_plus[r].index, cols_plus[r].k}] = r;
  }
  std::vector<std::size_t> graded_col;
  for (std::size_t c = 0; c < cols_minus.size(); ++c) {
    if (cols_minus[c].slot == Slot::graded) {
      graded_col.push_back(c);
      continue;
    }
    auto it = boundary_row.find({cols_minus[c].index, cols_minus[c].k});
    ensure(it != boundary_row.end(), "boundary B^" + deg(cols_minus[c].index) + " appears on one side only");
    iota(it->second, c) = 1;
  }
  for (std::size_t r = 0; r < graded_row.size(); ++r)
    for (std::size_t c = 0; c < graded_col.size(); ++c) iota(graded_row[r], graded_col[c]) = l(r, c);
  require(phi_minus.rows() == phi_plus.rows(), "odd and even terms have different ranks");
  return phi_plus * iota * inverse(phi_minus);
}

MixedModule parity_sum(const std::vector<std::pair<std::size_t, IntVector>>& parts) {
  std::size_t free = 0;
  IntVector tors;
  for (const auto& [a, t] : parts) {
    free += a;
    tors.insert(tors.end(), t.begin(), t.end());
  }
  return MixedModule(free, MixedModule::finite(tors).torsion(), 0, 0);
}

}  // namespace

void check_splitting(const BoundedComplex& m, const Filtration& f, const SplittingChoice& s) {
  check_splitting_with(m, degree_data(m, f), s);
}

RatMatrix lambda_on_terms(const BoundedComplex& m, const Filtration& f, const GradedTrivialization& lambda,
                          const SplittingChoice& s) {
  for (int i = range_of(m).first; i <= range_of(m).second; ++i)
    require(m.term(i).is_finitely_generated(), "degree " + deg(i) + " is not finitely generated");
  return lambda_with(m, degree_data(m, f), lambda, s);
}

PosRational chi_rel_perfect(const BoundedComplex& p, const Filtration& f, const GradedTrivialization& lambda) {
  return chi_rel_perfect(p, f, lambda, canonical_splitting(p, f));
}

PosRational chi_rel_perfect(const BoundedComplex& p, const Filtration& f, const GradedTrivialization& lambda,
                            const SplittingChoice& s) {
  require(p.is_perfect(), "complex is not perfect");
  const RatMatrix l = lambda_on_terms(p, f, lambda, s);
  return k0_class({MixedModule::free(l.cols()), l, MixedModule::free(l.rows())});
}

PosRational module_class(const BoundedComplex& m, const Filtration& f, const GradedTrivialization& lambda,
                         const SplittingChoice& s) {
  const RatMatrix l = lambda_on_terms(m, f, lambda, s);
  std::vector<std::pair<std::size_t, IntVector>> minus, plus;
  for (int i = range_of(m).first; i <= range_of(m).second; ++i)
    (is_odd(i) ? minus : plus).emplace_back(m.term(i).free_rank(), m.term(i).torsion());
  return g0_class({parity_sum(minus), l, parity_sum(plus)});
}

PosRational graded_class(const BoundedComplex& m, const Filtration& f, const GradedTrivialization& lambda) {
  std::vector<std::pair<std::size_t, IntVector>> minus, plus;
  for (const auto& p : graded_pieces(m, f)) {
    require(p.module.is_finitely_generated(), "graded piece in degree " + deg(p.degree) + " is not finitely generated");
    (is_odd(p.degree) ? minus : plus).emplace_back(p.module.free_rank(), p.module.torsion());
  }
  return g0_class({parity_sum(minus), lambda.matrix, parity_sum(plus)});
}

PosRational cohomology_order_ratio(const BoundedComplex& m) {
  Rat q = 1;
  for (int i = range_of(m).first; i <= range_of(m).second; ++i) {
    const MixedModule h = cohomology_at(m, i).module;
    require(h.is_finite(), "H^" + deg(i) + " is not finite: " + h.to_string());
    q *= is_odd(i) ? Rat(1, h.order()) : Rat(h.order());
  }
  q.canonicalize();
  return q;
}

namespace {

/// Gr^n(H^i f) for every source piece, placed by parity.
GradedMap graded_map_with(const ChainMap& f, const std::vector<DegreeData>& src, const std::vector<DegreeData>& tgt) {
  GradedMap out{RatMatrix(graded_total(tgt, true), graded_total(src, true)),
                RatMatrix(graded_total(tgt, false), graded_total(src, false))};
  std::map<int, std::size_t> tgt_offset;
  {
    std::size_t o = 0, e = 0;
    for (const auto& d : tgt) tgt_offset[d.degree] = is_odd(d.degree) ? std::exchange(o, o + d.h) : std::exchange(e, e + d.h);
  }
  std::size_t o = 0, e = 0;
  for (const auto& d : src) {
    std::size_t& col = is_odd(d.degree) ? o : e;
    RatMatrix& dst = is_odd(d.degree) ? out.odd : out.even;
    auto it = std::find_if(tgt.begin(), tgt.end(), [&](const DegreeData& t) { return t.degree == d.degree; });
    if (it == tgt.end() || it->h == 0 || d.h == 0) {
      col += d.h;
      continue;
    }
    const DegreeData& t = *it;
    const RatMatrix h = induced_map(f, d.group, t.group).matrix();
    const auto src_off = piece_offsets(d);
    const auto tgt_off = piece_offsets(t);
    ensure(src_off.size() == tgt_off.size(), "filtrations in degree " + deg(d.degree) + " have different lengths");
    for (std::size_t n = 0; n < d.pieces.size(); ++n) {
      const std::size_t k = src_off[n + 1] - src_off[n];
      const RatMatrix image = (h * d.pieces[n].lift).block(0, 0, t.h, k);
      const RatMatrix c = graded_coordinates(t, image);
      ensure(c.block(0, 0, tgt_off[n], k).is_zero(),
             "map does not respect the filtrations in degree " + deg(d.degree) + " at step " + std::to_string(n));
      dst.set_block(tgt_offset.at(d.degree) + tgt_off[n], col + src_off[n],
                    c.block(tgt_off[n], 0, tgt_off[n + 1] - tgt_off[n], k));
    }
    col += d.h;
  }
  return out;
}

Filtration pull_back_with(const ChainMap& f, const Filtration& target) {
  Filtration out;
  const auto [lo, hi] = range_of(f.source());
  for (const auto& [i, steps] : target.steps) {
    if (steps.empty()) continue;
    require(i >= lo && i <= hi, "filtration in degree " + deg(i) + " has no counterpart in the source");
    const CohomologyGroup s = cohomology_at(f.source(), i);
    const CohomologyGroup t = cohomology_at(f.target(), i);
    const RatMatrix h = induced_map(f, s, t).matrix();
    for (const auto& step : steps)
      out.steps[i].push_back(preimage_within(s.module.ambient(), h, sum(step, t.module.relations())));
  }
  return out;
}

}  // namespace

GradedMap graded_map(const ChainMap& f, const Filtration& source, const Filtration& target) {
  return graded_map_with(f, degree_data(f.source(), source), degree_data(f.target(), target));
}

Filtration pull_back(const ChainMap& f, const Filtration& target) {
  require(is_quasi_iso(f), "filtrations are pulled back along quasi-isomorphisms only");
  return pull_back_with(f, target);
}

GradedTrivialization pull_back(const ChainMap& f, const Filtration& source, const Filtration& target,
                               const GradedTrivialization& lambda) {
  const GradedMap g = graded_map(f, source, target);
  require(g.odd.rows() == g.odd.cols() && g.even.rows() == g.even.cols() &&
              (g.odd.rows() == 0 || determinant(g.odd) != 0) && (g.even.rows() == 0 || determinant(g.even) != 0),
          "map is not an isomorphism on graded cohomology");
  return {inverse(g.even) * lambda.matrix * g.odd};
}

Surjectification surjectify(const ChainMap& alpha) {
  const BoundedComplex& q = alpha.source();
  const BoundedComplex& p = alpha.target();
  require(q.is_perfect() && p.is_perfect(), "surjectify needs perfect complexes");
  require(is_quasi_iso(alpha), "α is not a quasi-isomorphism");
  Surjectification out;
  if (q.empty() && p.empty()) {
    out.t = BoundedComplex();
    out.beta = ChainMap(out.t, q, {});
    out.gamma = ChainMap(out.t, p, {});
    out.gamma_surjective = out.cocycles_surjective = out.beta_quasi_iso = out.gamma_quasi_iso =
        out.same_on_cohomology = true;
    return out;
  }
  auto pr = [&](int i) { return p.term(i).free_rank(); };
  auto qr = [&](int i) { return q.term(i).free_rank(); };
  int lo = p.empty() ? q.lo() : q.empty() ? p.lo() : std::min(p.lo(), q.lo());
  int hi = p.empty() ? q.hi() : q.empty() ? p.hi() + 1 : std::max(p.hi() + 1, q.hi());
  std::vector<MixedModule> terms;
  for (int i = lo; i <= hi; ++i) terms.push_back(MixedModule::free(pr(i - 1) + pr(i) + qr(i)));
  std::vector<ModuleHom> diffs;
  for (int i = lo; i < hi; ++i) {
    RatMatrix d(terms[std::size_t(i + 1 - lo)].dim(), terms[std::size_t(i - lo)].dim());
    d.set_block(0, pr(i - 1), RatMatrix::identity(pr(i)));
    d.set_block(pr(i) + pr(i + 1), pr(i - 1) + pr(i), q.differential(i).matrix());
    diffs.emplace_back(terms[std::size_t(i - lo)], terms[std::size_t(i + 1 - lo)], d);
  }
  out.t = BoundedComplex(lo, terms, diffs);
  std::map<int, ModuleHom> beta, gamma;
  for (int i = lo; i <= hi; ++i) {
    const MixedModule& ti = out.t.term(i);
    RatMatrix b(qr(i), ti.dim());
    b.set_block(0, pr(i - 1) + pr(i), RatMatrix::identity(qr(i)));
    beta.emplace(i, ModuleHom(ti, q.term(i), b));
    RatMatrix g(pr(i), ti.dim());
    g.set_block(0, 0, p.differential(i - 1).matrix());
    g.set_block(0, pr(i - 1), RatMatrix::identity(pr(i)));
    g.set_block(0, pr(i - 1) + pr(i), alpha.component(i).matrix());
    gamma.emplace(i, ModuleHom(ti, p.term(i), g));
  }
  out.beta = ChainMap(out.t, q, beta);
  out.gamma = ChainMap(out.t, p, gamma);

  out.gamma_surjective = out.cocycles_surjective = out.same_on_cohomology = true;
  const ChainMap ab = alpha * out.beta;
  for (int i = lo; i <= hi; ++i) {
    const ModuleHom g = out.gamma.component(i);
    out.gamma_surjective = out.gamma_surjective && is_surjective(g);
    const CohomologyGroup ht = cohomology_at(out.t, i);
    const CohomologyGroup hp = cohomology_at(p, i);
    out.cocycles_surjective = out.cocycles_surjective && image(g.matrix(), ht.cocycles) == hp.cocycles;
    out.same_on_cohomology = out.same_on_cohomology && induced_map(ab, ht, hp) == induced_map(out.gamma, ht, hp);
  }
  out.beta_quasi_iso = is_quasi_iso(out.beta);
  out.gamma_quasi_iso = is_quasi_iso(out.gamma);
  return out;
}

namespace {

RatMatrix compatible_section_from(const SectionDiagram& d, const RatMatrix& initial) {
  const std::size_t v2 = d.eps.rows(), k2 = d.delta.rows();
  const RatMatrix kappa = solve_rational_matrix(d.delta, RatMatrix::identity(k2));  // δ κ = id
  // θ on j(K''): σ̃ j − i κ, which lies in ker ε; zero on a coordinate complement.
  const RatMatrix theta_on_k = initial * d.incl_k2 - d.incl_k * kappa;
  const RatMatrix comp = complement_from(d.incl_k2, RatMatrix::identity(v2));
  const RatMatrix basis = hstack({d.incl_k2, comp}, v2);
  const RatMatrix theta = hstack({theta_on_k, RatMatrix(initial.rows(), comp.cols())}, initial.rows()) * inverse(basis);
  const RatMatrix sigma = initial - theta;
  ensure(d.eps * sigma == RatMatrix::identity(v2), "corrected section is not a section of ε");
  ensure(sigma * d.incl_k2 == d.incl_k * kappa, "corrected section does not restrict to K''");
  return sigma;
}

void check_diagram(const SectionDiagram& d) {
  const std::size_t v = d.eps.cols(), v2 = d.eps.rows(), k = d.delta.cols(), k2 = d.delta.rows();
  require(d.incl_k.rows() == v && d.incl_k.cols() == k && d.incl_k2.rows() == v2 && d.incl_k2.cols() == k2,
          "diagram shapes do not fit");
  require(rank(d.incl_k) == k && rank(d.incl_k2) == k2, "diagram inclusions are not injective");
  require(rank(d.eps) == v2 && rank(d.delta) == k2, "diagram rows are not surjective");
  require(d.eps * d.incl_k == d.incl_k2 * d.delta, "diagram does not commute");
}

}  // namespace

RatMatrix compatible_section(const SectionDiagram& d) {
  check_diagram(d);
  return compatible_section_from(d, solve_rational_matrix(d.eps, RatMatrix::identity(d.eps.rows())));
}

namespace {

/// Kernel subcomplex of a degreewise surjection between perfect complexes.
struct KernelComplex {
  BoundedComplex k;
  std::map<int, RatMatrix> incl;
};

KernelComplex kernel_complex(const ChainMap& f) {
  const BoundedComplex& t = f.source();
  KernelComplex out;
  if (t.empty()) return out;
  std::vector<MixedModule> terms;
  for (int i = t.lo(); i <= t.hi(); ++i) {
    const Kernel k = kernel(f.component(i));
    ensure(k.module.is_torsion_free() && k.module.q_rank() == 0, "kernel is not free in degree " + deg(i));
    terms.push_back(k.module);
    out.incl[i] = k.inclusion.matrix();
  }
  std::vector<ModuleHom> diffs;
  for (int i = t.lo(); i < t.hi(); ++i) {
    const RatMatrix d = solve_rational_matrix(out.incl.at(i + 1), t.differential(i).matrix() * out.incl.at(i));
    diffs.emplace_back(terms[std::size_t(i - t.lo())], terms[std::size_t(i + 1 - t.lo())], d);
  }
  out.k = BoundedComplex(t.lo(), terms, diffs);
  return out;
}

RatMatrix parity_blocks(const std::map<int, RatMatrix>& blocks, bool odd) {
  std::vector<RatMatrix> parts;
  for (const auto& [i, b] : blocks)
    if (is_odd(i) == odd) parts.push_back(b);
  return block_diagonal(parts);
}

}  // namespace

TransportCheck transport_through(const ChainMap& gamma, const Filtration& target, const GradedTrivialization& lambda,
                                 std::uint64_t seed) {
  const BoundedComplex& t = gamma.source();
  const BoundedComplex& p = gamma.target();
  require(t.is_perfect() && p.is_perfect(), "transport needs perfect complexes");
  require(is_quasi_iso(gamma), "map is not a quasi-isomorphism");
  const auto [lo, hi] = range_of(t);
  {
    const auto [plo, phi] = range_of(p);
    require(plo > phi || (plo >= lo && phi <= hi), "target extends beyond the source");
  }
  for (int i = lo; i <= hi; ++i) {
    require(is_surjective(gamma.component(i)), "map is not surjective in degree " + deg(i));
    require(image(gamma.component(i).matrix(), cohomology_at(t, i).cocycles) == cohomology_at(p, i).cocycles,
            "map is not surjective on cocycles in degree " + deg(i));
  }
  std::mt19937_64 rng(seed);
  const Filtration ft = pull_back_with(gamma, target);
  const auto dt = degree_data(t, ft);
  const auto dp = degree_data(p, target);
  const GradedMap gm = graded_map_with(gamma, dt, dp);
  const GradedTrivialization lt{inverse(gm.even) * lambda.matrix * gm.odd};
  const KernelComplex kc = kernel_complex(gamma);
  const auto dk = degree_data(kc.k, Filtration{});

  SplittingChoice st, sk, sp;
  // Boundary bases and sections: B(K) first, then a complement mapping onto B(P).
  for (int i = lo; i <= hi; ++i) {
    const RatMatrix& inc = kc.incl.at(i);
    const RatMatrix inc1 = i < hi ? kc.incl.at(i + 1) : RatMatrix(0, 0);
    const RatMatrix dt_i = rational_differential(t, i);
    const RatMatrix dk_i = rational_differential(kc.k, i);
    const RatMatrix bk = column_space(dk_i);
    const RatMatrix bk_in_t = inc1 * bk;
    const RatMatrix comp = complement_from(bk_in_t, column_space(dt_i));
    const RatMatrix bt = hstack({bk_in_t, comp}, dt_i.rows());
    SectionDiagram sd;
    sd.eps = solve_rational_matrix(bt, dt_i);
    sd.delta = solve_rational_matrix(bk, dk_i);
    sd.incl_k = inc;
    sd.incl_k2 = RatMatrix(bt.cols(), bk.cols());
    sd.incl_k2.set_block(0, 0, RatMatrix::identity(bk.cols()));
    check_diagram(sd);
    const RatMatrix z = nullspace(sd.eps);
    const RatMatrix initial = solve_rational_matrix(sd.eps, RatMatrix::identity(bt.cols())) +
                              z * random_matrix(rng, z.cols(), bt.cols());
    const RatMatrix sigma = compatible_section_from(sd, initial);
    st.degrees[i].b_basis = bt;
    st.degrees[i].b_section = sigma;
    sk.degrees[i].b_basis = bk;
    sk.degrees[i].b_section = solve_rational_matrix(inc, sigma.block(0, 0, sigma.rows(), bk.cols()));
    if (i >= range_of(p).first && i <= range_of(p).second) {
      const RatMatrix g1 = gamma.component(i + 1).matrix();
      const RatMatrix g0 = gamma.component(i).matrix();
      sp.degrees[i].b_basis = g1 * comp;
      sp.degrees[i].b_section = g0 * sigma.block(0, bk.cols(), sigma.rows(), comp.cols());
    }
  }
  // Cohomology and filtration sections of T, random; pushed forward to P.
  const SplittingChoice canon = splitting_from(t, dt);
  for (const auto& d : dt) {
    DegreeSplitting& x = st.degrees.at(d.degree);
    const RatMatrix b = incoming_basis(st, d.degree, d.m);
    x.h_section = canon.degrees.at(d.degree).h_section + b * random_matrix(rng, b.cols(), d.h);
    const auto off = piece_offsets(d);
    for (std::size_t n = 0; n < d.pieces.size(); ++n) {
      const std::size_t later = d.h - off[n + 1];
      const RatMatrix s0 = canon.degrees.at(d.degree).gr_sections[n];
      x.gr_sections.push_back(s0 + d.gr_basis.block(0, off[n + 1], d.h, later) * random_matrix(rng, later, s0.cols()));
    }
    DegreeSplitting& y = sk.degrees.at(d.degree);
    y.h_section = RatMatrix(kc.k.term(d.degree).free_rank(), 0);
    y.gr_sections = {RatMatrix(0, 0)};

    auto it = std::find_if(dp.begin(), dp.end(), [&](const DegreeData& q) { return q.degree == d.degree; });
    if (it == dp.end()) continue;
    const DegreeData& q = *it;
    DegreeSplitting& w = sp.degrees.at(d.degree);
    const RatMatrix h = induced_map(gamma, d.group, q.group).matrix().block(0, 0, q.h, d.h);
    const RatMatrix hinv = inverse(h);
    w.h_section = gamma.component(d.degree).matrix().block(0, 0, q.m, d.m) * x.h_section * hinv;
    const auto qoff = piece_offsets(q);
    for (std::size_t n = 0; n < d.pieces.size(); ++n) {
      const std::size_t k = off[n + 1] - off[n];
      const RatMatrix image = h * x.gr_sections[n];
      const RatMatrix c = graded_coordinates(q, image).block(qoff[n], 0, qoff[n + 1] - qoff[n], k);
      w.gr_sections.push_back(image * inverse(c));
    }
  }

  TransportCheck out;
  const RatMatrix l_t = lambda_with(t, dt, lt, st);
  const RatMatrix l_k = lambda_with(kc.k, dk, GradedTrivialization{}, sk);
  const RatMatrix l_p = lambda_with(p, dp, lambda, sp);
  out.class_total = k0_class({MixedModule::free(l_t.cols()), l_t, MixedModule::free(l_t.rows())});
  out.class_kernel = k0_class({MixedModule::free(l_k.cols()), l_k, MixedModule::free(l_k.rows())});
  out.class_image = k0_class({MixedModule::free(l_p.cols()), l_p, MixedModule::free(l_p.rows())});
  out.restricts_to_kernel =
      l_t * parity_blocks(kc.incl, true) == parity_blocks(kc.incl, false) * l_k;
  std::map<int, RatMatrix> gc;
  for (int i = lo; i <= hi; ++i) gc[i] = gamma.component(i).matrix();
  out.commutes = parity_blocks(gc, false) * l_t == l_p * parity_blocks(gc, true);
  return out;
}

QuasiIsoComparison compare_through(const ChainMap& alpha, const Filtration& target, const GradedTrivialization& lambda,
                                   std::uint64_t seed) {
  QuasiIsoComparison out;
  out.class_target = chi_rel_perfect(alpha.target(), target, lambda);
  const Filtration fq = pull_back(alpha, target);
  const GradedTrivialization lq = pull_back(alpha, fq, target, lambda);
  out.class_source = chi_rel_perfect(alpha.source(), fq, lq);
  out.surjection = surjectify(alpha);
  out.via_gamma = transport_through(out.surjection.gamma, target, lambda, seed);
  out.via_beta = transport_through(out.surjection.beta, fq, lq, seed + 1);
  return out;
}

namespace {

/// Codivisible free ranks and lattice ranks per degree.
struct Layout {
  std::vector<TrivializationBlock> blocks;
  std::map<std::pair<int, int>, std::size_t> offset;  // within its parity
  std::size_t odd = 0;
  std::size_t even = 0;
};

Layout layout_of(const NearlyPerfectComplex& n) {
  Layout out;
  const auto [slo, shi] = n.support();
  const auto [clo, chi] = range_of(n.complex);
  const int lo = std::min(slo - 1, clo), hi = std::max(shi, chi);
  for (int i = lo; i <= hi; ++i) {
    const std::size_t r = n.rank(i + 1);
    const std::size_t a = i >= clo && i <= chi ? cohomology_at(n.complex, i).module.free_rank() : 0;
    for (const auto& [step, size] : {std::pair{0, r}, std::pair{1, a}}) {
      if (size == 0) continue;
      std::size_t& total = is_odd(i) ? out.odd : out.even;
      out.offset[{i, step}] = total;
      total += size;
      out.blocks.push_back({i, step, size});
    }
  }
  return out;
}

/// A perfect complex with a two-step filtration and, for each graded piece, the matrix
/// from its canonical basis to the coordinates of Hom(L_{i+1}, ℤ) or H^i(C)_codiv.
struct Route {
  BoundedComplex complex;
  Filtration filtration;
  std::map<std::pair<int, int>, RatMatrix> external;
};

/// Solves f_ℚ x = v on the free coordinates.
RatMatrix codiv_coordinates(const ModuleHom& f, const RatMatrix& v) {
  const std::size_t a = f.source().free_rank(), h = f.target().free_rank();
  return solve_rational_matrix(f.matrix().block(0, 0, h, a), v.block(0, 0, h, v.cols()));
}

GradedTrivialization to_route(const Route& r, const Layout& layout, const RatMatrix& lambda) {
  std::vector<RatMatrix> odd, even;
  std::size_t covered_odd = 0, covered_even = 0;
  const auto pieces = graded_pieces(r.complex, r.filtration);
  // Canonical coordinates → layout coordinates, block by block.
  RatMatrix e_odd(layout.odd, 0), e_even(layout.even, 0);
  auto append = [](RatMatrix& e, std::size_t row, const RatMatrix& block) {
    RatMatrix next(e.rows(), e.cols() + block.cols());
    next.set_block(0, 0, e);
    next.set_block(row, e.cols(), block);
    e = next;
  };
  for (const auto& p : pieces) {
    if (p.module.free_rank() == 0) continue;
    auto it = r.external.find({p.degree, p.step});
    ensure(it != r.external.end(), "graded piece (" + deg(p.degree) + ", " + std::to_string(p.step) +
                                       ") has no counterpart in the trivialization");
    auto off = layout.offset.find({p.degree, p.step});
    ensure(off != layout.offset.end() && it->second.rows() == it->second.cols(),
           "graded piece (" + deg(p.degree) + ", " + std::to_string(p.step) + ") does not match the layout");
    append(is_odd(p.degree) ? e_odd : e_even, off->second, it->second);
    (is_odd(p.degree) ? covered_odd : covered_even) += it->second.cols();
  }
  ensure(covered_odd == layout.odd && covered_even == layout.even, "graded pieces do not cover the layout");
  return {inverse(e_even) * lambda * e_odd};
}

Route rational_route(const ConeData& cd, const Replacement& rep) {
  Route r;
  r.complex = rep.complex;
  const auto [klo, khi] = range_of(cd.cone.complex);
  const auto [plo, phi] = range_of(r.complex);
  for (int i = plo; i <= phi; ++i) {
    if (i < klo || i > khi) continue;
    const CohomologyGroup hp = cohomology_at(r.complex, i);
    const CohomologyGroup& hk = cd.cone_cohomology.at(i);
    const SequenceWitness& w = cd.witnesses[std::size_t(i - klo)];
    ensure(w.degree == i && w.exact(), "cone sequence in degree " + deg(i) + " is not exact");
    const RatMatrix psi = induced_map(rep.map, hp, hk).matrix();
    const Subgroup f1 = sum(image(w.f.matrix(), w.codiv.ambient()), hk.module.relations());
    r.filtration.steps[i] = {preimage_within(hp.module.ambient(), psi, f1)};
  }
  for (const auto& p : graded_pieces(r.complex, r.filtration)) {
    if (p.module.free_rank() == 0) continue;
    const SequenceWitness& w = cd.witnesses[std::size_t(p.degree - klo)];
    const RatMatrix v = induced_map(rep.map, cohomology_at(r.complex, p.degree), cd.cone_cohomology.at(p.degree))
                            .matrix() * p.lift;
    r.external[{p.degree, p.step}] = p.step == 0 ? w.g.matrix() * v : codiv_coordinates(w.f, v);
  }
  return r;
}

Route completed_route(const NearlyPerfectComplex& n, const Replacement& tf, const Int& l) {
  Route r;
  r.complex = complete_complex(tf.complex, l).model;
  const auto [lo, hi] = range_of(r.complex);
  std::map<int, CompletionWitness> ws;
  for (int i = lo; i <= hi; ++i) {
    CompletionWitness w = completion_sequence(tf.complex, l, i, 0);
    ensure(w.f_injective && w.g_surjective && w.middle_exact,
           "completed sequence in degree " + deg(i) + " at " + l.get_str() + " is not exact");
    const CohomologyGroup h = cohomology_at(r.complex, i);
    ensure(h.module == w.middle, "completed cohomology differs from the witness in degree " + deg(i));
    r.filtration.steps[i] = {sum(image(w.f.matrix(), w.codiv.ambient()), h.module.relations())};
    ws.emplace(i, std::move(w));
  }
  for (const auto& p : graded_pieces(r.complex, r.filtration)) {
    if (p.module.free_rank() == 0) continue;
    const CompletionWitness& w = ws.at(p.degree);
    if (p.step == 1) {
      r.external[{p.degree, 1}] = codiv_coordinates(w.f, p.lift);
      continue;
    }
    // Λ ⊆ H^{i+1}(P ⊗ ℚ) → Hom(L_{i+1}, ℤ): through H^{i+1}(C)_div and the inverse of τ.
    const int j = p.degree + 1;
    const CohomologyGroup hc = cohomology_at(n.complex, j);
    const MixedModule& hm = hc.module;
    RatMatrix qz(hm.qz_rank(), hm.dim());
    for (std::size_t k = 0; k < hm.qz_rank(); ++k) qz(k, hm.qz_offset() + k) = 1;
    const RatMatrix a = qz * hc.to_h * n.tau_matrix(j);
    const RatMatrix lattice =
        inverse(a) * qz * hc.to_h * tf.map.component(j).matrix() * w.lattice_generators;
    r.external[{p.degree, 0}] = lattice * w.g.matrix() * p.lift;
  }
  return r;
}

}  // namespace

std::vector<TrivializationBlock> trivialization_layout(const NearlyPerfectComplex& n) { return layout_of(n).blocks; }

std::pair<std::size_t, std::size_t> trivialization_shape(const NearlyPerfectComplex& n) {
  const Layout l = layout_of(n);
  return {l.even, l.odd};
}

RelativeEuler chi_rel_npc(const NearlyPerfectComplex& n, const RatMatrix& lambda) {
  return chi_rel_npc(n, lambda, lambda);
}

RelativeEuler chi_rel_npc(const NearlyPerfectComplex& n, const RatMatrix& lambda, const RatMatrix& lambda_tilde) {
  const ValidationReport report = validate(n);
  if (!report.valid()) throw PreconditionError("invalid instance:\n" + report.to_string());
  const Layout layout = layout_of(n);
  if (layout.odd != layout.even)
    throw PreconditionError("no trivialization exists: odd rank " + std::to_string(layout.odd) + ", even rank " +
                            std::to_string(layout.even));
  for (const RatMatrix* m : {&lambda, &lambda_tilde}) {
    require(m->rows() == layout.even && m->cols() == layout.odd,
            "trivialization must be " + std::to_string(layout.even) + "x" + std::to_string(layout.odd));
    require(layout.odd == 0 || determinant(*m) != 0, "trivialization is not invertible");
  }
  RelativeEuler out;
  const ConeData cd = build_cone(n);
  const Replacement rep = perfect_replacement(cd.cone.complex);
  out.rank_image = euler_rank(rep.complex);

  const Route q = rational_route(cd, rep);
  out.rational_route = chi_rel_perfect(q.complex, q.filtration, to_route(q, layout, lambda_tilde));

  const Replacement tf = torsion_free_replacement(n.complex);
  auto local = [&](const Int& l) {
    const Route r = completed_route(n, tf, l);
    return chi_rel_perfect(r.complex, r.filtration, to_route(r, layout, lambda_tilde));
  };
  std::vector<Int> primes = {2, 3, 5, 7};
  for (const PosRational& v : {out.rational_route, local(2)})
    for (const auto& [l, e] : local_components(v)) primes.push_back(l);
  std::sort(primes.begin(), primes.end());
  primes.erase(std::unique(primes.begin(), primes.end()), primes.end());
  for (const Int& l : primes)
    if (const long v = localize(local(l), l); v != 0) out.per_prime[l] = v;

  out.correction = layout.odd == 0 ? Rat(1) : boundary(inverse(lambda_tilde) * lambda);
  out.value = out.rational_route * out.correction;

  std::vector<std::pair<std::size_t, IntVector>> minus, plus;
  for (const auto& b : layout.blocks) {
    IntVector tors;
    if (b.step == 1) tors = codivisible_quotient(cohomology_at(n.complex, b.degree).module).module.torsion();
    (is_odd(b.degree) ? minus : plus).emplace_back(b.size, tors);
  }
  // Codivisible torsion in degrees without a free part.
  const auto [clo, chi] = range_of(n.complex);
  for (int i = clo; i <= chi; ++i) {
    if (layout.offset.count({i, 1})) continue;
    const IntVector tors = codivisible_quotient(cohomology_at(n.complex, i).module).module.torsion();
    if (!tors.empty()) (is_odd(i) ? minus : plus).emplace_back(0, tors);
  }
  out.forgetful = g0_class({parity_sum(minus), lambda, parity_sum(plus)});
  return out;
}

}  // namespace nearperf
