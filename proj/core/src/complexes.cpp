#include "nearperf/complexes.hpp"

#include <algorithm>
#include <string>

namespace nearperf {

namespace {

const MixedModule& zero_module() {
  static const MixedModule z;
  return z;
}

std::string deg(int i) { return std::to_string(i); }

/// Union of the degree ranges of two complexes, as [lo, hi].
std::pair<int, int> joint_range(const BoundedComplex& a, const BoundedComplex& b) {
  if (a.empty()) return {b.lo(), b.hi()};
  if (b.empty()) return {a.lo(), a.hi()};
  return {std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi())};
}

ModuleHom lookup(const std::map<int, ModuleHom>& m, int i, const MixedModule& src, const MixedModule& tgt) {
  auto it = m.find(i);
  if (it != m.end()) return it->second;
  return ModuleHom::zero(src, tgt);
}

}  // namespace

// ---------------------------------------------------------------------------

BoundedComplex::BoundedComplex(int lo, std::vector<MixedModule> terms, std::vector<ModuleHom> diffs)
    : lo_(lo), terms_(std::move(terms)), diffs_(std::move(diffs)) {
  const std::size_t want = terms_.empty() ? 0 : terms_.size() - 1;
  if (diffs_.size() != want) throw DimensionError("complex needs one differential between consecutive terms");
  for (std::size_t k = 0; k < diffs_.size(); ++k) {
    if (!(diffs_[k].source() == terms_[k]) || !(diffs_[k].target() == terms_[k + 1]))
      throw DimensionError("differential in degree " + deg(lo_ + int(k)) + " has the wrong source or target");
    if (k + 1 < diffs_.size() && !(diffs_[k + 1] * diffs_[k]).is_zero())
      throw PreconditionError("d∘d is not zero at degree " + deg(lo_ + int(k)));
  }
}

BoundedComplex BoundedComplex::concentrated(int d, const MixedModule& m) { return BoundedComplex(d, {m}, {}); }

const MixedModule& BoundedComplex::term(int i) const {
  if (i < lo_ || i > hi()) return zero_module();
  return terms_[static_cast<std::size_t>(i - lo_)];
}

ModuleHom BoundedComplex::differential(int i) const {
  if (i < lo_ || i >= hi()) return ModuleHom::zero(term(i), term(i + 1));
  return diffs_[static_cast<std::size_t>(i - lo_)];
}

bool BoundedComplex::is_perfect() const {
  for (const auto& t : terms_)
    if (t.dim() != t.free_rank()) return false;
  return true;
}

bool BoundedComplex::is_torsion_free() const {
  for (const auto& t : terms_)
    if (!t.is_torsion_free()) return false;
  return true;
}

BoundedComplex shift(const BoundedComplex& c) {
  if (c.empty()) return c;
  std::vector<MixedModule> terms;
  std::vector<ModuleHom> diffs;
  for (int i = c.lo(); i <= c.hi(); ++i) terms.push_back(c.term(i));
  for (int i = c.lo(); i < c.hi(); ++i) diffs.push_back(-c.differential(i));
  return BoundedComplex(c.lo() - 1, std::move(terms), std::move(diffs));
}

BoundedComplex direct_sum(const BoundedComplex& a, const BoundedComplex& b) {
  auto [lo, hi] = joint_range(a, b);
  if (a.empty() && b.empty()) return a;
  std::vector<DirectSum> sums;
  for (int i = lo; i <= hi; ++i) sums.push_back(direct_sum(std::vector<MixedModule>{a.term(i), b.term(i)}));
  std::vector<MixedModule> terms;
  std::vector<ModuleHom> diffs;
  for (int i = lo; i <= hi; ++i) terms.push_back(sums[std::size_t(i - lo)].module);
  for (int i = lo; i < hi; ++i) {
    const DirectSum& s0 = sums[std::size_t(i - lo)];
    const DirectSum& s1 = sums[std::size_t(i - lo + 1)];
    diffs.push_back(s1.injections[0] * a.differential(i) * s0.projections[0] +
                    s1.injections[1] * b.differential(i) * s0.projections[1]);
  }
  return BoundedComplex(lo, std::move(terms), std::move(diffs));
}

// ---------------------------------------------------------------------------

ChainMap::ChainMap(BoundedComplex source, BoundedComplex target, std::map<int, ModuleHom> components)
    : src_(std::move(source)), tgt_(std::move(target)), comps_(std::move(components)) {
  for (const auto& [i, f] : comps_) {
    if (!(f.source() == src_.term(i)) || !(f.target() == tgt_.term(i)))
      throw DimensionError("chain map component in degree " + deg(i) + " has the wrong source or target");
  }
  auto [lo, hi] = joint_range(src_, tgt_);
  for (int i = lo - 1; i <= hi; ++i) {
    if (!(tgt_.differential(i) * component(i) == component(i + 1) * src_.differential(i)))
      throw PreconditionError("chain map does not commute with the differentials at degree " + deg(i));
  }
}

ChainMap ChainMap::identity(const BoundedComplex& c) {
  std::map<int, ModuleHom> comps;
  for (int i = c.lo(); i <= c.hi(); ++i) comps.emplace(i, ModuleHom::identity(c.term(i)));
  return ChainMap(c, c, std::move(comps));
}

ModuleHom ChainMap::component(int i) const { return lookup(comps_, i, src_.term(i), tgt_.term(i)); }

ChainMap operator*(const ChainMap& g, const ChainMap& f) {
  std::map<int, ModuleHom> comps;
  auto [lo, hi] = joint_range(f.source(), g.target());
  for (int i = lo; i <= hi; ++i) comps.emplace(i, g.component(i) * f.component(i));
  return ChainMap(f.source(), g.target(), std::move(comps));
}

// ---------------------------------------------------------------------------

Kernel CohomologyGroup::cocycle_module() const {
  Presented p = present(cocycles, term.relations());
  return {p.module, ModuleHom(p.module, term, p.from)};
}

ModuleHom CohomologyGroup::cocycle_projection() const {
  Kernel z = cocycle_module();
  return ModuleHom(z.module, module, to_h * z.inclusion.matrix());
}

const CohomologyGroup& CohomologyRecord::at(int i) const {
  if (i < lo_ || i > hi()) throw DimensionError("no cohomology stored in degree " + deg(i));
  return groups_[static_cast<std::size_t>(i - lo_)];
}

MixedModule CohomologyRecord::module_at(int i) const {
  if (i < lo_ || i > hi()) return MixedModule();
  return at(i).module;
}

bool CohomologyRecord::is_acyclic() const {
  for (const auto& g : groups_)
    if (!g.module.is_zero()) return false;
  return true;
}

CohomologyGroup cohomology_at(const BoundedComplex& c, int i) {
  CohomologyGroup g;
  g.degree = i;
  g.term = c.term(i);
  const Subgroup x = g.term.ambient();
  g.cocycles = preimage_within(x, c.differential(i).matrix(), c.term(i + 1).relations());
  g.coboundaries = sum(g.term.relations(), image(c.differential(i - 1).matrix(), c.term(i - 1).ambient()));
  ensure(g.cocycles.contains(g.coboundaries), "coboundaries are not cocycles in degree " + deg(i));
  Presented p = present(g.cocycles, g.coboundaries);
  g.module = p.module;
  g.to_h = std::move(p.to);
  g.from_h = std::move(p.from);
  return g;
}

CohomologyRecord cohomology(const BoundedComplex& c) {
  std::vector<CohomologyGroup> groups;
  for (int i = c.lo(); i <= c.hi(); ++i) groups.push_back(cohomology_at(c, i));
  return CohomologyRecord(c.lo(), std::move(groups));
}

ModuleHom induced_map(const ChainMap& f, const CohomologyGroup& source, const CohomologyGroup& target) {
  if (source.degree != target.degree) throw DimensionError("induced map between different degrees");
  const RatMatrix m = target.to_h * f.component(source.degree).matrix() * source.from_h;
  return ModuleHom(source.module, target.module, m);
}

// ---------------------------------------------------------------------------

ModuleHom Cone::injection_source(int i) const {
  return lookup(inj_source, i, to_shifted_source.target().term(i), complex.term(i));
}
ModuleHom Cone::injection_target(int i) const {
  return lookup(inj_target, i, from_target.source().term(i), complex.term(i));
}
ModuleHom Cone::projection_source(int i) const {
  return lookup(proj_source, i, complex.term(i), to_shifted_source.target().term(i));
}
ModuleHom Cone::projection_target(int i) const {
  return lookup(proj_target, i, complex.term(i), from_target.source().term(i));
}

Cone cone(const ChainMap& f) {
  const BoundedComplex& a = f.source();
  const BoundedComplex& b = f.target();
  const BoundedComplex a1 = shift(a);
  auto [lo, hi] = joint_range(a1, b);
  Cone out;
  if (a.empty() && b.empty()) {
    out.from_target = ChainMap(b, b, {});
    out.to_shifted_source = ChainMap(b, a1, {});
    return out;
  }
  std::vector<DirectSum> sums;
  for (int i = lo; i <= hi; ++i) sums.push_back(direct_sum(std::vector<MixedModule>{a.term(i + 1), b.term(i)}));
  std::vector<MixedModule> terms;
  std::vector<ModuleHom> diffs;
  for (int i = lo; i <= hi; ++i) {
    const DirectSum& s = sums[std::size_t(i - lo)];
    terms.push_back(s.module);
    out.inj_source.emplace(i, s.injections[0]);
    out.inj_target.emplace(i, s.injections[1]);
    out.proj_source.emplace(i, s.projections[0]);
    out.proj_target.emplace(i, s.projections[1]);
  }
  for (int i = lo; i < hi; ++i) {
    const DirectSum& s0 = sums[std::size_t(i - lo)];
    const DirectSum& s1 = sums[std::size_t(i - lo + 1)];
    const ModuleHom& pa = s0.projections[0];
    const ModuleHom& pb = s0.projections[1];
    diffs.push_back(s1.injections[0] * (-a.differential(i + 1)) * pa +
                    s1.injections[1] * (f.component(i + 1) * pa + b.differential(i) * pb));
  }
  out.complex = BoundedComplex(lo, std::move(terms), std::move(diffs));
  out.from_target = ChainMap(b, out.complex, out.inj_target);
  out.to_shifted_source = ChainMap(out.complex, a1, out.proj_source);
  return out;
}

bool is_acyclic(const BoundedComplex& c) {
  for (int i = c.lo(); i <= c.hi(); ++i)
    if (!cohomology_at(c, i).module.is_zero()) return false;
  return true;
}

bool is_quasi_iso(const ChainMap& f) { return is_acyclic(cone(f).complex); }

// ---------------------------------------------------------------------------

Replacement perfect_replacement(const BoundedComplex& c) {
  if (c.is_perfect()) return {c, ChainMap::identity(c)};
  const CohomologyRecord h = cohomology(c);
  for (int i = c.lo(); i <= c.hi(); ++i)
    if (!h.at(i).module.is_finitely_generated())
      throw PreconditionError("cohomology in degree " + deg(i) + " is not finitely generated: " +
                              h.at(i).module.to_string());

  auto gens = [&](int i) { return h.module_at(i).free_rank() + h.module_at(i).torsion().size(); };
  auto rels = [&](int i) { return h.module_at(i).torsion().size(); };

  const int lo = c.lo() - 1, hi = c.hi();
  std::vector<MixedModule> terms;
  for (int j = lo; j <= hi; ++j) terms.push_back(MixedModule::free(gens(j) + rels(j + 1)));
  auto p_term = [&](int j) -> const MixedModule& { return terms[std::size_t(j - lo)]; };

  std::vector<ModuleHom> diffs;
  for (int j = lo; j < hi; ++j) {
    RatMatrix d(p_term(j + 1).dim(), p_term(j).dim());
    const MixedModule hj1 = h.module_at(j + 1);
    for (std::size_t k = 0; k < rels(j + 1); ++k) d(hj1.free_rank() + k, gens(j) + k) = Rat(hj1.torsion()[k]);
    diffs.emplace_back(p_term(j), p_term(j + 1), d);
  }
  BoundedComplex p(lo, terms, diffs);

  std::map<int, ModuleHom> comps;
  for (int j = lo; j <= hi; ++j) {
    RatMatrix m(c.term(j).dim(), p_term(j).dim());
    for (std::size_t k = 0; k < gens(j); ++k) m.set_column(k, h.at(j).from_h.column(k));
    const MixedModule hj1 = h.module_at(j + 1);
    for (std::size_t k = 0; k < rels(j + 1); ++k) {
      RatVector target = h.at(j + 1).from_h.column(hj1.free_rank() + k);
      for (auto& v : target) v *= Rat(hj1.torsion()[k]);
      auto y = solve_within(c.term(j).ambient(), c.differential(j).matrix(), c.term(j + 1).relations(), target);
      ensure(y.has_value(), "torsion class is not killed by its order in degree " + deg(j + 1));
      m.set_column(gens(j) + k, *y);
    }
    comps.emplace(j, ModuleHom(p_term(j), c.term(j), m));
  }
  ChainMap f(p, c, std::move(comps));
  ensure(is_quasi_iso(f), "perfect replacement is not a quasi-isomorphism");
  return {std::move(p), std::move(f)};
}

Lift lift_through_quasi_iso(const ChainMap& alpha, const ChainMap& beta) {
  const BoundedComplex& p = alpha.source();
  const BoundedComplex& q = beta.source();
  const BoundedComplex& c = beta.target();
  require(p.is_perfect(), "lifting needs a perfect source complex");
  const Cone cb = cone(beta);
  const BoundedComplex& k = cb.complex;

  std::map<int, ModuleHom> t;  // T^i : P^i → Cone^{i−1}
  auto t_at = [&](int i) {
    auto it = t.find(i);
    return it != t.end() ? it->second : ModuleHom::zero(p.term(i), k.term(i - 1));
  };
  std::map<int, ModuleHom> h, s;
  for (int i = p.hi(); i >= p.lo(); --i) {
    const ModuleHom rho = cb.injection_target(i) * alpha.component(i) - t_at(i + 1) * p.differential(i);
    RatMatrix m(k.term(i - 1).dim(), p.term(i).dim());
    for (std::size_t j = 0; j < p.term(i).dim(); ++j) {
      auto sol = solve_within(k.term(i - 1).ambient(), k.differential(i - 1).matrix(), k.term(i).relations(),
                              rho.matrix().column(j));
      ensure(sol.has_value(), "no null-homotopy through the cone in degree " + deg(i));
      m.set_column(j, *sol);
    }
    ModuleHom ti(p.term(i), k.term(i - 1), m);
    t.emplace(i, ti);
    h.emplace(i, cb.projection_source(i - 1) * ti);
    s.emplace(i, -(cb.projection_target(i - 1) * ti));
  }
  Lift out{ChainMap(p, q, h), s};
  for (int i = p.lo(); i <= p.hi(); ++i) {
    auto s_at = [&](int d) {
      auto it = out.s.find(d);
      return it != out.s.end() ? it->second : ModuleHom::zero(p.term(d), c.term(d - 1));
    };
    const ModuleHom lhs = beta.component(i) * out.h.component(i) - alpha.component(i);
    const ModuleHom rhs = c.differential(i - 1) * s_at(i) + s_at(i + 1) * p.differential(i);
    ensure(lhs == rhs, "homotopy identity fails in degree " + deg(i));
  }
  return out;
}

long euler_rank(const BoundedComplex& p) {
  require(p.is_perfect(), "euler_rank expects a perfect complex");
  long e = 0;
  for (int i = p.lo(); i <= p.hi(); ++i) {
    const long r = static_cast<long>(p.term(i).free_rank());
    e += (i % 2 == 0) ? r : -r;
  }
  return e;
}

}  // namespace nearperf
