#include "nearperf/ladic.hpp"

#include <algorithm>

#include "nearperf/linalg.hpp"

namespace nearperf {

namespace {

std::string deg(int i) { return std::to_string(i); }

Int power(const Int& l, long k) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), l.get_mpz_t(), static_cast<unsigned long>(k));
  return r;
}

/// The ℤ and l-primary finite coordinates of M, and M ⊗ ℤ_l on them.
struct LPart {
  MixedModule module;
  RatMatrix proj;  // M → module, keeps the selected coordinates
};

LPart l_part(const MixedModule& m, const Int& l) {
  std::vector<std::size_t> keep;
  IntVector orders;
  for (std::size_t j = 0; j < m.free_rank(); ++j) keep.push_back(j);
  for (std::size_t j = 0; j < m.torsion().size(); ++j) {
    const long v = valuation(m.torsion()[j], l);
    if (v == 0) continue;
    keep.push_back(m.torsion_offset() + j);
    orders.push_back(power(l, v));
  }
  LPart out{MixedModule(m.free_rank(), orders, 0, 0), RatMatrix(keep.size(), m.dim())};
  for (std::size_t r = 0; r < keep.size(); ++r) out.proj(r, keep[r]) = 1;
  return out;
}

struct Completion {
  BoundedComplex model;
  std::map<int, RatMatrix> proj;
  RatMatrix proj_at(int i, const BoundedComplex& c) const {
    auto it = proj.find(i);
    return it != proj.end() ? it->second : RatMatrix(0, c.term(i).dim());
  }
};

Completion completion(const BoundedComplex& c, const Int& l) {
  require(is_prime(l), "l must be prime, got " + l.get_str());
  Completion out;
  if (c.empty()) return out;
  std::vector<MixedModule> terms;
  for (int i = c.lo(); i <= c.hi(); ++i) {
    LPart p = l_part(c.term(i), l);
    terms.push_back(p.module);
    out.proj.emplace(i, std::move(p.proj));
  }
  std::vector<ModuleHom> diffs;
  for (int i = c.lo(); i < c.hi(); ++i) {
    const RatMatrix m = out.proj.at(i + 1) * c.differential(i).matrix() * out.proj.at(i).transpose();
    diffs.emplace_back(terms[std::size_t(i - c.lo())], terms[std::size_t(i + 1 - c.lo())], m);
  }
  out.model = BoundedComplex(c.lo(), terms, diffs);
  return out;
}

RatMatrix coordinate_embedding(std::size_t n, std::size_t k) {
  RatMatrix e(n, k);
  for (std::size_t i = 0; i < k; ++i) e(i, i) = 1;
  return e;
}

/// Rows (or columns) of the ℚ-coordinates of a torsion-free term.
RatMatrix rational_projection(const MixedModule& m) {
  RatMatrix q(m.q_rank(), m.dim());
  for (std::size_t j = 0; j < m.q_rank(); ++j) q(j, m.q_offset() + j) = 1;
  return q;
}

Int quotient_order(const LAdicModule& m, long n) {
  long e = n * static_cast<long>(m.free_rank);
  for (long k : m.exponents) e += std::min(k, n);
  return power(m.prime, e);
}

Int torsion_order(const LAdicModule& m, long n) {
  long e = 0;
  for (long k : m.exponents) e += std::min(k, n);
  return power(m.prime, e);
}

bool is_zero(const LAdicModule& m) { return m.free_rank == 0 && m.exponents.empty(); }

/// Everything completion_sequence computes, kept for the naturality maps.
struct CompletionData {
  CompletionWitness w;
  Completion comp;
  CohomologyGroup hp;   // H^i(P)
  CohomologyGroup hm;   // H^i(P_fg)
  RatMatrix lattice_to;
  RatMatrix lattice_from;
};

CompletionData completion_data(const BoundedComplex& p, const Int& l, int i, int max_level) {
  for (int j = p.lo(); j <= p.hi(); ++j)
    if (!p.term(j).is_torsion_free())
      throw PreconditionError("the sequence needs torsion-free terms; degree " + deg(j) + " is " +
                              p.term(j).to_string());
  CompletionData d;
  d.comp = completion(p, l);
  const BoundedComplex& fg = d.comp.model;
  CompletionWitness& w = d.w;
  w.degree = i;
  w.prime = l;

  d.hp = cohomology_at(p, i);
  d.hm = cohomology_at(fg, i);
  w.codiv = codivisible_quotient(d.hp.module).module;
  w.middle = d.hm.module;
  const RatMatrix s = coordinate_embedding(d.hp.module.dim(), w.codiv.dim());
  w.f = ModuleHom(w.codiv, w.middle, d.hm.to_h * d.comp.proj_at(i, p) * d.hp.from_h * s);

  // Connecting map: lift a cocycle of P_fg to P, apply d, read off the ℚ-coordinates.
  const MixedModule& pi = p.term(i);
  const MixedModule& pi1 = p.term(i + 1);
  const RatMatrix q1 = rational_projection(pi1);
  const RatMatrix dq = q1 * p.differential(i).matrix() * rational_projection(pi).transpose();
  const RatMatrix conn = q1 * p.differential(i).matrix() * d.comp.proj_at(i, p).transpose() * d.hm.from_h;
  const Subgroup lat = Subgroup::generated(pi1.q_rank(), dq, conn);
  Presented lp = present(lat, Subgroup::span_of(dq));
  ensure(lp.module.is_torsion_free() && lp.module.q_rank() == 0,
         "connecting image is not a lattice: " + lp.module.to_string());
  w.lattice = lp.module;
  w.g = ModuleHom(w.middle, w.lattice, lp.to * conn);
  w.lattice_generators = rational_projection(pi1).transpose() * lp.from;
  d.lattice_to = std::move(lp.to);
  d.lattice_from = std::move(lp.from);

  w.left = localize(w.codiv, l);
  w.centre = localize(w.middle, l);
  w.right = localize(w.lattice, l);
  w.f_injective = is_injective(w.f);
  w.g_surjective = is_surjective(w.g);
  const Subgroup im_f = sum(image(w.f.matrix(), w.codiv.ambient()), w.middle.relations());
  const Subgroup ker_g = preimage_within(w.middle.ambient(), w.g.matrix(), w.lattice.relations());
  w.middle_exact = im_f == ker_g;
  w.right_is_tate_module = w.right == tate_module(cohomology_at(p, i + 1).module, l);

  const LAdicModule next = localize(cohomology_at(fg, i + 1).module, l);
  for (long n = 1; n <= max_level; ++n) {
    const Int ln = power(l, n);
    std::vector<MixedModule> terms;
    std::vector<ModuleHom> diffs;
    for (int j = i - 1; j <= i + 1; ++j) terms.emplace_back(0, IntVector(fg.term(j).free_rank(), ln), 0, 0);
    for (int j = i - 1; j <= i; ++j)
      diffs.emplace_back(terms[std::size_t(j - i + 1)], terms[std::size_t(j - i + 2)], fg.differential(j).matrix());
    const BoundedComplex red(i - 1, terms, diffs);
    FiniteLevelCheck c;
    c.level = n;
    c.direct = cohomology_at(red, i).module.order();
    c.predicted = quotient_order(w.centre, n) * torsion_order(next, n);
    w.levels.push_back(c);
  }
  return d;
}

RatVector scaled(RatVector v, const Rat& k) {
  for (auto& x : v) x *= k;
  return v;
}

}  // namespace

LAdicModule LAdicComplex::cohomology(int i) const { return localize(cohomology_at(model, i).module, prime); }

long LAdicComplex::euler_rank() const {
  long chi = 0;
  if (model.empty()) return 0;
  for (int i = model.lo(); i <= model.hi(); ++i) {
    const LAdicModule t = term(i);
    require(t.exponents.empty(), "degree " + deg(i) + " of the completion is not free: " + t.to_string());
    chi += (i % 2 == 0 ? 1 : -1) * static_cast<long>(t.free_rank);
  }
  return chi;
}

LAdicComplex complete_complex(const BoundedComplex& c, const Int& l) { return {l, completion(c, l).model}; }

LAdicChainMap complete_map(const ChainMap& f, const Int& l) {
  const Completion s = completion(f.source(), l);
  const Completion t = completion(f.target(), l);
  std::map<int, ModuleHom> comps;
  if (!s.model.empty() && !t.model.empty()) {
    const int lo = std::max(s.model.lo(), t.model.lo());
    const int hi = std::min(s.model.hi(), t.model.hi());
    for (int i = lo; i <= hi; ++i) {
      const RatMatrix m = t.proj.at(i) * f.component(i).matrix() * s.proj.at(i).transpose();
      comps.emplace(i, ModuleHom(s.model.term(i), t.model.term(i), m));
    }
  }
  return {{l, s.model}, {l, t.model}, ChainMap(s.model, t.model, std::move(comps))};
}

bool is_quasi_iso(const LAdicChainMap& f) {
  const Cone k = cone(f.model);
  if (k.complex.empty()) return true;
  for (int i = k.complex.lo(); i <= k.complex.hi(); ++i)
    if (!is_zero(localize(cohomology_at(k.complex, i).module, f.source.prime))) return false;
  return true;
}

bool CompletionWitness::exact() const {
  if (!(f_injective && g_surjective && middle_exact && right_is_tate_module)) return false;
  return std::all_of(levels.begin(), levels.end(), [](const FiniteLevelCheck& c) { return c.agrees(); });
}

CompletionWitness completion_sequence(const BoundedComplex& p, const Int& l, int i, int max_level) {
  return completion_data(p, l, i, max_level).w;
}

CompletionSequenceMap completion_naturality(const ChainMap& phi, const Int& l, int i) {
  const CompletionData a = completion_data(phi.source(), l, i, 0);
  const CompletionData b = completion_data(phi.target(), l, i, 0);
  const BoundedComplex& p = phi.source();
  const BoundedComplex& q = phi.target();
  CompletionSequenceMap out;

  const RatMatrix h = induced_map(phi, a.hp, b.hp).matrix();
  out.left = ModuleHom(a.w.codiv, b.w.codiv, h.block(0, 0, b.w.codiv.dim(), a.w.codiv.dim()));
  const RatMatrix mid = b.comp.proj_at(i, q) * phi.component(i).matrix() * a.comp.proj_at(i, p).transpose();
  out.middle = ModuleHom(a.w.middle, b.w.middle, b.hm.to_h * mid * a.hm.from_h);
  const RatMatrix rat = rational_projection(q.term(i + 1)) * phi.component(i + 1).matrix() *
                        rational_projection(p.term(i + 1)).transpose();
  out.right = ModuleHom(a.w.lattice, b.w.lattice, b.lattice_to * rat * a.lattice_from);
  out.commutes = out.middle * a.w.f == b.w.f * out.left && out.right * a.w.g == b.w.g * out.middle;
  return out;
}

Replacement torsion_free_replacement(const BoundedComplex& c) {
  if (c.is_torsion_free()) return {c, ChainMap::identity(c)};
  const CohomologyRecord h = cohomology(c);
  auto hm = [&](int j) { return h.module_at(j); };
  auto gens = [&](int j) { return hm(j).free_rank() + hm(j).torsion().size(); };
  auto rel_t = [&](int j) { return hm(j + 1).torsion().size(); };
  auto rel_c = [&](int j) { return hm(j + 1).qz_rank(); };
  auto free_dim = [&](int j) { return gens(j) + rel_t(j) + rel_c(j); };

  const int lo = c.lo() - 1, hi = c.hi();
  std::vector<MixedModule> terms;
  for (int j = lo; j <= hi; ++j) terms.emplace_back(free_dim(j), IntVector{}, hm(j).q_rank() + hm(j).qz_rank(), 0);
  auto p_term = [&](int j) -> const MixedModule& { return terms[std::size_t(j - lo)]; };

  std::vector<ModuleHom> diffs;
  for (int j = lo; j < hi; ++j) {
    RatMatrix d(p_term(j + 1).dim(), p_term(j).dim());
    const MixedModule next = hm(j + 1);
    for (std::size_t k = 0; k < rel_t(j); ++k) d(next.free_rank() + k, gens(j) + k) = Rat(next.torsion()[k]);
    for (std::size_t k = 0; k < rel_c(j); ++k) d(free_dim(j + 1) + next.q_rank() + k, gens(j) + rel_t(j) + k) = 1;
    diffs.emplace_back(p_term(j), p_term(j + 1), d);
  }
  BoundedComplex p(lo, terms, diffs);

  std::map<int, ModuleHom> comps;
  for (int j = lo; j <= hi; ++j) {
    const MixedModule hj = hm(j), next = hm(j + 1);
    RatMatrix m(c.term(j).dim(), p_term(j).dim());
    if (!hj.is_zero()) {
      const RatMatrix& from = h.at(j).from_h;
      for (std::size_t k = 0; k < gens(j); ++k) m.set_column(k, from.column(k));
      for (std::size_t k = 0; k < hj.q_rank() + hj.qz_rank(); ++k)
        m.set_column(free_dim(j) + k, from.column(hj.q_offset() + k));
    }
    auto kill = [&](std::size_t col, RatVector target, const std::string& what) {
      auto y = solve_within(c.term(j).ambient(), c.differential(j).matrix(), c.term(j + 1).relations(), target);
      ensure(y.has_value(), what + " in degree " + deg(j + 1));
      m.set_column(col, *y);
    };
    for (std::size_t k = 0; k < rel_t(j); ++k)
      kill(gens(j) + k, scaled(h.at(j + 1).from_h.column(next.free_rank() + k), Rat(next.torsion()[k])),
           "torsion class is not killed by its order");
    for (std::size_t k = 0; k < rel_c(j); ++k)
      kill(gens(j) + rel_t(j) + k, h.at(j + 1).from_h.column(next.qz_offset() + k),
           "integral point of a divisible summand is not a coboundary");
    comps.emplace(j, ModuleHom(p_term(j), c.term(j), m));
  }
  ChainMap f(p, c, std::move(comps));
  ensure(is_quasi_iso(f), "torsion-free replacement is not a quasi-isomorphism");
  return {std::move(p), std::move(f)};
}

long chi_l(const NearlyPerfectComplex& n, const Int& l) {
  const ValidationReport rep = validate(n);
  if (!rep.valid()) throw PreconditionError("invalid nearly perfect complex:\n" + rep.to_string());
  const Replacement t = torsion_free_replacement(n.complex);
  const LAdicComplex hat = complete_complex(t.complex, l);
  const long chi = hat.euler_rank();
  long from_cohomology = 0;
  if (!hat.model.empty())
    for (int i = hat.model.lo(); i <= hat.model.hi(); ++i)
      from_cohomology += (i % 2 == 0 ? 1 : -1) * static_cast<long>(hat.cohomology(i).free_rank);
  ensure(chi == from_cohomology, "rank of the completion disagrees with its cohomology");
  return chi;
}

bool SnakeCheck::is_minus_identity() const {
  for (std::size_t r = 0; r < endomorphism.rows(); ++r)
    for (std::size_t c = 0; c < endomorphism.cols(); ++c) {
      const Int want = r == c ? Int(modulus - 1) : Int(0);
      if (endomorphism(r, c) != want) return false;
    }
  return endomorphism.rows() == endomorphism.cols();
}

SnakeCheck snake_sign_check(const NearlyPerfectComplex& n, const Int& l, long k, int i) {
  require(is_prime(l), "l must be prime, got " + l.get_str());
  require(k >= 1, "precision must be at least 1");
  const ValidationReport rep = validate(n);
  if (!rep.valid()) throw PreconditionError("invalid nearly perfect complex:\n" + rep.to_string());
  SnakeCheck out{power(l, k), IntMatrix()};
  const std::size_t r = n.rank(i + 1);
  if (r == 0) return out;
  out.endomorphism = IntMatrix(r, r);

  const Replacement t = torsion_free_replacement(n.complex);
  const BoundedComplex& p = t.complex;
  const MixedModule& pt = p.term(i + 1);
  const MixedModule qr = MixedModule::rational(r);
  const RatMatrix tau = n.tau_matrix(i + 1);

  // α_P : Hom(L_{i+1}, ℚ) → P^{i+1} lifting τ through the replacement.
  RatMatrix alpha;
  if (n.complex.is_torsion_free()) {
    alpha = tau;
  } else {
    const CohomologyGroup hc = cohomology_at(n.complex, i + 1);
    const RatMatrix a = (hc.to_h * tau).block(hc.module.qz_offset(), 0, r, r);
    alpha = RatMatrix(pt.dim(), r);
    alpha.set_block(pt.q_offset() + hc.module.q_rank(), 0, a);
    const ModuleHom lifted(qr, hc.module, hc.to_h * t.map.component(i + 1).matrix() * alpha);
    ensure(lifted == ModuleHom(qr, hc.module, hc.to_h * tau), "lift of tau does not agree in cohomology");
  }
  const BoundedComplex q = BoundedComplex::concentrated(i + 1, qr);
  const ChainMap ap(q, p, {{i + 1, ModuleHom(qr, pt, alpha)}});
  const Cone k_cone = cone(ap);
  const BoundedComplex& kc = k_cone.complex;
  const RatMatrix dk = kc.differential(i).matrix();
  const RatMatrix in_p = k_cone.injection_target(i).matrix();
  const RatMatrix to_q = k_cone.projection_source(i).matrix();

  for (std::size_t j = 0; j < r; ++j) {
    // q = e_j / l^k, and l^k α(q) = d(p) has an exact solution.
    const RatVector target = alpha.column(j);
    auto sol = solve_within(p.term(i).ambient(), p.differential(i).matrix(), pt.relations(), target);
    if (!sol) throw ContractViolation("l^k times the lifted class is not a coboundary in degree " + deg(i + 1));
    ensure(p.differential(i).apply(*sol) == target, "boundary of the lift differs from l^k alpha(q)");

    // Lift [(0, p̄)] ∈ H^i(Cone/l^k) to a cocycle of Cone^i.
    const RatVector base = in_p.apply(*sol);
    const Rat lk(out.modulus);
    auto z = solve_within(kc.term(i).ambient(), lk * dk, kc.term(i + 1).relations(), scaled(dk.apply(base), -1));
    if (!z) throw ContractViolation("class of the lift does not come from a cocycle of the cone");
    RatVector cocycle = base;
    for (std::size_t m = 0; m < cocycle.size(); ++m) cocycle[m] += lk * (*z)[m];
    ensure(kc.term(i + 1).relations().contains(dk.apply(cocycle)), "lifted cone element is not a cocycle");

    const RatVector image = to_q.apply(cocycle);
    ensure(is_integral(image), "cone class does not project to Hom(L, Z)");
    for (std::size_t m = 0; m < r; ++m) {
      Int v = image[m].get_num();
      v %= out.modulus;
      if (v < 0) v += out.modulus;
      out.endomorphism(m, j) = v;
    }
  }
  return out;
}

}  // namespace nearperf
