#include "nearperf/npc.hpp"

#include <algorithm>
#include <sstream>

namespace nearperf {

namespace {

std::string deg(int i) { return std::to_string(i); }

RatMatrix coordinate_embedding(std::size_t n, std::size_t k) {
  RatMatrix e(n, k);
  for (std::size_t i = 0; i < k; ++i) e(i, i) = 1;
  return e;
}

}  // namespace

std::size_t NearlyPerfectComplex::rank(int i) const {
  auto it = ranks.find(i);
  return it == ranks.end() ? 0 : it->second;
}

RatMatrix NearlyPerfectComplex::tau_matrix(int i) const {
  auto it = tau.find(i);
  if (it != tau.end()) return it->second;
  return RatMatrix(complex.term(i).dim(), rank(i));
}

std::pair<int, int> NearlyPerfectComplex::support() const {
  int lo = complex.empty() ? 0 : complex.lo();
  int hi = complex.empty() ? -1 : complex.hi();
  bool any = !complex.empty();
  for (const auto& [i, r] : ranks) {
    if (r == 0) continue;
    lo = any ? std::min(lo, i) : i;
    hi = any ? std::max(hi, i) : i;
    any = true;
  }
  return {lo, hi};
}

std::string ValidationReport::to_string() const {
  if (issues.empty()) return "valid";
  std::ostringstream os;
  for (const auto& is : issues) os << "degree " << is.degree << ": " << is.invariant << " (" << is.detail << ")\n";
  return os.str();
}

ValidationReport validate(const NearlyPerfectComplex& n) {
  ValidationReport rep;
  auto add = [&](int i, const std::string& inv, const std::string& detail) { rep.issues.push_back({i, inv, detail}); };
  try {
    for (const auto& [i, t] : n.tau) {
      if (t.rows() != n.complex.term(i).dim() || t.cols() != n.rank(i))
        add(i, "tau shape", "expected " + std::to_string(n.complex.term(i).dim()) + "x" + std::to_string(n.rank(i)) +
                                ", got " + std::to_string(t.rows()) + "x" + std::to_string(t.cols()));
    }
    if (!rep.valid()) return rep;
    auto [lo, hi] = n.support();
    for (int i = lo; i <= hi; ++i) {
      const CohomologyGroup h = cohomology_at(n.complex, i);
      const std::size_t r = n.rank(i);
      if (h.module.q_rank() > 0)
        add(i, "divisible cohomology is a quotient of Hom(L, Q/Z)",
            "H^" + deg(i) + " = " + h.module.to_string() + " has a uniquely divisible summand");
      if (h.module.qz_rank() != r)
        add(i, "lattice rank matches divisible cohomology",
            "rank L = " + std::to_string(r) + " but H^" + deg(i) + " = " + h.module.to_string());
      if (r == 0) continue;
      const RatMatrix t = n.tau_matrix(i);
      const MixedModule qr = MixedModule::rational(r);
      const MixedModule& ci = n.complex.term(i);
      if (!is_homomorphism(qr, ci, t)) {
        add(i, "tau is rationally representable", "matrix does not define Hom(L, Q) -> C^" + deg(i));
        continue;
      }
      const ModuleHom alpha(qr, ci, t);
      if (!(n.complex.differential(i) * alpha).is_zero()) {
        add(i, "tau lands in cocycles", "d composed with tau is nonzero");
        continue;
      }
      const RatMatrix th = h.to_h * t;
      const MixedModule qz = MixedModule::rational_mod_one(r);
      if (!is_homomorphism(qz, h.module, th)) {
        add(i, "tau is defined on Hom(L, Q/Z)", "integral points of Hom(L, Q) do not map to coboundaries");
        continue;
      }
      if (h.module.qz_rank() != r) continue;
      const RatMatrix block = th.block(h.module.qz_offset(), 0, r, r);
      const Rat det = determinant(block);
      if (det != 1 && det != -1)
        add(i, "tau is an isomorphism onto H_div", "determinant of tau on divisible coordinates is " + det.get_str());
    }
  } catch (const Error& e) {
    add(0, "instance is computable", e.what());
  }
  return rep;
}

ConeData build_cone(const NearlyPerfectComplex& n) {
  const ValidationReport rep = validate(n);
  if (!rep.valid()) throw PreconditionError("invalid nearly perfect complex:\n" + rep.to_string());
  ConeData out;

  int qlo = 0, qhi = -1;
  bool any = false;
  for (const auto& [i, r] : n.ranks) {
    if (r == 0) continue;
    qlo = any ? std::min(qlo, i) : i;
    qhi = any ? std::max(qhi, i) : i;
    any = true;
  }
  std::vector<MixedModule> qt;
  std::vector<ModuleHom> qd;
  std::map<int, ModuleHom> alpha;
  for (int i = qlo; i <= qhi; ++i) {
    qt.push_back(MixedModule::rational(n.rank(i)));
    if (i > qlo) qd.push_back(ModuleHom::zero(qt[qt.size() - 2], qt.back()));
    alpha.emplace(i, ModuleHom(qt.back(), n.complex.term(i), n.tau_matrix(i)));
  }
  out.q = any ? BoundedComplex(qlo, qt, qd) : BoundedComplex();
  out.alpha = ChainMap(out.q, n.complex, alpha);
  out.cone = cone(out.alpha);
  const BoundedComplex& k = out.cone.complex;
  out.cone_cohomology = cohomology(k);

  for (int i = k.lo(); i <= k.hi(); ++i) {
    const CohomologyGroup hc = cohomology_at(n.complex, i);
    const CohomologyGroup& hk = out.cone_cohomology.at(i);
    ensure(hk.module.is_finitely_generated(),
           "cone cohomology in degree " + deg(i) + " is not finitely generated: " + hk.module.to_string());
    SequenceWitness w;
    w.degree = i;
    w.codiv = codivisible_quotient(hc.module).module;
    w.middle = hk.module;
    w.lattice = MixedModule::free(n.rank(i + 1));
    const RatMatrix s = coordinate_embedding(hc.module.dim(), w.codiv.dim());
    const RatMatrix fm = hk.to_h * out.cone.injection_target(i).matrix() * hc.from_h * s;
    const RatMatrix gm = out.cone.projection_source(i).matrix() * hk.from_h;
    w.f = ModuleHom(w.codiv, w.middle, fm);
    w.g = ModuleHom(w.middle, w.lattice, gm);
    w.f_injective = is_injective(w.f);
    w.g_surjective = is_surjective(w.g);
    const Subgroup im_f = sum(image(fm, w.codiv.ambient()), w.middle.relations());
    const Subgroup ker_g = preimage_within(w.middle.ambient(), gm, w.lattice.relations());
    w.middle_exact = im_f == ker_g;
    out.witnesses.push_back(std::move(w));
  }
  return out;
}

long chi(const ConeData& c) { return euler_rank(perfect_replacement(c.cone.complex).complex); }

long chi(const NearlyPerfectComplex& n) { return chi(build_cone(n)); }

long chi_single_degree_formula(const NearlyPerfectComplex& n) {
  int d = 0, count = 0;
  for (int i = n.complex.lo(); i <= n.complex.hi(); ++i)
    if (!n.complex.term(i).is_zero()) {
      d = i;
      ++count;
    }
  require(count == 1, "single-degree oracle needs exactly one nonzero term, found " + std::to_string(count));
  const ValidationReport rep = validate(n);
  if (!rep.valid()) throw PreconditionError("invalid nearly perfect complex:\n" + rep.to_string());

  const MixedModule& c = n.complex.term(d);
  const std::size_t f = c.free_rank() + c.torsion().size();
  const std::size_t r = n.rank(d);
  const MixedModule src(f, {}, r, 0);
  const RatMatrix m = hconcat(coordinate_embedding(c.dim(), f), n.tau_matrix(d));
  const Kernel k = kernel(ModuleHom(src, c, m.cols() ? m : RatMatrix(c.dim(), 0)));
  ensure(k.module.dim() == k.module.free_rank(), "pullback kernel is not a lattice: " + k.module.to_string());
  const long diff = static_cast<long>(f) - static_cast<long>(k.module.free_rank());
  return (d % 2 == 0) ? diff : -diff;
}

}  // namespace nearperf
