#include "nearperf/checks.hpp"

#include <functional>
#include <random>
#include <sstream>

#include "nearperf/error.hpp"
#include "nearperf/generators.hpp"
#include "nearperf/ladic.hpp"
#include "nearperf/linalg.hpp"
#include "nearperf/torsion.hpp"

namespace nearperf {

namespace {

/// Empty string when the property holds, otherwise what went wrong.
using Property = std::function<std::string(std::mt19937_64&)>;

struct NamedProperty {
  std::string name;
  Property run;
};

const std::vector<Int> kPrimes = {2, 3, 5, 7};
constexpr std::size_t kMaxReported = 3;

long pick(std::mt19937_64& rng, long a, long b) { return std::uniform_int_distribution<long>(a, b)(rng); }

std::string str(const Rat& q) {
  std::ostringstream os;
  os << q;
  return os.str();
}

std::string expect_eq(const Rat& got, const Rat& want, const std::string& what) {
  return got == want ? "" : what + ": got " + str(got) + ", expected " + str(want);
}

std::string expect(bool ok, const std::string& what) { return ok ? "" : what; }

InstanceOptions options(InstanceKind kind, bool balanced = false) {
  InstanceOptions o;
  o.kind = kind;
  o.length = kind == InstanceKind::single_degree ? 1 : 3;
  o.max_rank = 3;
  o.max_blocks = 4;
  o.max_torsion = 12;
  o.max_lattice_rank = 2;
  o.balanced = balanced;
  return o;
}

IntMatrix random_int_matrix(std::mt19937_64& rng, std::size_t max_dim, long bound) {
  IntMatrix a(pick(rng, 1, long(max_dim)), pick(rng, 1, long(max_dim)));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) = pick(rng, -bound, bound);
  return a;
}

MixedModule random_fg_module(std::mt19937_64& rng, std::size_t free_rank) {
  IntVector orders;
  for (long k = pick(rng, 0, 2); k > 0; --k) orders.push_back(pick(rng, 2, 12));
  const MixedModule t = MixedModule::finite(orders);
  return MixedModule(free_rank, t.torsion(), 0, 0);
}

// linalg

std::string snf_factorization(std::mt19937_64& rng) {
  const IntMatrix a = random_int_matrix(rng, 8, 50);
  const SnfDecomposition s = snf(a);
  if (s.U * a * s.V != s.D) return "U A V differs from D";
  if (abs(determinant(s.U)) != 1 || abs(determinant(s.V)) != 1) return "transforms are not unimodular";
  const IntVector d = s.diagonal();
  for (std::size_t i = 0; i < s.D.rows(); ++i)
    for (std::size_t j = 0; j < s.D.cols(); ++j)
      if (i != j && s.D(i, j) != 0) return "D is not diagonal";
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] < 0) return "negative invariant factor";
    if (i + 1 < d.size() && d[i] != 0 && d[i + 1] % d[i] != 0) return "invariant factors do not divide";
    if (i + 1 < d.size() && d[i] == 0 && d[i + 1] != 0) return "zero before nonzero invariant factor";
  }
  return expect(s.rank() == rank(to_rat(a)), "rank differs from rational rank");
}

std::string hermite_factorization(std::mt19937_64& rng) {
  const IntMatrix a = random_int_matrix(rng, 8, 50);
  const ColumnHermite h = column_hermite(a);
  if (a * h.V != h.H) return "A V differs from H";
  if (abs(determinant(h.V)) != 1) return "V is not unimodular";
  if (h.rank != rank(to_rat(a))) return "rank differs from rational rank";
  for (std::size_t j = h.rank; j < h.H.cols(); ++j)
    for (std::size_t i = 0; i < h.H.rows(); ++i)
      if (h.H(i, j) != 0) return "columns past the rank are nonzero";
  const IntMatrix k = kernel_basis(a);
  if (k.cols() != a.cols() - h.rank) return "kernel has the wrong rank";
  return expect((a * k).is_zero(), "kernel basis is not in the kernel");
}

std::string rational_solving(std::mt19937_64& rng) {
  const std::size_t n = pick(rng, 1, 6);
  const RatMatrix a = random_invertible_rational(rng, n);
  const RatMatrix inv = inverse(a);
  if (a * inv != RatMatrix::identity(n)) return "A A⁻¹ is not the identity";
  if (determinant(a) * determinant(inv) != 1) return "det A det A⁻¹ is not 1";
  const RatMatrix b = to_rat(random_int_matrix(rng, 6, 9));
  if (b.rows() != n) return "";
  return expect(a * solve_rational_matrix(a, b) == b, "solution does not solve");
}

std::string rational_nullspace(std::mt19937_64& rng) {
  const RatMatrix a = to_rat(random_int_matrix(rng, 6, 3));
  const RatMatrix z = nullspace(a);
  if (!(a * z).is_zero()) return "nullspace is not annihilated";
  return expect(rank(a) + z.cols() == a.cols() && rank(z) == z.cols(), "rank plus nullity differs from width");
}

// mixed

std::string homomorphism_kernels(std::mt19937_64& rng) {
  const NearlyPerfectComplex n = random_npc(rng, options(InstanceKind::nearly_perfect));
  const BoundedComplex& c = n.complex;
  for (int i = c.lo(); i < c.hi(); ++i) {
    const ModuleHom d = c.differential(i);
    const Kernel k = kernel(d);
    const Cokernel q = cokernel(d);
    const Image im = image(d);
    if (!is_injective(k.inclusion) || !(d * k.inclusion).is_zero()) return "kernel in degree " + std::to_string(i);
    if (!is_surjective(q.projection) || !(q.projection * d).is_zero()) return "cokernel in degree " + std::to_string(i);
    if (im.inclusion * im.corestriction != d || !is_injective(im.inclusion) || !is_surjective(im.corestriction))
      return "image factorization in degree " + std::to_string(i);
    if (cokernel(k.inclusion).module != im.module)
      return "coimage differs from image in degree " + std::to_string(i);
  }
  return "";
}

std::string divisible_parts(std::mt19937_64& rng) {
  const NearlyPerfectComplex n = random_npc(rng, options(InstanceKind::nearly_perfect));
  for (int i = n.complex.lo(); i <= n.complex.hi(); ++i) {
    const MixedModule& m = n.complex.term(i);
    const Kernel div = divisible_part(m);
    const Cokernel codiv = codivisible_quotient(m);
    if (!is_injective(div.inclusion) || !(codiv.projection * div.inclusion).is_zero())
      return "divisible part is not killed in degree " + std::to_string(i);
    if (!codiv.module.is_finitely_generated() || div.module.free_rank() != 0 || !div.module.torsion().empty())
      return "divisible part has the wrong shape in degree " + std::to_string(i);
    const Int k = pick(rng, 2, 12);
    const Kernel tors = n_torsion(m, k);
    if (!(k * tors.inclusion).is_zero()) return "n-torsion is not killed by n";
    const Cokernel red = reduce_mod_n(m, k);
    if (!(k * red.projection).is_zero()) return "reduction mod n is not killed by n";
  }
  return "";
}

std::string cyclic_completion(std::mt19937_64& rng) {
  const std::size_t order = pick(rng, 2, 4);
  const CyclicModule m = random_cohomologically_trivial(rng, order, 2);
  if (!is_valid_action(m)) return "invalid action";
  if (!is_cohomologically_trivial(m)) return "generated module has Tate cohomology";
  for (const Int l : {Int(2), Int(3)})
    if (!completion_is_cohomologically_trivial(m, l)) return "completion at " + l.get_str() + " has Tate cohomology";
  return "";
}

// cone

std::string cone_sequence(std::mt19937_64& rng) {
  const NearlyPerfectComplex n = random_npc(rng, options(InstanceKind::nearly_perfect));
  const ConeData cd = build_cone(n);
  for (const auto& w : cd.witnesses)
    if (!w.exact()) return "sequence not exact in degree " + std::to_string(w.degree);
  return expect(chi(cd) == chi(n), "chi from the cone data differs");
}

std::string replacement_quasi_iso(std::mt19937_64& rng) {
  const NearlyPerfectComplex n = random_npc(rng, options(InstanceKind::nearly_perfect));
  const ConeData cd = build_cone(n);
  const Replacement rep = perfect_replacement(cd.cone.complex);
  if (!rep.complex.is_perfect() || !is_quasi_iso(rep.map)) return "replacement is not a perfect quasi-isomorphism";
  return expect(euler_rank(rep.complex) == chi(n), "Euler rank of the replacement differs from chi");
}

std::string single_degree_formula(std::mt19937_64& rng) {
  const NearlyPerfectComplex n = random_npc(rng, options(InstanceKind::single_degree));
  const long a = chi(n), b = chi_single_degree_formula(n);
  return expect(a == b, "chi " + std::to_string(a) + " against single-degree formula " + std::to_string(b));
}

std::string quasi_iso_cone_acyclic(std::mt19937_64& rng) {
  const BoundedComplex q = random_complex(rng, options(InstanceKind::perfect));
  const ChainMap a = random_quasi_iso(rng, q);
  if (!is_quasi_iso(a)) return "generated map is not a quasi-isomorphism";
  if (!is_acyclic(cone(a).complex)) return "cone of a quasi-isomorphism has cohomology";
  return expect(euler_rank(a.source()) == euler_rank(a.target()), "Euler rank changes under quasi-isomorphism");
}

// ladic

std::string completed_sequences(std::mt19937_64& rng) {
  const NearlyPerfectComplex n = random_npc(rng, options(InstanceKind::nearly_perfect));
  const BoundedComplex p = torsion_free_replacement(n.complex).complex;
  if (p.empty()) return "";
  const Int l = kPrimes[pick(rng, 0, 3)];
  for (int i = p.lo() - 1; i <= p.hi(); ++i) {
    const CompletionWitness w = completion_sequence(p, l, i, 3);
    if (!w.exact()) return "sequence not exact in degree " + std::to_string(i) + " at " + l.get_str();
  }
  return "";
}

std::string chi_l_matches(std::mt19937_64& rng) {
  const NearlyPerfectComplex n = random_npc(rng, options(InstanceKind::nearly_perfect));
  const long c = chi(n);
  for (const Int& l : kPrimes)
    if (const long v = chi_l(n, l); v != c)
      return "chi_" + l.get_str() + " = " + std::to_string(v) + ", chi = " + std::to_string(c);
  return "";
}

std::string snake_sign(std::mt19937_64& rng) {
  const NearlyPerfectComplex n = random_npc(rng, options(InstanceKind::nearly_perfect));
  const Int l = Int(std::vector<long>{2, 3, 5}[pick(rng, 0, 2)]);
  const long k = pick(rng, 1, 3);
  for (const auto& [j, r] : n.ranks) {
    if (r == 0) continue;
    if (!snake_sign_check(n, l, k, j - 1).is_minus_identity())
      return "not −1 in degree " + std::to_string(j - 1) + " mod " + l.get_str() + "^" + std::to_string(k);
  }
  return "";
}

// relk

std::string k0_determinant(std::mt19937_64& rng) {
  const std::size_t r = pick(rng, 0, 5);
  const RatMatrix g = random_invertible_rational(rng, r);
  const TripleClass t{MixedModule::free(r), g, MixedModule::free(r)};
  const Rat det = r == 0 ? Rat(1) : Rat(abs(determinant(g)));
  if (std::string e = expect_eq(k0_class(t), det, "K0 class"); !e.empty()) return e;
  return expect_eq(boundary(g), det, "boundary");
}

std::string g0_multiplicative(std::mt19937_64& rng) {
  const std::size_t r = pick(rng, 0, 4);
  const MixedModule a = random_fg_module(rng, r), b = random_fg_module(rng, r), c = random_fg_module(rng, r);
  const RatMatrix g1 = random_invertible_rational(rng, r), g2 = random_invertible_rational(rng, r);
  const PosRational whole = g0_class({a, g2 * g1, c});
  return expect_eq(whole, g0_class({a, g1, b}) * g0_class({b, g2, c}), "class of a composite");
}

std::string g0_choice_of_lattice_map(std::mt19937_64& rng) {
  const std::size_t r = pick(rng, 0, 4);
  const MixedModule a = random_fg_module(rng, r), b = random_fg_module(rng, r);
  const RatMatrix g = random_invertible_rational(rng, r);
  const Int n = common_denominator(g) * pick(rng, 1, 6);
  RatMatrix h(b.dim(), a.dim());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) h(i, j) = Rat(n) * g(i, j);
  const TripleClass t{a, g, b};
  return expect_eq(g0_class_with(t, ModuleHom(a, b, h), n), g0_class(t), "class with a scaled lattice map");
}

std::string local_roundtrip(std::mt19937_64& rng) {
  Rat q(pick(rng, 1, 100000), pick(rng, 1, 100000));
  q.canonicalize();
  const LocalValuationVector v = local_components(q);
  if (assemble(v) != q) return "assembled value differs for " + str(q);
  for (const Int& l : kPrimes) {
    auto it = v.find(l);
    if (localize(q, l) != (it == v.end() ? 0 : it->second)) return "valuation at " + l.get_str() + " differs";
  }
  const MixedModule t = random_fg_module(rng, 0);
  return expect_eq(finite_module_class(t), Rat(t.order()), "class of a finite module");
}

// torsion

std::string splitting_invariance(std::mt19937_64& rng) {
  const BoundedComplex p = random_complex(rng, options(InstanceKind::perfect, true));
  const Filtration f = random_filtration(rng, p);
  const GradedTrivialization l = random_trivialization(rng, p, f);
  const PosRational v = chi_rel_perfect(p, f, l);
  for (int s = 0; s < 3; ++s) {
    const SplittingChoice sc = random_splitting(p, f, rng());
    check_splitting(p, f, sc);
    if (std::string e = expect_eq(chi_rel_perfect(p, f, l, sc), v, "class under another splitting"); !e.empty())
      return e;
  }
  return "";
}

std::string acyclic_class(std::mt19937_64& rng) {
  InstanceOptions o = options(InstanceKind::rationally_acyclic);
  o.max_torsion = 1;
  const BoundedComplex p = random_complex(rng, o);
  return expect_eq(chi_rel_perfect(p, {}, {}, random_splitting(p, {}, rng())), 1, "class of an acyclic complex");
}

std::string finite_cohomology_class(std::mt19937_64& rng) {
  InstanceOptions o = options(InstanceKind::rationally_acyclic);
  o.length = 4;
  const BoundedComplex p = random_complex(rng, o);
  return expect_eq(chi_rel_perfect(p, {}, {}), cohomology_order_ratio(p), "class against cohomology orders");
}

std::string scaling_a_line(std::mt19937_64& rng) {
  const BoundedComplex p = random_complex(rng, options(InstanceKind::perfect, true));
  const Filtration f = random_filtration(rng, p);
  const GradedTrivialization l = random_trivialization(rng, p, f);
  if (l.matrix.cols() == 0) return "";
  Rat u(pick(rng, -9, 9), pick(rng, 1, 9));
  if (u == 0) u = 7;
  u.canonicalize();
  RatMatrix scaled = l.matrix;
  const std::size_t line = pick(rng, 0, long(scaled.cols()) - 1);
  for (std::size_t r = 0; r < scaled.rows(); ++r) scaled(r, line) *= u;
  return expect_eq(chi_rel_perfect(p, f, {scaled}) / chi_rel_perfect(p, f, l), abs(u), "ratio after scaling a line");
}

std::string graded_against_terms(std::mt19937_64& rng) {
  const BoundedComplex m = random_complex(rng, options(InstanceKind::finitely_generated, true));
  const Filtration f = random_filtration(rng, m);
  const GradedTrivialization l = random_trivialization(rng, m, f);
  return expect_eq(module_class(m, f, l, random_splitting(m, f, rng())), graded_class(m, f, l),
                   "class on terms against graded class");
}

std::string quasi_iso_invariance(std::mt19937_64& rng) {
  const BoundedComplex q = random_complex(rng, options(InstanceKind::perfect, true));
  const ChainMap a = random_quasi_iso(rng, q);
  const Filtration f = random_filtration(rng, a.target());
  const GradedTrivialization l = random_trivialization(rng, a.target(), f);
  const QuasiIsoComparison c = compare_through(a, f, l, rng());
  if (!c.surjection.holds()) return "surjectification postconditions fail";
  if (!c.via_gamma.holds() || !c.via_beta.holds()) return "transport through compatible sections fails";
  return expect_eq(c.class_source, c.class_target, "class of the source");
}

std::string relative_euler(std::mt19937_64& rng) {
  const NearlyPerfectComplex n = random_npc(rng, options(InstanceKind::nearly_perfect, true));
  const std::size_t r = trivialization_shape(n).first;
  const RatMatrix lambda = random_invertible_rational(rng, r);
  const RelativeEuler e = chi_rel_npc(n, lambda);
  if (!e.routes_agree()) return "per-prime and rational routes differ";
  for (int k = 0; k < 2; ++k)
    if (std::string m = expect_eq(chi_rel_npc(n, lambda, random_invertible_rational(rng, r)).value, e.value,
                                  "value under another comparison trivialization");
        !m.empty())
      return m;
  if (e.rank_image != chi(n)) return "rank image differs from chi";
  return expect_eq(e.forgetful, e.value, "forgetful class");
}

std::vector<NamedProperty> properties(Suite s) {
  switch (s) {
    case Suite::linalg:
      return {{"snf_factorization", snf_factorization},
              {"hermite_factorization", hermite_factorization},
              {"rational_solving", rational_solving},
              {"rational_nullspace", rational_nullspace}};
    case Suite::mixed:
      return {{"homomorphism_kernels", homomorphism_kernels},
              {"divisible_parts", divisible_parts},
              {"cyclic_completion", cyclic_completion}};
    case Suite::cone:
      return {{"cone_sequence", cone_sequence},
              {"replacement_quasi_iso", replacement_quasi_iso},
              {"single_degree_formula", single_degree_formula},
              {"quasi_iso_cone_acyclic", quasi_iso_cone_acyclic}};
    case Suite::ladic:
      return {{"completed_sequences", completed_sequences},
              {"chi_l_matches", chi_l_matches},
              {"snake_sign", snake_sign}};
    case Suite::relk:
      return {{"k0_determinant", k0_determinant},
              {"g0_multiplicative", g0_multiplicative},
              {"g0_choice_of_lattice_map", g0_choice_of_lattice_map},
              {"local_roundtrip", local_roundtrip}};
    case Suite::torsion:
      return {{"splitting_invariance", splitting_invariance},
              {"acyclic_class", acyclic_class},
              {"finite_cohomology_class", finite_cohomology_class},
              {"scaling_a_line", scaling_a_line},
              {"graded_against_terms", graded_against_terms},
              {"quasi_iso_invariance", quasi_iso_invariance},
              {"relative_euler", relative_euler}};
    case Suite::all: break;
  }
  return {};
}

SuiteResult run_suite(Suite s, std::uint64_t seed, std::size_t cases) {
  SuiteResult out;
  out.suite = std::string(suite_name(s));
  out.cases = cases;
  const auto props = properties(s);
  std::vector<bool> case_ok(cases, true);
  for (std::size_t p = 0; p < props.size(); ++p) {
    PropertyResult pr;
    pr.name = props[p].name;
    pr.cases = cases;
    for (std::size_t k = 0; k < cases; ++k) {
      std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(s), std::uint32_t(p),
                        std::uint32_t(k)};
      std::mt19937_64 rng(seq);
      std::string failure;
      try {
        failure = props[p].run(rng);
      } catch (const BitLimitExceeded&) {
        throw;
      } catch (const std::exception& e) {
        failure = std::string("exception: ") + e.what();
      }
      if (failure.empty()) {
        ++pr.passed;
      } else {
        case_ok[k] = false;
        if (pr.failures.size() < kMaxReported) pr.failures.emplace_back(k, failure);
      }
    }
    out.properties.push_back(std::move(pr));
  }
  for (bool ok : case_ok) out.passed += ok;
  return out;
}

}  // namespace

std::optional<Suite> parse_suite(std::string_view name) {
  for (Suite s : {Suite::linalg, Suite::mixed, Suite::cone, Suite::ladic, Suite::relk, Suite::torsion, Suite::all})
    if (suite_name(s) == name) return s;
  return std::nullopt;
}

std::string_view suite_name(Suite s) {
  switch (s) {
    case Suite::linalg: return "linalg";
    case Suite::mixed: return "mixed";
    case Suite::cone: return "cone";
    case Suite::ladic: return "ladic";
    case Suite::relk: return "relk";
    case Suite::torsion: return "torsion";
    case Suite::all: return "all";
  }
  return "";
}

std::vector<SuiteResult> run_checks(Suite s, std::uint64_t seed, std::size_t cases) {
  std::vector<SuiteResult> out;
  if (s != Suite::all) {
    out.push_back(run_suite(s, seed, cases));
    return out;
  }
  for (Suite each : {Suite::linalg, Suite::mixed, Suite::cone, Suite::ladic, Suite::relk, Suite::torsion})
    out.push_back(run_suite(each, seed, cases));
  return out;
}

}  // namespace nearperf
