#include <gtest/gtest.h>

#include <random>

#include "nearperf/generators.hpp"
#include "nearperf/linalg.hpp"
#include "nearperf/torsion.hpp"
#include "oracle/minors.hpp"

using namespace nearperf;

namespace {

RatMatrix rm(std::initializer_list<std::initializer_list<Rat>> v) { return RatMatrix(v); }

const MixedModule Z = MixedModule::free(1);

BoundedComplex two_term(int lo, const MixedModule& a, const MixedModule& b, const RatMatrix& d) {
  return BoundedComplex(lo, {a, b}, {ModuleHom(a, b, d)});
}

// ℤ in degree 0 and ℤ in degree 1, zero differential.
BoundedComplex z_plus_z_shifted() { return two_term(0, Z, Z, rm({{0}})); }

GradedTrivialization scalar(const Rat& q) { return {rm({{q}})}; }

InstanceOptions perfect_opts(bool balanced = true) {
  InstanceOptions o;
  o.kind = InstanceKind::perfect;
  o.length = 3;
  o.max_rank = 3;
  o.max_blocks = 4;
  o.max_torsion = 6;
  o.balanced = balanced;
  return o;
}

// Π |H^even| / Π |H^odd| of a ℚ-acyclic perfect complex from minors: H^i is the torsion of coker d^{i−1}.
Rat order_ratio_from_minors(const BoundedComplex& p) {
  Rat q = 1;
  for (int i = p.lo(); i <= p.hi(); ++i) {
    const RatMatrix d = p.differential(i - 1).matrix();
    oracle::Grid g(d.rows(), std::vector<mpz_class>(d.cols()));
    for (std::size_t r = 0; r < d.rows(); ++r)
      for (std::size_t c = 0; c < d.cols(); ++c) g[r][c] = d(r, c).get_num();
    mpz_class order = 1;
    if (d.rows() > 0 && d.cols() > 0)
      for (const auto& f : oracle::invariant_factors(g, d.cols()))
        if (f != 0) order *= f;
    q *= (i % 2 == 0) ? Rat(order) : Rat(1, order);
  }
  q.canonicalize();
  return q;
}

}  // namespace

TEST(LambdaOnTerms, Examples) {
  const BoundedComplex m = z_plus_z_shifted();
  EXPECT_EQ(lambda_on_terms(m, {}, scalar(5), canonical_splitting(m, {})), rm({{5}}));
  const BoundedComplex three = two_term(0, Z, Z, rm({{3}}));
  EXPECT_EQ(lambda_on_terms(three, {}, {}, canonical_splitting(three, {})), rm({{Rat(1, 3)}}));
  const BoundedComplex id = two_term(0, Z, Z, rm({{1}}));
  const RatMatrix l = lambda_on_terms(id, {}, {}, random_splitting(id, {}, 3));
  EXPECT_EQ(boundary(l), 1);
}

TEST(LambdaOnTerms, RejectsBadInput) {
  const BoundedComplex m = z_plus_z_shifted();
  EXPECT_THROW(lambda_on_terms(m, {}, scalar(0), canonical_splitting(m, {})), PreconditionError);
  EXPECT_THROW(lambda_on_terms(m, {}, {rm({{1, 2}})}, canonical_splitting(m, {})), PreconditionError);
  SplittingChoice s = canonical_splitting(m, {});
  s.degrees[0].h_section = rm({{2}});
  EXPECT_THROW(lambda_on_terms(m, {}, scalar(1), s), PreconditionError);
}

TEST(ChiRelPerfect, Examples) {
  // Hand chase: λ_M = Φ⁺ ι Φ⁻¹ with Φ⁺ = (1) on B¹'s section and Φ⁻ = (3) on B¹ ⊆ ℤ.
  EXPECT_EQ(chi_rel_perfect(two_term(0, Z, Z, rm({{3}})), {}, {}), Rat(1, 3));
  EXPECT_EQ(chi_rel_perfect(two_term(0, Z, Z, rm({{1}})), {}, {}), 1);
  EXPECT_EQ(chi_rel_perfect(z_plus_z_shifted(), {}, scalar(2)), 2);
  EXPECT_EQ(chi_rel_perfect(z_plus_z_shifted(), {}, scalar(Rat(-3, 4))), Rat(3, 4));
  EXPECT_EQ(chi_rel_perfect(BoundedComplex(), {}, {}), 1);
  // Shifting by one degree swaps the sides.
  EXPECT_EQ(chi_rel_perfect(two_term(1, Z, Z, rm({{3}})), {}, {}), 3);
}

TEST(ChiRelPerfect, RequiresPerfect) {
  const BoundedComplex m = two_term(0, Z, MixedModule(1, {2}, 0, 0), rm({{3}, {1}}));
  EXPECT_THROW(chi_rel_perfect(m, {}, {}), PreconditionError);
}

TEST(ChiRelPerfect, FiltrationPiecesUseTheirOwnBases) {
  // H^0 = ℤ² filtered by F¹ = ℤ(2, 0) + ℤ(0, 1); Gr⁰ = ℤ/2 and Gr¹ = ℤ².
  const BoundedComplex m(0, {MixedModule::free(2), MixedModule::free(2)},
                         {ModuleHom::zero(MixedModule::free(2), MixedModule::free(2))});
  Filtration f;
  f.steps[0] = {Subgroup::lattice_of(rm({{2, 0}, {0, 1}}))};
  const auto pieces = graded_pieces(m, f);
  ASSERT_EQ(pieces.size(), 3u);
  EXPECT_EQ(pieces[0].module, MixedModule::finite({2}));
  EXPECT_EQ(pieces[1].module, MixedModule::free(2));
  const PosRational with = chi_rel_perfect(m, f, {RatMatrix::identity(2)});
  const PosRational without = chi_rel_perfect(m, {}, {RatMatrix::identity(2)});
  EXPECT_EQ(with / without, 2);
  EXPECT_EQ(graded_class(m, f, {RatMatrix::identity(2)}), 2);
}

TEST(ChiRelPerfect, IndependentOfSplittings) {
  std::mt19937_64 rng(0x350a);
  for (int trial = 0; trial < 40; ++trial) {
    const BoundedComplex p = random_complex(rng, perfect_opts());
    const Filtration f = random_filtration(rng, p);
    const GradedTrivialization l = random_trivialization(rng, p, f);
    const PosRational v = chi_rel_perfect(p, f, l);
    for (std::uint64_t s = 1; s <= 5; ++s) {
      const SplittingChoice sc = random_splitting(p, f, rng());
      EXPECT_NO_THROW(check_splitting(p, f, sc));
      EXPECT_EQ(chi_rel_perfect(p, f, l, sc), v) << "trial " << trial << " choice " << s;
    }
  }
}

TEST(ChiRelPerfect, AcyclicGivesOne) {
  std::mt19937_64 rng(0x350b);
  InstanceOptions o = perfect_opts();
  o.kind = InstanceKind::rationally_acyclic;
  o.max_torsion = 1;
  for (int trial = 0; trial < 30; ++trial) {
    const BoundedComplex p = random_complex(rng, o);
    ASSERT_TRUE(is_acyclic(p));
    EXPECT_EQ(chi_rel_perfect(p, {}, {}, random_splitting(p, {}, rng())), 1);
  }
}

TEST(ChiRelPerfect, ChangeOfTrivializationIsABoundary) {
  std::mt19937_64 rng(0x350d);
  for (int trial = 0; trial < 30; ++trial) {
    const BoundedComplex p = random_complex(rng, perfect_opts());
    const Filtration f = random_filtration(rng, p);
    const GradedTrivialization l = random_trivialization(rng, p, f);
    const RatMatrix u = random_invertible_rational(rng, l.matrix.cols());
    const GradedTrivialization l2{l.matrix * u};
    EXPECT_EQ(chi_rel_perfect(p, f, l2) / chi_rel_perfect(p, f, l), boundary(inverse(l.matrix) * l2.matrix));
  }
}

TEST(ChiRelPerfect, ScalingOneGradedLine) {
  std::mt19937_64 rng(0x350e);
  for (int trial = 0; trial < 20; ++trial) {
    const BoundedComplex p = random_complex(rng, perfect_opts());
    const GradedTrivialization l = random_trivialization(rng, p, {});
    if (l.matrix.cols() == 0) continue;
    const std::size_t line = rng() % l.matrix.cols();
    RatMatrix scaled = l.matrix;
    for (std::size_t r = 0; r < scaled.rows(); ++r) scaled(r, line) *= Rat(-5, 3);
    EXPECT_EQ(chi_rel_perfect(p, {}, {scaled}) / chi_rel_perfect(p, {}, l), Rat(5, 3));
  }
}

TEST(ChiRelPerfect, RationallyAcyclicGivesOrderRatio) {
  std::mt19937_64 rng(0x3303);
  InstanceOptions o = perfect_opts();
  o.kind = InstanceKind::rationally_acyclic;
  o.length = 4;
  o.max_torsion = 12;
  for (int trial = 0; trial < 40; ++trial) {
    const BoundedComplex p = random_complex(rng, o);
    const Rat expected = order_ratio_from_minors(p);
    EXPECT_EQ(chi_rel_perfect(p, {}, {}), expected) << "trial " << trial;
    EXPECT_EQ(cohomology_order_ratio(p), expected);
  }
}

TEST(ModuleClass, AgreesWithGradedClass) {
  std::mt19937_64 rng(0x3202);
  InstanceOptions o = perfect_opts();
  o.kind = InstanceKind::finitely_generated;
  for (int trial = 0; trial < 40; ++trial) {
    const BoundedComplex m = random_complex(rng, o);
    const Filtration f = random_filtration(rng, m);
    const GradedTrivialization l = random_trivialization(rng, m, f);
    const PosRational g = graded_class(m, f, l);
    EXPECT_EQ(module_class(m, f, l, canonical_splitting(m, f)), g) << "trial " << trial;
    EXPECT_EQ(module_class(m, f, l, random_splitting(m, f, rng())), g) << "trial " << trial;
  }
}

TEST(ModuleClass, Examples) {
  const BoundedComplex three = two_term(0, Z, Z, rm({{3}}));
  EXPECT_EQ(module_class(three, {}, {}, canonical_splitting(three, {})), Rat(1, 3));
  // ℤ → ℤ ⊕ ℤ/4, 1 ↦ (0, 1): H⁰ = 4ℤ and H¹ = ℤ. λ_M = (4), and ℤ/4 in M⁻ cancels it.
  const MixedModule t(1, {4}, 0, 0);
  const BoundedComplex m = two_term(0, Z, t, rm({{0}, {1}}));
  const SplittingChoice s = canonical_splitting(m, {});
  EXPECT_EQ(lambda_on_terms(m, {}, scalar(1), s), rm({{4}}));
  EXPECT_EQ(module_class(m, {}, scalar(1), s), 1);
  EXPECT_EQ(graded_class(m, {}, scalar(1)), 1);
}

TEST(Surjectify, Examples) {
  const BoundedComplex q = two_term(0, Z, Z, rm({{2}}));
  // P = 0 is not quasi-isomorphic to q; use an acyclic source instead.
  const BoundedComplex acyclic = two_term(0, Z, Z, rm({{1}}));
  const Surjectification zero = surjectify(ChainMap(acyclic, BoundedComplex(), {}));
  EXPECT_TRUE(zero.holds());
  EXPECT_EQ(zero.t.term(0), Z);
  EXPECT_EQ(zero.t.term(1), Z);

  const Surjectification id = surjectify(ChainMap::identity(q));
  EXPECT_TRUE(id.holds());
  EXPECT_EQ(id.t.term(0).free_rank(), 2u);  // P^{−1} ⊕ P^0 ⊕ Q^0
  EXPECT_EQ(id.t.term(1).free_rank(), 3u);
  EXPECT_EQ(id.t.term(2).free_rank(), 1u);

  EXPECT_THROW(surjectify(ChainMap(q, BoundedComplex(), {})), PreconditionError);
}

TEST(Surjectify, RandomQuasiIsomorphisms) {
  std::mt19937_64 rng(0x3606);
  for (int trial = 0; trial < 25; ++trial) {
    const BoundedComplex q = random_complex(rng, perfect_opts(false));
    const ChainMap a = random_quasi_iso(rng, q);
    ASSERT_TRUE(is_quasi_iso(a));
    const Surjectification s = surjectify(a);
    EXPECT_TRUE(s.gamma_surjective && s.cocycles_surjective) << "trial " << trial;
    EXPECT_TRUE(s.beta_quasi_iso && s.gamma_quasi_iso && s.same_on_cohomology) << "trial " << trial;
  }
}

TEST(CompatibleSection, Examples) {
  // K'' = 0.
  SectionDiagram d{rm({{1, 2}}), RatMatrix(0, 1), rm({{2}, {-1}}), RatMatrix(1, 0)};
  RatMatrix s = compatible_section(d);
  EXPECT_EQ(d.eps * s, RatMatrix::identity(1));
  // K = V: the section must land in K and split δ.
  const RatMatrix eps = rm({{1, 1, 0}, {0, 1, 1}});
  d = {eps, eps, RatMatrix::identity(3), RatMatrix::identity(2)};
  s = compatible_section(d);
  EXPECT_EQ(eps * s, RatMatrix::identity(2));
  // Non-commuting input.
  d = {rm({{1, 0}}), rm({{1}}), rm({{0}, {1}}), rm({{1}})};
  EXPECT_THROW(compatible_section(d), PreconditionError);
}

TEST(CompatibleSection, RandomDiagrams) {
  std::mt19937_64 rng(0x3707);
  std::uniform_int_distribution<int> dim(1, 4);
  for (int trial = 0; trial < 60; ++trial) {
    // V = ℚ^v with ε a random surjection, K ⊆ V random, K'' = ε(K) with its own basis.
    const std::size_t v = dim(rng) + 1;
    const std::size_t v2 = std::min<std::size_t>(dim(rng), v);
    RatMatrix eps;
    do eps = to_rat(random_unimodular(rng, v)).block(0, 0, v2, v);
    while (rank(eps) != v2);
    const std::size_t k = std::min<std::size_t>(dim(rng), v);
    const RatMatrix incl_k = to_rat(random_unimodular(rng, v)).block(0, 0, v, k);
    const RatMatrix image = column_space(eps * incl_k);
    const SectionDiagram d{eps, solve_rational_matrix(image, eps * incl_k), incl_k, image};
    const RatMatrix s = compatible_section(d);
    EXPECT_EQ(eps * s, RatMatrix::identity(v2));
    const RatMatrix on_k = s * d.incl_k2;
    const RatMatrix pre = solve_rational_matrix(incl_k, on_k);  // throws if σ(K'') ⊄ K
    EXPECT_EQ(d.delta * pre, RatMatrix::identity(d.delta.rows()));
  }
}

TEST(QuasiIsoComparison, Examples) {
  const BoundedComplex q = two_term(0, Z, Z, rm({{3}}));
  const QuasiIsoComparison c = compare_through(ChainMap::identity(q), {}, {}, 1);
  EXPECT_TRUE(c.holds());
  EXPECT_EQ(c.class_source, Rat(1, 3));
}

TEST(QuasiIsoComparison, RandomPairs) {
  std::mt19937_64 rng(0x350c);
  for (int trial = 0; trial < 20; ++trial) {
    const BoundedComplex q = random_complex(rng, perfect_opts());
    const ChainMap a = random_quasi_iso(rng, q);
    const Filtration f = random_filtration(rng, a.target());
    const GradedTrivialization l = random_trivialization(rng, a.target(), f);
    const QuasiIsoComparison c = compare_through(a, f, l, rng());
    EXPECT_EQ(c.class_source, c.class_target) << "trial " << trial;
    EXPECT_TRUE(c.surjection.holds()) << "trial " << trial;
    EXPECT_TRUE(c.via_gamma.holds()) << "trial " << trial;
    EXPECT_TRUE(c.via_beta.holds()) << "trial " << trial;
    EXPECT_TRUE(c.holds()) << "trial " << trial;
  }
}

namespace {

// ℤ ⊕ ℚ/ℤ in degree 3 with L₃ = ℤ onto the ℚ/ℤ summand.
NearlyPerfectComplex z_plus_qz() {
  NearlyPerfectComplex n;
  n.complex = BoundedComplex::concentrated(3, MixedModule(1, {}, 0, 1));
  n.ranks[3] = 1;
  n.tau[3] = rm({{0}, {1}});
  return n;
}

InstanceOptions npc_opts(InstanceKind kind) {
  InstanceOptions o;
  o.kind = kind;
  o.length = kind == InstanceKind::single_degree ? 1 : 3;
  o.max_rank = 3;
  o.max_blocks = 3;
  o.max_torsion = 6;
  o.max_lattice_rank = 2;
  o.balanced = true;
  return o;
}

RatMatrix random_lambda(std::mt19937_64& rng, const NearlyPerfectComplex& n) {
  const auto [rows, cols] = trivialization_shape(n);
  EXPECT_EQ(rows, cols);
  return random_invertible_rational(rng, rows);
}

}  // namespace

TEST(ChiRelNpc, LatticeAgainstCodivisiblePart) {
  const NearlyPerfectComplex n = z_plus_qz();
  const auto blocks = trivialization_layout(n);
  ASSERT_EQ(blocks.size(), 2u);
  EXPECT_EQ(blocks[0].degree, 2);
  EXPECT_EQ(blocks[0].step, 0);
  EXPECT_EQ(blocks[1].degree, 3);
  EXPECT_EQ(blocks[1].step, 1);
  EXPECT_EQ(trivialization_shape(n), std::make_pair(std::size_t{1}, std::size_t{1}));

  const RelativeEuler e = chi_rel_npc(n, rm({{3}}));
  EXPECT_EQ(e.value, Rat(3));
  EXPECT_EQ(e.forgetful, Rat(3));
  EXPECT_EQ(e.rank_image, 0);
  EXPECT_EQ(chi(n), 0);
  EXPECT_TRUE(e.routes_agree());
  EXPECT_EQ(e.per_prime.at(3), 1);
  EXPECT_EQ(chi_rel_npc(n, rm({{Rat(-2, 7)}})).value, Rat(2, 7));
}

TEST(ChiRelNpc, RejectsUnbalancedOrBadShape) {
  NearlyPerfectComplex n;
  n.complex = BoundedComplex::concentrated(0, Z);
  EXPECT_THROW(chi_rel_npc(n, RatMatrix(1, 0)), PreconditionError);
  const NearlyPerfectComplex a = z_plus_qz();
  EXPECT_THROW(chi_rel_npc(a, rm({{1, 0}})), PreconditionError);
  EXPECT_THROW(chi_rel_npc(a, rm({{0}})), PreconditionError);
}

TEST(ChiRelNpc, PerfectInstancesMatchPerfectClass) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 25; ++t) {
    NearlyPerfectComplex n;
    n.complex = random_complex(rng, perfect_opts());
    const RatMatrix lambda = random_lambda(rng, n);
    const RelativeEuler e = chi_rel_npc(n, lambda);
    EXPECT_EQ(e.value, chi_rel_perfect(n.complex, {}, {lambda})) << "trial " << t;
    EXPECT_EQ(e.forgetful, e.value) << "trial " << t;
  }
}

TEST(ChiRelNpc, RandomInstances) {
  std::mt19937_64 rng(43);
  int with_lattice = 0, nontrivial = 0;
  for (InstanceKind kind : {InstanceKind::single_degree, InstanceKind::torsion_free, InstanceKind::nearly_perfect}) {
    for (int t = 0; t < 30; ++t) {
      const NearlyPerfectComplex n = random_npc(rng, npc_opts(kind));
      for (const auto& [i, r] : n.ranks)
        if (r > 0) {
          ++with_lattice;
          break;
        }
      const RatMatrix lambda = random_lambda(rng, n);
      const RatMatrix other = random_lambda(rng, n);
      const RelativeEuler e = chi_rel_npc(n, lambda);
      const RelativeEuler f = chi_rel_npc(n, lambda, other);
      const std::string where = "kind " + std::to_string(int(kind)) + " trial " + std::to_string(t);
      EXPECT_TRUE(e.routes_agree()) << where;
      EXPECT_TRUE(f.routes_agree()) << where;
      EXPECT_EQ(e.value, f.value) << where;
      EXPECT_EQ(e.value, e.forgetful) << where;
      EXPECT_EQ(e.rank_image, chi(n)) << where;
      EXPECT_EQ(assemble(e.per_prime) * e.correction, e.value) << where;
      if (e.value != 1) ++nontrivial;
    }
  }
  EXPECT_GE(with_lattice, 30);
  EXPECT_GE(nontrivial, 45);
}
