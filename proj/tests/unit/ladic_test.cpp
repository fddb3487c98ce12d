#include <gtest/gtest.h>

#include <random>

#include "nearperf/ladic.hpp"
#include "oracle/finite_cohomology.hpp"

using namespace nearperf;

namespace {

RatMatrix rm(std::initializer_list<std::initializer_list<Rat>> v) { return RatMatrix(v); }

const MixedModule Z = MixedModule::free(1);
const MixedModule Q = MixedModule::rational(1);
const MixedModule QZ = MixedModule::rational_mod_one(1);
const std::vector<Int> kPrimes = {2, 3, 5, 7};

BoundedComplex two_term(int lo, const MixedModule& a, const MixedModule& b, const RatMatrix& d) {
  return BoundedComplex(lo, {a, b}, {ModuleHom(a, b, d)});
}

NearlyPerfectComplex qz_in_degree_3() {
  NearlyPerfectComplex n;
  n.complex = BoundedComplex::concentrated(3, QZ);
  n.ranks[3] = 1;
  n.tau[3] = rm({{1}});
  return n;
}

NearlyPerfectComplex z_to_q() {
  NearlyPerfectComplex n;
  n.complex = two_term(2, Z, Q, rm({{1}}));
  n.ranks[3] = 1;
  n.tau[3] = rm({{1}});
  return n;
}

NearlyPerfectComplex anchor() {
  NearlyPerfectComplex n;
  n.complex = BoundedComplex::concentrated(3, MixedModule(1, {}, 0, 1));
  n.ranks[3] = 1;
  n.tau[3] = rm({{0}, {1}});
  return n;
}

NearlyPerfectComplex qz_pair(const RatMatrix& tau) {
  NearlyPerfectComplex n;
  n.complex = BoundedComplex::concentrated(3, MixedModule::rational_mod_one(2));
  n.ranks[3] = 2;
  n.tau[3] = tau;
  return n;
}

// Random d : ℤ^a ⊕ ℚ^b → ℤ^c ⊕ ℚ^e; the ℚ → ℤ block is zero.
BoundedComplex random_torsion_free(std::mt19937_64& rng, int lo) {
  std::uniform_int_distribution<int> dim(0, 2), ent(-4, 4);
  const std::size_t a = dim(rng), b = dim(rng), c = dim(rng), e = dim(rng);
  const MixedModule src(a, {}, b, 0), tgt(c, {}, e, 0);
  RatMatrix d(c + e, a + b);
  for (std::size_t i = 0; i < c + e; ++i)
    for (std::size_t j = 0; j < a + b; ++j)
      if (!(i < c && j >= a)) d(i, j) = ent(rng);
  return two_term(lo, src, tgt, d);
}

// P ⊕ [ℤ →1→ ℤ] in the two degrees of a two-term P, with the inclusion of P.
ChainMap add_acyclic(const BoundedComplex& p) {
  const int lo = p.lo();
  const MixedModule& s = p.term(lo);
  const MixedModule& t = p.term(lo + 1);
  const MixedModule s2(s.free_rank() + 1, {}, s.q_rank(), 0), t2(t.free_rank() + 1, {}, t.q_rank(), 0);
  auto embed = [](const MixedModule& m) {
    RatMatrix e(m.dim() + 1, m.dim());
    for (std::size_t j = 0; j < m.dim(); ++j) e(j < m.free_rank() ? j : j + 1, j) = 1;
    return e;
  };
  const RatMatrix es = embed(s), et = embed(t);
  RatMatrix d = et * p.differential(lo).matrix() * es.transpose();
  d(t.free_rank(), s.free_rank()) = 1;
  const BoundedComplex big = two_term(lo, s2, t2, d);
  return ChainMap(p, big, {{lo, ModuleHom(s, s2, es)}, {lo + 1, ModuleHom(t, t2, et)}});
}

oracle::SmallGrid small(const RatMatrix& m, std::size_t rows, std::size_t cols) {
  oracle::SmallGrid g(rows, std::vector<long>(cols, 0));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) g[i][j] = m(i, j).get_num().get_si();
  return g;
}

}  // namespace

TEST(CompleteComplex, MultiplicationBySix) {
  const BoundedComplex c = two_term(0, Z, Z, rm({{6}}));
  const LAdicComplex c2 = complete_complex(c, 2);
  EXPECT_EQ(c2.term(0), (LAdicModule{2, 1, {}}));
  EXPECT_EQ(c2.cohomology(0), (LAdicModule{2, 0, {}}));
  EXPECT_EQ(c2.cohomology(1), (LAdicModule{2, 0, {1}}));
  EXPECT_EQ(complete_complex(c, 3).cohomology(1), (LAdicModule{3, 0, {1}}));
  EXPECT_EQ(complete_complex(c, 5).cohomology(1), (LAdicModule{5, 0, {}}));
}

TEST(CompleteComplex, RationalTermsVanish) {
  const BoundedComplex c = two_term(0, MixedModule::rational(2), MixedModule(0, {}, 1, 1), rm({{1, 2}, {0, 1}}));
  const LAdicComplex hat = complete_complex(c, 3);
  EXPECT_EQ(hat.model.term(0).dim(), 0u);
  EXPECT_EQ(hat.model.term(1).dim(), 0u);
  EXPECT_EQ(hat.euler_rank(), 0);
}

TEST(CompleteComplex, PerfectKeepsRanks) {
  const BoundedComplex c = two_term(-1, MixedModule::free(3), MixedModule::free(2), rm({{1, 2, 3}, {4, 5, 6}}));
  for (const auto& l : kPrimes) {
    const LAdicComplex hat = complete_complex(c, l);
    EXPECT_EQ(hat.term(-1).free_rank, 3u);
    EXPECT_EQ(hat.term(0).free_rank, 2u);
    EXPECT_EQ(hat.euler_rank(), euler_rank(c));
  }
}

TEST(CompleteComplex, FiniteTermsKeepTheirPrimaryPart) {
  const MixedModule m = MixedModule::finite({12, 5});  // ℤ/60
  const LAdicComplex hat = complete_complex(BoundedComplex::concentrated(0, m), 2);
  EXPECT_EQ(hat.term(0), (LAdicModule{2, 0, {2}}));
  EXPECT_EQ(complete_complex(BoundedComplex::concentrated(0, m), 7).term(0), (LAdicModule{7, 0, {}}));
}

TEST(CompleteComplex, RejectsComposite) {
  EXPECT_THROW(complete_complex(BoundedComplex::concentrated(0, Z), 6), PreconditionError);
}

TEST(CompleteMap, MultiplicationIsFunctorial) {
  // (2, 1) : [ℤ →4→ ℤ] → [ℤ →2→ ℤ]
  const BoundedComplex a = two_term(0, Z, Z, rm({{4}})), b = two_term(0, Z, Z, rm({{2}}));
  const ChainMap f(a, b, {{0, ModuleHom(Z, Z, rm({{2}}))}, {1, ModuleHom(Z, Z, rm({{1}}))}});
  const ChainMap g(b, b, {{0, ModuleHom(Z, Z, rm({{3}}))}, {1, ModuleHom(Z, Z, rm({{3}}))}});
  for (const auto& l : kPrimes) {
    const LAdicChainMap gf = complete_map(g * f, l);
    const ChainMap composed = complete_map(g, l).model * complete_map(f, l).model;
    for (int i = 0; i <= 1; ++i) EXPECT_EQ(gf.model.component(i), composed.component(i));
  }
  EXPECT_FALSE(is_quasi_iso(complete_map(f, 2)));
  EXPECT_TRUE(is_quasi_iso(complete_map(f, 3)));
  EXPECT_TRUE(is_quasi_iso(complete_map(g, 2)));
  const ChainMap two(b, b, {{0, ModuleHom(Z, Z, rm({{2}}))}, {1, ModuleHom(Z, Z, rm({{2}}))}});
  EXPECT_FALSE(is_quasi_iso(complete_map(two, 2)));
  EXPECT_TRUE(is_quasi_iso(complete_map(two, 3)));
}

TEST(CompleteMap, RandomQuasiIsomorphismsStayQuasiIsomorphisms) {
  std::mt19937_64 rng(0x1ad1c);
  for (int trial = 0; trial < 40; ++trial) {
    const BoundedComplex p = random_torsion_free(rng, trial % 3 - 1);
    const ChainMap f = add_acyclic(p);
    ASSERT_TRUE(is_quasi_iso(f));
    for (const auto& l : kPrimes) EXPECT_TRUE(is_quasi_iso(complete_map(f, l))) << "trial " << trial;
  }
}

TEST(CompletionSequence, SquareOfThePrime) {
  for (const auto& l : kPrimes) {
    const BoundedComplex p = two_term(0, Z, Z, rm({{Rat(l * l)}}));
    const CompletionWitness w = completion_sequence(p, l, 1);
    EXPECT_TRUE(w.exact());
    EXPECT_EQ(w.left, (LAdicModule{l, 0, {2}}));
    EXPECT_EQ(w.centre, (LAdicModule{l, 0, {2}}));
    EXPECT_EQ(w.right, (LAdicModule{l, 0, {}}));
    EXPECT_EQ(w.levels.size(), 4u);
  }
}

TEST(CompletionSequence, DivisibleCohomologyGivesTateModule) {
  const BoundedComplex p = two_term(0, Z, Q, rm({{1}}));
  for (const auto& l : kPrimes) {
    const CompletionWitness w = completion_sequence(p, l, 0);
    EXPECT_TRUE(w.exact());
    EXPECT_EQ(w.left, (LAdicModule{l, 0, {}}));
    EXPECT_EQ(w.centre, (LAdicModule{l, 1, {}}));
    EXPECT_EQ(w.right, (LAdicModule{l, 1, {}}));
    EXPECT_TRUE(w.right_is_tate_module);
  }
}

TEST(CompletionSequence, PerfectWithFreeCohomology) {
  const BoundedComplex p = two_term(0, MixedModule::free(2), Z, rm({{1, 0}}));
  const CompletionWitness w = completion_sequence(p, 5, 0);
  EXPECT_TRUE(w.exact());
  EXPECT_TRUE(is_isomorphism(w.f));
  EXPECT_EQ(w.right, (LAdicModule{5, 0, {}}));
}

TEST(CompletionSequence, RejectsTorsionTerms) {
  EXPECT_THROW(completion_sequence(BoundedComplex::concentrated(0, QZ), 2, -1), PreconditionError);
  EXPECT_THROW(completion_sequence(BoundedComplex::concentrated(0, MixedModule::finite({4})), 2, 0), PreconditionError);
}

TEST(CompletionSequence, RandomComplexesAreExact) {
  std::mt19937_64 rng(0x22);
  for (int trial = 0; trial < 60; ++trial) {
    const BoundedComplex p = random_torsion_free(rng, 0);
    for (const auto& l : {Int(2), Int(3)})
      for (int i = -1; i <= 1; ++i) {
        const CompletionWitness w = completion_sequence(p, l, i);
        EXPECT_TRUE(w.exact()) << "trial " << trial << " l " << l << " degree " << i;
      }
  }
}

TEST(CompletionSequence, FiniteLevelsMatchEnumeration) {
  std::mt19937_64 rng(0xe7);
  for (int trial = 0; trial < 30; ++trial) {
    const BoundedComplex p = random_torsion_free(rng, 0);
    const std::size_t a = p.term(0).free_rank(), c = p.term(1).free_rank();
    const RatMatrix d = p.differential(0).matrix().block(0, 0, c, a);
    for (const auto& l : {Int(2), Int(3)}) {
      const CompletionWitness w0 = completion_sequence(p, l, 0, 2);
      const CompletionWitness w1 = completion_sequence(p, l, 1, 2);
      for (long n = 1; n <= 2; ++n) {
        const long ln = l.get_si() == 2 ? (1L << n) : (n == 1 ? 3 : 9);
        const auto h0 = oracle::middle_cohomology_order(small(RatMatrix(a, 0), a, 0), small(d, c, a), 0, a, ln);
        const auto h1 = oracle::middle_cohomology_order(small(d, c, a), small(RatMatrix(0, c), 0, c), a, c, ln);
        EXPECT_EQ(w0.levels[n - 1].direct, Int(static_cast<unsigned long>(h0)));
        EXPECT_EQ(w1.levels[n - 1].direct, Int(static_cast<unsigned long>(h1)));
        EXPECT_TRUE(w0.levels[n - 1].agrees());
        EXPECT_TRUE(w1.levels[n - 1].agrees());
      }
    }
  }
}

TEST(CompletionSequence, Naturality) {
  const BoundedComplex a = two_term(0, Z, Z, rm({{4}})), b = two_term(0, Z, Z, rm({{2}}));
  const ChainMap f(a, b, {{0, ModuleHom(Z, Z, rm({{2}}))}, {1, ModuleHom(Z, Z, rm({{1}}))}});
  for (int i = 0; i <= 1; ++i) EXPECT_TRUE(completion_naturality(f, 2, i).commutes);

  const BoundedComplex c = two_term(0, Z, Q, rm({{1}})), e = two_term(0, Z, Q, rm({{2}}));
  const ChainMap g(c, e, {{0, ModuleHom(Z, Z, rm({{1}}))}, {1, ModuleHom(Q, Q, rm({{2}}))}});
  const CompletionSequenceMap m = completion_naturality(g, 3, 0);
  EXPECT_TRUE(m.commutes);
  EXPECT_FALSE(m.right.is_zero());

  std::mt19937_64 rng(0x9a7);
  for (int trial = 0; trial < 30; ++trial) {
    const ChainMap h = add_acyclic(random_torsion_free(rng, 0));
    for (int i = -1; i <= 1; ++i) EXPECT_TRUE(completion_naturality(h, 2, i).commutes) << "trial " << trial;
  }
}

TEST(TorsionFreeReplacement, DivisibleAndFiniteCohomology) {
  const BoundedComplex c = BoundedComplex::concentrated(3, MixedModule(1, {6}, 0, 2));
  const Replacement t = torsion_free_replacement(c);
  EXPECT_TRUE(t.complex.is_torsion_free());
  EXPECT_TRUE(is_quasi_iso(t.map));
  EXPECT_EQ(t.complex.term(2), MixedModule(3, {}, 0, 0));
  EXPECT_EQ(t.complex.term(3), MixedModule(2, {}, 2, 0));

  const BoundedComplex tf = two_term(0, Z, Q, rm({{1}}));
  EXPECT_EQ(torsion_free_replacement(tf).complex.term(1), Q);
}

TEST(ChiL, Examples) {
  for (const auto& l : kPrimes) {
    EXPECT_EQ(chi_l(qz_in_degree_3(), l), 1);
    EXPECT_EQ(chi_l(z_to_q(), l), 1);
    EXPECT_EQ(chi_l(anchor(), l), 0);
    EXPECT_EQ(chi_l(NearlyPerfectComplex{}, l), 0);
  }
}

TEST(ChiL, AgreesWithChi) {
  std::vector<NearlyPerfectComplex> cases = {qz_in_degree_3(), z_to_q(), anchor(), qz_pair(rm({{1, 1}, {0, 1}}))};
  NearlyPerfectComplex f;
  f.complex = two_term(-2, MixedModule(2, {}, 0, 0), MixedModule(1, {4}, 0, 1), rm({{2, 0}, {1, 1}, {0, 0}}));
  f.ranks[-1] = 1;
  f.tau[-1] = rm({{0}, {0}, {1}});
  cases.push_back(f);
  for (const auto& n : cases) {
    ASSERT_TRUE(validate(n).valid()) << validate(n).to_string();
    for (const auto& l : kPrimes) EXPECT_EQ(chi_l(n, l), chi(n));
  }
}

TEST(SnakeSign, SingleDivisibleSummand) {
  const SnakeCheck s = snake_sign_check(qz_in_degree_3(), 2, 3, 2);
  EXPECT_EQ(s.modulus, 8);
  EXPECT_EQ(s.endomorphism, IntMatrix({{7}}));
  EXPECT_TRUE(s.is_minus_identity());
}

TEST(SnakeSign, Examples) {
  for (const auto& l : kPrimes)
    for (long k = 1; k <= 3; ++k) {
      EXPECT_TRUE(snake_sign_check(z_to_q(), l, k, 2).is_minus_identity());
      EXPECT_TRUE(snake_sign_check(anchor(), l, k, 2).is_minus_identity());
      const SnakeCheck pair = snake_sign_check(qz_pair(rm({{1, 1}, {0, 1}})), l, k, 2);
      EXPECT_EQ(pair.endomorphism.rows(), 2u);
      EXPECT_TRUE(pair.is_minus_identity());
    }
}

TEST(SnakeSign, VacuousWithoutLattice) {
  const SnakeCheck s = snake_sign_check(qz_in_degree_3(), 3, 2, 5);
  EXPECT_EQ(s.endomorphism.rows(), 0u);
  EXPECT_TRUE(s.is_minus_identity());
}
