#include <gtest/gtest.h>

#include <random>

#include "nearperf/linalg.hpp"
#include "nearperf/relk.hpp"
#include "support/test_util.hpp"

using namespace nearperf;

namespace {

RatMatrix rm(std::initializer_list<std::initializer_list<Rat>> v) { return RatMatrix(v); }

const MixedModule Z = MixedModule::free(1);

Rat frac(long n, long d) {
  Rat q(n, d);
  q.canonicalize();
  return q;
}

RatMatrix random_invertible(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<long> num(-6, 6), den(1, 4);
  for (;;) {
    RatMatrix g(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) g(i, j) = frac(num(rng), den(rng));
    if (n == 0 || determinant(g) != 0) return g;
  }
}

IntVector random_torsion(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(0, 2), order(2, 12);
  IntVector t;
  for (int i = count(rng); i > 0; --i) t.push_back(order(rng));
  return MixedModule::finite(t).torsion();
}

// A homomorphism with h⊗ℚ = n·g and random torsion components.
ModuleHom random_lift(std::mt19937_64& rng, const TripleClass& t, const Int& n) {
  std::uniform_int_distribution<long> ent(-5, 5);
  RatMatrix h(t.b.dim(), t.a.dim());
  h.set_block(0, 0, Rat(n) * t.g);
  for (std::size_t i = t.b.free_rank(); i < t.b.dim(); ++i) {
    const Int& m = t.b.order_at(i);
    for (std::size_t j = 0; j < t.a.dim(); ++j) {
      Int step = 1;
      if (j >= t.a.free_rank()) step = m / gcd(m, t.a.order_at(j));
      h(i, j) = Rat(step * ent(rng));
    }
  }
  return ModuleHom(t.a, t.b, h);
}

}  // namespace

TEST(G0Class, Examples) {
  EXPECT_EQ(g0_class({Z, rm({{2}}), Z}), 2);
  EXPECT_EQ(g0_class({Z, rm({{Rat(2, 3)}}), Z}), Rat(2, 3));
  const MixedModule a(2, {4}, 0, 0);
  EXPECT_EQ(g0_class({a, RatMatrix::identity(2), a}), 1);
  // Torsion of the source counts negatively, of the target positively.
  EXPECT_EQ(g0_class({MixedModule(1, {2}, 0, 0), rm({{1}}), Z}), Rat(1, 2));
  EXPECT_EQ(g0_class({Z, rm({{1}}), MixedModule(1, {3}, 0, 0)}), 3);
  EXPECT_EQ(g0_class({MixedModule::finite({6}), RatMatrix(), MixedModule()}), Rat(1, 6));
}

TEST(G0Class, RejectsSingular) {
  EXPECT_THROW(g0_class({MixedModule::free(2), rm({{1, 2}, {2, 4}}), MixedModule::free(2)}), PreconditionError);
  EXPECT_THROW(g0_class({MixedModule::free(2), rm({{1, 0}}), Z}), PreconditionError);
}

TEST(G0Class, IndependentOfLift) {
  std::mt19937_64 rng(0x30);
  std::uniform_int_distribution<int> rank(0, 2);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t r = rank(rng);
    const TripleClass t{MixedModule(r, random_torsion(rng), 0, 0), random_invertible(rng, r),
                        MixedModule(r, random_torsion(rng), 0, 0)};
    const PosRational v = g0_class(t);
    const Int den = common_denominator(t.g);
    for (int k = 1; k <= 5; ++k) {
      const Int n = den * k;
      EXPECT_EQ(g0_class_with(t, random_lift(rng, t, n), n), v) << "trial " << trial << " k " << k;
    }
  }
}

TEST(G0Class, CompositionIsMultiplicative) {
  std::mt19937_64 rng(0x31);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t r = trial % 3;
    const MixedModule a(r, random_torsion(rng), 0, 0), b(r, random_torsion(rng), 0, 0),
        c(r, random_torsion(rng), 0, 0);
    const RatMatrix g = random_invertible(rng, r), h = random_invertible(rng, r);
    EXPECT_EQ(g0_class({a, h * g, c}), g0_class({a, g, b}) * g0_class({b, h, c}));
  }
}

TEST(G0Class, ShortExactSequencesAreMultiplicative) {
  // 0 → ℤ^r →M→ ℤ^r → coker M → 0 on both sides, g' = N⁻¹ g M.
  std::mt19937_64 rng(0x32);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t r = 1 + trial % 3;
    RatMatrix m, n;
    do m = to_rat(testutil::random_int_matrix(rng, r, r, 3));
    while (determinant(m) == 0);
    do n = to_rat(testutil::random_int_matrix(rng, r, r, 3));
    while (determinant(n) == 0);
    const RatMatrix g = random_invertible(rng, r);
    const RatMatrix g_sub = inverse(n) * g * m;
    const MixedModule a2 = cokernel(ModuleHom(MixedModule::free(r), MixedModule::free(r), m)).module;
    const MixedModule b2 = cokernel(ModuleHom(MixedModule::free(r), MixedModule::free(r), n)).module;
    const MixedModule fr = MixedModule::free(r);
    EXPECT_EQ(g0_class({fr, g, fr}), g0_class({fr, g_sub, fr}) * g0_class({a2, RatMatrix(), b2}));
  }
}

TEST(K0Class, Examples) {
  const MixedModule z2 = MixedModule::free(2);
  EXPECT_EQ(k0_class({z2, rm({{Rat(1, 2), 0}, {0, 3}}), z2}), Rat(3, 2));
  EXPECT_EQ(k0_class({z2, RatMatrix::identity(2), z2}), 1);
  EXPECT_EQ(k0_class({MixedModule(), RatMatrix(), MixedModule()}), 1);
  EXPECT_THROW(k0_class({z2, rm({{1, 0}}), Z}), PreconditionError);
  EXPECT_THROW(k0_class({MixedModule::finite({2}), RatMatrix(), MixedModule()}), PreconditionError);
}

TEST(K0Class, CompositionAndAgreementWithG0) {
  std::mt19937_64 rng(0x40);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t r = trial % 4;
    const MixedModule f = MixedModule::free(r);
    const RatMatrix g = random_invertible(rng, r), h = random_invertible(rng, r);
    EXPECT_EQ(k0_class({f, h * g, f}), k0_class({f, g, f}) * k0_class({f, h, f}));
    EXPECT_EQ(k0_class({f, g, f}), g0_class({f, g, f}));
  }
}

TEST(FiniteModuleClass, Examples) {
  EXPECT_EQ(finite_module_class(MixedModule::finite({6})), 6);
  EXPECT_EQ(finite_module_class(MixedModule()), 1);
  EXPECT_EQ(finite_module_class(MixedModule::finite({2, 4})), 8);
  EXPECT_THROW(finite_module_class(Z), PreconditionError);
}

TEST(FiniteModuleClass, TripleRoundtrip) {
  std::mt19937_64 rng(0x41);
  for (int trial = 0; trial < 20; ++trial) {
    const MixedModule m = MixedModule::finite(random_torsion(rng));
    EXPECT_EQ(g0_class({MixedModule(), RatMatrix(), m}), finite_module_class(m));
    EXPECT_EQ(g0_class({m, RatMatrix(), MixedModule()}), 1 / finite_module_class(m));
  }
}

TEST(Boundary, Examples) {
  EXPECT_EQ(boundary(Rat(-5)), 5);
  EXPECT_EQ(boundary(Rat(1)), 1);
  EXPECT_EQ(boundary(Rat(-1)), 1);
  EXPECT_EQ(boundary(rm({{2, 0}, {0, 3}})), 6);
  EXPECT_EQ(boundary(Rat(-5)), k0_class({Z, rm({{-5}}), Z}));
  EXPECT_THROW(boundary(Rat(0)), PreconditionError);
  EXPECT_THROW(boundary(rm({{1, 1}, {1, 1}})), PreconditionError);
}

TEST(LocalComponents, Examples) {
  EXPECT_EQ(localize(Rat(12), 2), 2);
  EXPECT_EQ(localize(Rat(12), 3), 1);
  EXPECT_EQ(localize(Rat(12), 5), 0);
  EXPECT_TRUE(local_components(Rat(1)).empty());
  EXPECT_EQ(assemble({{2, -1}, {5, 2}}), Rat(25, 2));
  EXPECT_EQ(local_components(Rat(25, 2)), (LocalValuationVector{{2, -1}, {5, 2}}));
}

TEST(LocalComponents, AssembleRoundtrip) {
  std::mt19937_64 rng(0x42);
  std::uniform_int_distribution<long> num(1, 5000);
  for (int trial = 0; trial < 200; ++trial) {
    const Rat q = frac(num(rng), num(rng));
    EXPECT_EQ(assemble(local_components(q)), q);
  }
}
