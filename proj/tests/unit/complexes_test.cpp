#include <gtest/gtest.h>

#include "nearperf/complexes.hpp"

using namespace nearperf;

namespace {

RatMatrix rm(std::initializer_list<std::initializer_list<Rat>> v) { return RatMatrix(v); }

const MixedModule Z = MixedModule::free(1);
const MixedModule Q = MixedModule::rational(1);
const MixedModule QZ = MixedModule::rational_mod_one(1);

BoundedComplex two_term(int lo, const MixedModule& a, const MixedModule& b, const RatMatrix& d) {
  return BoundedComplex(lo, {a, b}, {ModuleHom(a, b, d)});
}

}  // namespace

TEST(Cohomology, Examples) {
  auto c = two_term(0, Z, Z, rm({{2}}));
  auto h = cohomology(c);
  EXPECT_TRUE(h.at(0).module.is_zero());
  EXPECT_EQ(h.at(1).module, MixedModule(0, {2}, 0, 0));
  EXPECT_TRUE(cohomology(BoundedComplex()).is_acyclic());
  auto q = cohomology(BoundedComplex::concentrated(0, QZ));
  EXPECT_EQ(q.at(0).module, QZ);
  EXPECT_EQ(q.at(0).divisible().module, QZ);
}

TEST(Cohomology, ShortExactCocycleSequence) {
  auto c = two_term(0, MixedModule(1, {}, 1, 0), Q, rm({{1, 1}}));  // (n, q) ↦ n + q
  auto g = cohomology_at(c, 0);
  EXPECT_EQ(g.module, Z);
  auto proj = g.cocycle_projection();
  EXPECT_TRUE(is_surjective(proj));
  EXPECT_TRUE(kernel(proj).module.is_zero());  // B^0 = 0
}

TEST(Cone, Examples) {
  auto c = two_term(0, Z, Z, rm({{3}}));
  EXPECT_TRUE(is_acyclic(cone(ChainMap::identity(c)).complex));

  // zero map: cohomology is a direct sum
  auto a = BoundedComplex::concentrated(1, MixedModule(0, {2}, 0, 0));
  ChainMap zero(a, c, {});
  auto k = cone(zero);
  EXPECT_EQ(cohomology_at(k.complex, 0).module, MixedModule(0, {2}, 0, 0));
  EXPECT_EQ(cohomology_at(k.complex, 1).module, MixedModule(0, {3}, 0, 0));

  // ℤ →×2→ ℤ concentrated in degree 0
  auto z0 = BoundedComplex::concentrated(0, Z);
  ChainMap two(z0, z0, {{0, ModuleHom(Z, Z, rm({{2}}))}});
  auto k2 = cone(two);
  EXPECT_TRUE(cohomology_at(k2.complex, -1).module.is_zero());
  EXPECT_EQ(cohomology_at(k2.complex, 0).module, MixedModule(0, {2}, 0, 0));
  EXPECT_FALSE(is_quasi_iso(two));
}

TEST(QuasiIso, Examples) {
  auto c = two_term(0, Z, Z, rm({{2}}));
  EXPECT_TRUE(is_quasi_iso(ChainMap::identity(c)));
  EXPECT_FALSE(is_quasi_iso(ChainMap(BoundedComplex(), c, {})));
  auto qqz = two_term(0, Q, QZ, rm({{1}}));
  auto z0 = BoundedComplex::concentrated(0, Z);
  ChainMap inc(z0, qqz, {{0, ModuleHom(Z, Q, rm({{1}}))}});
  EXPECT_TRUE(is_quasi_iso(inc));
}

TEST(PerfectReplacement, Examples) {
  auto c = two_term(0, Z, Z, rm({{3}}));
  auto r = perfect_replacement(c);
  EXPECT_EQ(r.complex.term(0), Z);
  EXPECT_EQ(euler_rank(r.complex), 0);

  auto qqz = two_term(0, Q, QZ, rm({{1}}));
  auto p = perfect_replacement(qqz);
  EXPECT_TRUE(is_quasi_iso(p.map));
  EXPECT_EQ(euler_rank(p.complex), 1);
  EXPECT_EQ(cohomology_at(p.complex, 0).module, Z);

  // H^0 = ℤ/3 from [ℚ/ℤ →×3→ ℚ/ℤ]
  auto t = two_term(0, QZ, QZ, rm({{3}}));
  auto pt = perfect_replacement(t);
  EXPECT_TRUE(is_quasi_iso(pt.map));
  EXPECT_EQ(euler_rank(pt.complex), 0);
  EXPECT_EQ(cohomology_at(pt.complex, 0).module, MixedModule(0, {3}, 0, 0));

  EXPECT_THROW(perfect_replacement(BoundedComplex::concentrated(0, QZ)), PreconditionError);
}

TEST(Lift, Examples) {
  auto qqz = two_term(0, Q, QZ, rm({{1}}));
  auto z0 = BoundedComplex::concentrated(0, Z);
  ChainMap inc(z0, qqz, {{0, ModuleHom(Z, Q, rm({{1}}))}});
  auto l = lift_through_quasi_iso(inc, inc);
  EXPECT_EQ(l.h.component(0), ModuleHom::identity(Z));

  auto c = two_term(0, Z, Z, rm({{3}}));
  auto id = ChainMap::identity(c);
  auto l2 = lift_through_quasi_iso(id, id);
  for (int i = 0; i <= 1; ++i) EXPECT_EQ(l2.h.component(i), ModuleHom::identity(Z));
}

TEST(EulerRank, Examples) {
  EXPECT_EQ(euler_rank(two_term(0, Z, Z, rm({{3}}))), 0);
  EXPECT_EQ(euler_rank(BoundedComplex::concentrated(2, MixedModule::free(2))), 2);
  EXPECT_EQ(euler_rank(two_term(4, Z, Z, rm({{1}}))), 0);
}
