#include <gtest/gtest.h>

#include "nearperf/checks.hpp"

using namespace nearperf;

TEST(Checks, SuiteNames) {
  for (std::string_view n : {"linalg", "mixed", "cone", "ladic", "relk", "torsion", "all"}) {
    ASSERT_TRUE(parse_suite(n).has_value()) << n;
    EXPECT_EQ(suite_name(*parse_suite(n)), n);
  }
  EXPECT_FALSE(parse_suite("everything").has_value());
}

TEST(Checks, AllSuitesPass) {
  const auto results = run_checks(Suite::all, 7, 8);
  ASSERT_EQ(results.size(), 6u);
  for (const auto& r : results) {
    EXPECT_EQ(r.cases, 8u);
    for (const auto& p : r.properties) {
      EXPECT_EQ(p.passed, p.cases) << r.suite << "/" << p.name;
      for (const auto& [k, msg] : p.failures) ADD_FAILURE() << r.suite << "/" << p.name << " case " << k << ": " << msg;
    }
    EXPECT_TRUE(r.ok()) << r.suite;
  }
}

TEST(Checks, Deterministic) {
  const auto a = run_checks(Suite::relk, 11, 5), b = run_checks(Suite::relk, 11, 5);
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(a[0].passed, b[0].passed);
  EXPECT_EQ(a[0].properties.size(), b[0].properties.size());
}
