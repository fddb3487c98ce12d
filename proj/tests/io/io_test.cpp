#include <gtest/gtest.h>

#include <random>

#include "io.hpp"
#include "report.hpp"

using namespace nearperf;
using namespace nearperf::io;

namespace {

// Line and column of the ParseError thrown by f.
template <typename F>
std::pair<int, int> error_at(F&& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return {e.line(), e.column()};
  }
  ADD_FAILURE() << "no ParseError";
  return {-1, -1};
}

}  // namespace

TEST(ParseInstance, NamedAndInlineModules) {
  const Instance inst = parse_instance(
      "modules:\n"
      "  M: {free_rank: 1, qz_rank: 1}\n"
      "complex:\n"
      "  min_degree: 3\n"
      "  terms: [M]\n"
      "lattices: {3: 1}\n"
      "tau: {3: [[0], [1]]}\n");
  EXPECT_EQ(inst.npc.complex.lo(), 3);
  EXPECT_EQ(inst.npc.complex.term(3), MixedModule(1, {}, 0, 1));
  EXPECT_EQ(inst.npc.rank(3), 1u);
  EXPECT_EQ(inst.npc.tau_matrix(3), RatMatrix({{0}, {1}}));
  EXPECT_FALSE(inst.action.has_value());
}

TEST(ParseInstance, DifferentialsWithFractions) {
  const Instance inst = parse_instance(
      "complex:\n"
      "  terms: [{free_rank: 1}, {q_rank: 1}]\n"
      "  differentials: [[[\"1/2\"]]]\n");
  EXPECT_EQ(inst.npc.complex.differential(0).matrix(), RatMatrix({{Rat(1, 2)}}));
}

TEST(ParseInstance, TorsionIsNormalized) {
  const Instance inst = parse_instance("complex:\n  terms: [{torsion: [4, 6]}]\n");
  EXPECT_EQ(inst.npc.complex.term(0).torsion(), IntVector({2, 12}));
}

TEST(ParseInstance, PositionedErrors) {
  EXPECT_EQ(error_at([] { parse_instance("complex:\n  terms:\n    - {free_rank: one}\n"); }), std::make_pair(3, 19));
  EXPECT_EQ(error_at([] { parse_instance("complex:\n  terms: [X]\n"); }), std::make_pair(2, 11));
  EXPECT_EQ(error_at([] { parse_instance("complex:\n  terms: [{free_rank: 1}]\ncolour: red\n"); }),
            std::make_pair(3, 1));
  // d^0 must be 1 x 1.
  EXPECT_EQ(error_at([] {
              parse_instance("complex:\n  terms: [{free_rank: 1}, {free_rank: 1}]\n  differentials: [[[1, 2]]]\n");
            }).first,
            3);
  // A homomorphism ℚ → ℤ does not exist.
  EXPECT_EQ(error_at([] {
              parse_instance("complex:\n  terms: [{q_rank: 1}, {free_rank: 1}]\n  differentials:\n    - [[1]]\n");
            }).first,
            4);
  EXPECT_EQ(error_at([] { parse_instance("complex: [unclosed\n"); }).first, 2);
  EXPECT_THROW(parse_instance(""), ParseError);
  EXPECT_THROW(parse_instance("complex:\n  terms: [{torsion: [1]}]\n"), ParseError);
  EXPECT_THROW(parse_instance("complex:\n  terms: [{qz_rank: 1}]\nlattices: {0: 1}\n"), ParseError);
  EXPECT_THROW(load_instance("/nonexistent/instance.yaml"), ParseError);
}

TEST(ParseTrivialization, Shapes) {
  const Trivialization t = parse_trivialization("lambda: [[3, \"-1/2\"], [0, 1]]\nlambda_tilde: [[1, 0], [0, 1]]\n");
  EXPECT_EQ(t.lambda, RatMatrix({{3, Rat(-1, 2)}, {0, 1}}));
  ASSERT_TRUE(t.lambda_tilde.has_value());
  EXPECT_EQ(parse_trivialization("lambda: []\n").lambda.rows(), 0u);
  EXPECT_EQ(error_at([] { parse_trivialization("lambda: [[1, 2], [3]]\n"); }), std::make_pair(1, 18));
}

TEST(Rationals, RoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<long> num(-1000000, 1000000), den(1, 1000000);
  for (int k = 0; k < 500; ++k) {
    Rat q(num(rng), den(rng));
    q.canonicalize();
    EXPECT_EQ(parse_rational(format_rational(q)), q);
  }
  EXPECT_EQ(format_rational(Rat(6, 4)), "3/2");
  EXPECT_EQ(format_rational(Rat(-5)), "-5");
  EXPECT_THROW(parse_rational("1/0"), ParseError);
  EXPECT_THROW(parse_rational("0.5"), ParseError);
}

TEST(Report, DeterministicAndComplete) {
  const Instance inst = parse_instance(
      "complex:\n  min_degree: 3\n  terms: [{free_rank: 1, qz_rank: 1}]\nlattices: {3: 1}\ntau: {3: [[0], [1]]}\n");
  const Trivialization t = parse_trivialization("lambda: [[3]]\n");
  const ReportData a = compute_report(inst, "anchor", {2, 3}, t);
  const ReportData b = compute_report(inst, "anchor", {2, 3}, t);
  EXPECT_EQ(render(a), render(b));
  EXPECT_TRUE(violated(a).empty());
  const std::string text = render(a);
  EXPECT_NE(text.find("chi: 0"), std::string::npos);
  EXPECT_NE(text.find("num: 3"), std::string::npos);
  EXPECT_NE(text.find("routes_agree: true"), std::string::npos);
  EXPECT_EQ(text.find("seconds"), std::string::npos);
}

TEST(Report, InvalidInstanceStopsEarly) {
  const Instance inst = parse_instance("complex:\n  terms: [{qz_rank: 1}]\n");
  const ReportData r = compute_report(inst, "bad", {2}, std::nullopt);
  EXPECT_FALSE(r.validation.valid());
  EXPECT_FALSE(r.chi.has_value());
  EXPECT_NE(render(r).find("valid: false"), std::string::npos);
}
