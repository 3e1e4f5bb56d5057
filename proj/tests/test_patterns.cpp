#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <vector>

#include "adamflow/errors.hpp"
#include "adamflow/patterns.hpp"

namespace adamflow {
namespace {

BigRational q(long num, long den) { return BigRational(num, den); }

TEST(Rationalize, ExactAndApproximate) {
    const auto half = rationalize(0.5);
    EXPECT_EQ(half.num, 1);
    EXPECT_EQ(half.den, 2);
    EXPECT_TRUE(half.exact);

    const auto neg = rationalize(-2.25);
    EXPECT_EQ(neg.num, -9);
    EXPECT_EQ(neg.den, 4);
    EXPECT_TRUE(neg.exact);

    // 0.1 and 1/3 are not representable, but the obvious fractions round
    // back to the same doubles, which is what exact means here.
    const auto tenth = rationalize(0.1);
    EXPECT_EQ(tenth.num, 1);
    EXPECT_EQ(tenth.den, 10);
    EXPECT_TRUE(tenth.exact);

    const auto third = rationalize(1.0 / 3.0);
    EXPECT_EQ(third.num, 1);
    EXPECT_EQ(third.den, 3);
    EXPECT_TRUE(third.exact);

    // No fraction with denominator <= 1000 reproduces pi's double.
    const auto irr = rationalize(3.14159265358979312, 1000);
    EXPECT_EQ(irr.num, 355);
    EXPECT_EQ(irr.den, 113);
    EXPECT_FALSE(irr.exact);

    const auto whole = rationalize(42.0);
    EXPECT_EQ(whole.num, 42);
    EXPECT_EQ(whole.den, 1);
    EXPECT_TRUE(whole.exact);
}

TEST(Combinatorics, BinomialAndCapacity) {
    EXPECT_EQ(binomial(10, 3), BigInt(120));
    EXPECT_EQ(binomial(5, 0), BigInt(1));
    EXPECT_EQ(binomial(5, 5), BigInt(1));
    EXPECT_EQ(binomial(4, 7), BigInt(0));
    EXPECT_EQ(pattern_capacity(3, 4), BigInt(15));  // C(6, 2)
    EXPECT_EQ(pattern_capacity(2, 1), BigInt(2));
}

TEST(ZeroSum, HandExamples) {
    EXPECT_EQ(zero_sum_probability(make_pattern_problem(2, 2, {q(1, 1), q(-1, 1)})), q(1, 2));
    EXPECT_EQ(zero_sum_probability(make_pattern_problem(2, 3, {q(1, 1), q(1, 1)})), q(0, 1));
    EXPECT_EQ(zero_sum_probability(make_pattern_problem(2, 1, {q(1, 1), q(0, 1)})), q(1, 2));
}

TEST(ZeroSum, ScalingAndPermutationInvariance) {
    const auto base = zero_sum_probability(make_pattern_problem(3, 4, {q(1, 1), q(-1, 1), q(2, 1)}));
    const auto scaled =
        zero_sum_probability(make_pattern_problem(3, 4, {q(5, 1), q(-5, 1), q(10, 1)}));
    const auto permuted =
        zero_sum_probability(make_pattern_problem(3, 4, {q(2, 1), q(1, 1), q(-1, 1)}));
    EXPECT_EQ(base, scaled);
    EXPECT_EQ(base, permuted);
}

TEST(ZeroSum, DoubleEntriesAreRationalized) {
    const auto a = zero_sum_probability(make_pattern_problem(2, 2, Vec{0.5, -0.5}));
    EXPECT_EQ(a, q(1, 2));
}

TEST(ZeroSum, CapacityGuard) {
    std::vector<BigRational> z(40, q(1, 1));
    z[0] = q(-39, 1);
    EXPECT_THROW(zero_sum_probability(make_pattern_problem(40, 40, z)), CapacityError);
}

TEST(BoundCheck, TwoTwoHandExample) {
    const auto rep = combinatoric_bound_check(2, 2);
    EXPECT_EQ(rep.bound_exact, q(5, 8));
    EXPECT_DOUBLE_EQ(rep.bound, 0.625);
    EXPECT_EQ(rep.max_prob, q(1, 2));
    EXPECT_TRUE(rep.pass);
    EXPECT_TRUE(rep.grid_certificate_only);
    ASSERT_FALSE(rep.rows.empty());
    for (const auto& row : rep.rows) ASSERT_TRUE(row.pass);
    // The maximizer is the balanced sign pattern.
    const auto& zmax = rep.rows[rep.argmax].z;
    EXPECT_EQ(std::abs(zmax[0]), 1);
    EXPECT_EQ(std::abs(zmax[1]), 1);
    EXPECT_EQ(zmax[0] + zmax[1], 0);
}

TEST(BoundCheck, SingletonAlphabet) {
    const auto rep = combinatoric_bound_check(1, 3);
    EXPECT_EQ(rep.bound_exact, q(1, 2));
    EXPECT_EQ(rep.max_prob, q(0, 1));
    EXPECT_TRUE(rep.pass);
}

TEST(SmallQ, MeanOnePatternHasUnitMargin) {
    const auto problem = make_pattern_problem(2, 2, {q(1, 2), q(1, 2)});
    const auto rep = small_q_margin(problem, {0.0, 0.4, 0.5, 1.0});
    EXPECT_EQ(rep.prob_at_zero, q(0, 1));
    ASSERT_EQ(rep.probs.size(), 4u);
    EXPECT_EQ(rep.probs[0], q(0, 1));  // |sum| = 1 always, threshold 0
    EXPECT_EQ(rep.probs[1], q(0, 1));  // threshold 0.8 < 1
    EXPECT_EQ(rep.probs[2], q(1, 1));  // threshold 1.0 reached
    EXPECT_EQ(rep.probs[3], q(1, 1));
    ASSERT_TRUE(rep.has_q0);
    EXPECT_EQ(rep.q0, q(1, 2));  // min positive |<c, x>| / M
}

TEST(SmallQ, MatchesZeroSumAtZeroThreshold) {
    const auto problem = make_pattern_problem(2, 1, {q(1, 1), q(0, 1)});
    const auto rep = small_q_margin(problem, {0.0});
    EXPECT_EQ(rep.prob_at_zero, q(1, 2));
    EXPECT_EQ(rep.probs[0], q(1, 2));
}

TEST(Reciprocal, ConstantMagnitudeIsDeterministic) {
    TwoPointSpec spec;
    spec.z_small = 1.0;
    spec.z_large = 1.0;
    spec.prob_small = 0.5;
    const auto rep = reciprocal_moment_bound_check(0.81, 1.0, 0.0, spec, 200, 100, 7);
    // v = 1 - beta^K exactly, so the estimate is deterministic and just above 1.
    EXPECT_NEAR(rep.estimate, 1.0, 1e-4);
    EXPECT_EQ(rep.std_error, 0.0);
    EXPECT_TRUE(rep.pass);
    // Lemma bound at q = 0 collapses to (1 - beta)^{-1/2}.
    EXPECT_NEAR(rep.bound, 1.0 / std::sqrt(0.19), 1e-12);
}

TEST(Reciprocal, BoundValuesForListedConfigs) {
    TwoPointSpec unit;
    unit.z_small = 1.0;
    unit.z_large = 1.0;
    unit.prob_small = 0.5;
    const auto a = reciprocal_moment_bound_check(0.999, 1.0, 0.0, unit, 100, 10, 1);
    EXPECT_NEAR(a.bound, 31.6228, 1e-3);

    TwoPointSpec mixed;
    mixed.z_small = 0.1;
    mixed.z_large = 2.0;
    mixed.prob_small = 0.5;
    const auto c = reciprocal_moment_bound_check(0.81, 1.0, 0.5, mixed, 100, 10, 1);
    EXPECT_NEAR(c.bound, 2.58092, 1e-4);
}

TEST(Reciprocal, DomainAndValidation) {
    TwoPointSpec spec;
    spec.z_small = 1.0;
    spec.z_large = 1.0;
    spec.prob_small = 0.5;
    // q must stay below sqrt(beta).
    EXPECT_THROW(reciprocal_moment_bound_check(0.81, 1.0, 0.95, spec, 100, 10, 1), DomainError);
    // A small magnitude below sqrt(delta) needs prob_small <= q.
    TwoPointSpec bad;
    bad.z_small = 0.1;
    bad.z_large = 2.0;
    bad.prob_small = 0.6;
    EXPECT_THROW(reciprocal_moment_bound_check(0.81, 1.0, 0.5, bad, 100, 10, 1), ValidationError);
}

TEST(ReportCsv, SchemaHeader) {
    const auto rep = combinatoric_bound_check(2, 1);
    std::ostringstream out;
    write_combinatoric_csv(rep, out);
    std::string header;
    std::istringstream in(out.str());
    std::getline(in, header);
    EXPECT_EQ(header, "n,m,pattern,prob_num,prob_den,bound,pass");
}

}  // namespace
}  // namespace adamflow
