#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <sstream>
#include <vector>

#include "adamflow/coupling.hpp"
#include "adamflow/errors.hpp"
#include "adamflow/flow.hpp"
#include "adamflow/innovation.hpp"
#include "adamflow/schedule.hpp"
#include "adamflow/vec.hpp"

namespace adamflow {
namespace {

TEST(ErrorSeries, TwoBlockHandExample) {
    const auto sched = StepSchedule::power(1.0, 0.5, 2);
    const auto part = build_rho_partition(sched, 1.0, 0);
    ASSERT_EQ(part.block_count(), 2u);
    const auto series = error_series(sched, part);
    EXPECT_NEAR(series.total2, 1.5, 1e-12);
    EXPECT_NEAR(series.total3, 1.7071067811865475, 1e-12);
    EXPECT_NEAR(series.total4, 1.7071067811865475, 1e-12);
    EXPECT_NEAR(series.s2[0], 1.0, 1e-15);
    EXPECT_NEAR(series.s2[1], 0.5, 1e-12);
    EXPECT_DOUBLE_EQ(series.s3[0], sched.gamma(1));
    EXPECT_DOUBLE_EQ(series.s3[1], sched.gamma(2));
}

TEST(ErrorSeries, SingleBlockSquaredLength) {
    const auto sched = StepSchedule::explicit_list({0.2, 0.2});
    const auto part = build_rho_partition(sched, 1.0, 0);
    ASSERT_EQ(part.block_count(), 1u);  // budget 0.2^{1/3} = 0.585 holds both steps
    const auto series = error_series(sched, part);
    EXPECT_NEAR(series.s2[0], 0.16, 1e-15);
    EXPECT_DOUBLE_EQ(series.s4[0], std::sqrt(0.08));
}

IntermediateRun quadratic_run(double beta, std::uint64_t horizon, double rho,
                              std::uint64_t start) {
    auto obj = std::make_shared<QuadraticObjective>(Vec{1.0}, Vec{0.0});
    auto model = make_deterministic_gradient(obj);
    const auto sched = StepSchedule::power(0.1, 0.7, horizon);
    const DampingParams p(0.9, beta, 0.5);
    const auto part = build_rho_partition(sched, rho, start);
    return run_intermediates(*model, sched, p, part, Vec{1.5}, 42);
}

TEST(Intermediates, ZeroModelKeepsAllPathsConstant) {
    auto model = make_two_point(Vec{0.0}, Vec{0.0}, 0.5);
    const auto sched = StepSchedule::power(0.5, 0.6, 60);
    const DampingParams p(0.9, 0.99, 1.0);
    const auto part = build_rho_partition(sched, 1.0, 0);
    const auto run = run_intermediates(*model, sched, p, part, Vec{0.7}, 1);
    for (std::size_t i = 0; i < run.rows(); ++i) {
        ASSERT_DOUBLE_EQ(run.row(run.theta, i)[0], 0.7);
        ASSERT_DOUBLE_EQ(run.row(run.path_g, i)[0], 0.7);
        ASSERT_DOUBLE_EQ(run.row(run.path_f, i)[0], 0.7);
        ASSERT_DOUBLE_EQ(run.row(run.path_s, i)[0], 0.7);
    }
    const auto errs = error_decomposition(run, 0);
    EXPECT_EQ(errs.e1, 0.0);
    EXPECT_EQ(errs.e2, 0.0);
    EXPECT_EQ(errs.e3, 0.0);
    EXPECT_FALSE(errs.field_available);
    EXPECT_TRUE(std::isnan(errs.e4));
    EXPECT_TRUE(std::isnan(errs.e5));
}

TEST(Intermediates, DeterministicModelHasExactlyZeroE3) {
    const auto run = quadratic_run(0.99, 400, 0.8, 0);
    bool some_e2_positive = false;
    for (std::size_t j = 0; j < run.partition.block_count(); ++j) {
        const auto errs = error_decomposition(run, j);
        ASSERT_EQ(errs.e3, 0.0) << "block " << j;
        some_e2_positive = some_e2_positive || errs.e2 > 0.0;
    }
    EXPECT_TRUE(some_e2_positive);
}

TEST(Intermediates, FirstBlockFromStartHasZeroE3ForAnyModel) {
    // With no pre-block history the shadow stream is never consulted, so the
    // frozen and shadow paths coincide on the first block exactly.
    auto model = make_two_point(Vec{1.0}, Vec{-1.0}, 0.7);
    const auto sched = StepSchedule::power(0.5, 0.6, 200);
    const DampingParams p(0.9, 0.99, 1.0);
    const auto part = build_rho_partition(sched, 1.0, 0);
    const auto run = run_intermediates(*model, sched, p, part, Vec{0.0}, 9);
    EXPECT_EQ(error_decomposition(run, 0).e3, 0.0);
    bool later_e3_positive = false;
    for (std::size_t j = 1; j < run.partition.block_count(); ++j)
        later_e3_positive = later_e3_positive || error_decomposition(run, j).e3 > 0.0;
    EXPECT_TRUE(later_e3_positive);
}

TEST(Intermediates, BiasGapShrinksAcrossBlocks) {
    const auto run = quadratic_run(0.95, 400, 0.8, 0);
    std::vector<double> e1;
    for (std::size_t j = 0; j < run.partition.block_count(); ++j)
        e1.push_back(error_decomposition(run, j).e1);
    ASSERT_GE(e1.size(), 4u);
    // The second-moment bias correction factor decays like beta^n.
    EXPECT_LT(e1[2], e1[0]);
    EXPECT_LT(e1[3], e1[1]);
}

TEST(Intermediates, ReplayIsBitIdentical) {
    auto model = make_two_point(Vec{1.0, 0.3}, Vec{-1.0, -0.3}, 0.4);
    const auto sched = StepSchedule::power(0.4, 0.6, 150);
    const DampingParams p(0.9, 0.99, 0.7);
    const auto part = build_rho_partition(sched, 1.0, 0);
    const auto a = run_intermediates(*model, sched, p, part, Vec{0.1, 0.1}, 17);
    const auto b = run_intermediates(*model, sched, p, part, Vec{0.1, 0.1}, 17);
    EXPECT_EQ(a.theta, b.theta);
    EXPECT_EQ(a.path_g, b.path_g);
    EXPECT_EQ(a.path_f, b.path_f);
    EXPECT_EQ(a.path_s, b.path_s);
}

TEST(Intermediates, FieldEnablesE4AndE5) {
    auto obj = std::make_shared<QuadraticObjective>(Vec{1.0});
    auto model = make_deterministic_gradient(obj);
    const auto sched = StepSchedule::power(0.1, 0.7, 200);
    const DampingParams p(0.9, 0.99, 0.5);
    const auto part = build_rho_partition(sched, 0.8, 0);
    const auto run = run_intermediates(*model, sched, p, part, Vec{1.5}, 42);
    const auto field = FieldFn::from_objective(obj, p);
    const auto errs = error_decomposition(run, 1, &field);
    EXPECT_TRUE(errs.field_available);
    EXPECT_TRUE(std::isfinite(errs.e4));
    EXPECT_TRUE(std::isfinite(errs.e5));
    EXPECT_GE(errs.e4, 0.0);
    EXPECT_GE(errs.e5, 0.0);
    EXPECT_THROW(error_decomposition(run, run.partition.block_count()), OutOfRangeError);
}

TEST(Intermediates, RowLookup) {
    const auto run = quadratic_run(0.99, 100, 0.8, 5);
    EXPECT_EQ(run.start_n, 5u);
    EXPECT_EQ(run.row_of(5), 0u);
    EXPECT_THROW(run.row_of(4), OutOfRangeError);
    EXPECT_THROW(run.row_of(run.partition.indices.back() + 1), OutOfRangeError);
}

TEST(BlockMean, FrozenIdentityWithinFourSigma) {
    auto model = make_two_point(Vec{1.0}, Vec{-1.0}, 0.75);
    const auto sched = StepSchedule::power(0.3, 0.6, 1200);
    const DampingParams p(0.9, 0.9, 1.0);
    const auto check = block_mean_check(*model, sched, p, 1000, 1030, Vec{0.4}, 2000, 0, 21);
    EXPECT_EQ(check.n_replicates, 2000u);
    EXPECT_LE(check.max_sigmas, 4.0);
    EXPECT_GT(check.target_se[0], 0.0);
}

TEST(Growth, WeightedNormStaysBounded) {
    auto obj = std::make_shared<QuadraticObjective>(Vec{1.0});
    auto model = make_gaussian_gradient(obj, 0.5);
    const auto sched = StepSchedule::power(0.3, 0.7, 900);
    const DampingParams p(0.9, 0.9, 1.0);
    const auto rep = growth_bound_report(*model, sched, p, Vec{1.0}, {50, 200, 800}, 10.0, 2.0,
                                         0, 40, 3);
    ASSERT_EQ(rep.anchors.size(), 3u);
    for (const auto& a : rep.anchors) {
        ASSERT_TRUE(std::isfinite(a.estimate));
        ASSERT_GT(a.estimate, 0.0);
        ASSERT_LE(a.gated_out, 40u);
    }
    // Bounded, not growing: the late anchor stays within 3x the first.
    EXPECT_LT(rep.anchors[2].estimate, 3.0 * rep.anchors[0].estimate + 1.0);
}

TEST(BlockErrorsCsv, HeaderMatchesSchema) {
    const auto run = quadratic_run(0.99, 200, 0.8, 0);
    std::vector<BlockErrors> blocks;
    for (std::size_t j = 0; j < run.partition.block_count(); ++j)
        blocks.push_back(error_decomposition(run, j));
    const auto sched = StepSchedule::power(0.1, 0.7, 200);
    const auto series = error_series(sched, run.partition);
    std::ostringstream out;
    write_block_errors_csv(blocks, series, out);
    std::string header;
    std::istringstream in(out.str());
    std::getline(in, header);
    EXPECT_EQ(header, "j,n_lo,n_hi,e1,e2,e3,e4,e5,s2,s3,s4");
}

}  // namespace
}  // namespace adamflow
