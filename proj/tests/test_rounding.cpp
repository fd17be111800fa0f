#include <gtest/gtest.h>

#include <random>

#include <sqrtvote/io.hpp>
#include <sqrtvote/rounding_opt.hpp>

#include "oracle.hpp"

using namespace sqrtvote;

TEST(Rounding, Example1PrefersFourDigits) {
    // Four digits reproduce the exact weights; ties go to the smaller k.
    const auto a = io::fixture("example1")->assembly();
    const auto sweep = optimize_rounding(a, 6);
    ASSERT_EQ(sweep.rows.size(), 7u);
    EXPECT_FALSE(sweep.exact_row().digits.has_value());
    EXPECT_EQ(sweep.best_row().digits, 4);
    EXPECT_NEAR(sweep.best_row().sigma_min, 0.031053, 5e-7);
    EXPECT_EQ(sweep.rows[2].digits, 3);
    EXPECT_NEAR(sweep.rows[2].sigma_min, 0.061200, 5e-7);
    EXPECT_EQ(sweep.rows[3].sigma_min, sweep.exact_row().sigma_min);
}

TEST(Rounding, Example2ThreeDigitsBeatExact) {
    const auto a = io::fixture("example2")->assembly();
    const auto sweep = optimize_rounding(a, 5);
    EXPECT_EQ(sweep.best_row().digits, 3);
    EXPECT_NEAR(sweep.best_row().sigma_min, 0.031004, 5e-7);
    EXPECT_NEAR(sweep.exact_row().sigma_min, 0.061093, 5e-7);
}

TEST(Rounding, RejectsBadRange) {
    const auto a = io::fixture("example1")->assembly();
    EXPECT_THROW(optimize_rounding(a, 0), Error);
    EXPECT_THROW(optimize_rounding(a, 16), Error);
}

TEST(Rounding, CallbackSeesEveryRow) {
    const auto a = io::fixture("example1")->assembly();
    RoundingOptions o;
    int seen = 0;
    o.on_row = [&](const RoundingSweepRow&) { ++seen; };
    const auto sweep = optimize_rounding(a, 3, o);
    EXPECT_EQ(seen, static_cast<int>(sweep.rows.size()));
}

// Invariants of the sweep on arbitrary user data.
TEST(Rounding, InvariantsOnRandomDatasets) {
    std::mt19937_64 rng(404);
    for (int t = 0; t < 25; ++t) {
        const auto n = 2 + rng() % 10;
        const auto a = oracle::random_assembly(rng, n);
        const auto ideal = ideal_shares(a);
        RoundingOptions o;
        if (rng() % 2) o.member_quota = 1 + static_cast<int>(rng() % n);
        const auto sweep = optimize_rounding(a, 6, o);
        for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
            const auto& row = sweep.rows[i];
            EXPECT_GE(row.sigma_min, sweep.best_row().sigma_min);
            if (i < sweep.best) {
                EXPECT_GT(row.sigma_min, sweep.best_row().sigma_min);
            }
            EXPECT_EQ(oracle::sigma({row.swings.eta().begin(), row.swings.eta().end()}, ideal), row.sigma_min);
            EXPECT_DOUBLE_EQ(row.efficiency, std::ldexp(static_cast<double>(row.swings.omega()), -static_cast<int>(n)));
            for (const auto& iv : row.intervals) {
                EXPECT_GE(iv.lo, 0.5);
                EXPECT_LE(iv.hi, 1.0);
                EXPECT_LT(iv.lo, iv.hi);
            }
            // Brute force at an interior point of the canonical interval.
            const auto& iv = row.canonical();
            oracle::Swings want;
            if (row.digits) {
                const auto scheme = round_scheme(ideal, *row.digits);
                want = oracle::quota_swings_units({scheme.units().begin(), scheme.units().end()}, iv.hi_units,
                                                  o.member_quota.value_or(0));
            } else {
                want = oracle::quota_swings_real(ideal, 0.5 * (iv.lo + iv.hi), o.member_quota.value_or(0));
            }
            EXPECT_EQ(row.swings.omega(), want.omega);
            EXPECT_EQ(std::vector<std::uint64_t>(row.swings.eta().begin(), row.swings.eta().end()), want.eta);
        }
    }
}
