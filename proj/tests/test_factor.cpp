#include <gtest/gtest.h>

#include <cmath>

#include "bubblemarket/factor.hpp"

namespace bm = bubblemarket;

namespace {

constexpr int T = 15;
const bm::AssetSpec kAsset1 = bm::speculative_asset(4.0, 0.85, 0.01);
const bm::AssetSpec kAsset2 = bm::value_asset(2.0, 0.85);

}  // namespace

TEST(FactorCounts, DirectionalMajorityUndervaluesAssetTwo) {
    const auto c = bm::factor_asset2_counts({50, 45, 5}, 0.4, 0.5);
    EXPECT_DOUBLE_EQ(c.demand, 46.0);
    EXPECT_DOUBLE_EQ(c.supply, 54.0);
    EXPECT_NEAR(c.imbalance(), 46.0 / 54.0 - 1.0, 1e-15);
    EXPECT_NEAR(c.imbalance(), -0.1481, 1e-4);
}

TEST(FactorCounts, CountsAddUpToPopulation) {
    for (double pi1 : {0.1, 0.37, 0.5, 0.8})
        for (double pi2 : {0.2, 0.5}) {
            const auto c = bm::factor_asset2_counts({30, 50, 20}, pi1, pi2);
            EXPECT_NEAR(c.demand + c.supply, 100.0, 1e-12);
        }
}

TEST(FactorCounts, SwappingDirectionalAndMarketNeutralInvertsRatio) {
    for (double pi1 : {0.2, 0.4, 0.45}) {
        const auto a = bm::factor_asset2_counts({50, 45, 5}, pi1, 0.5);
        const auto b = bm::factor_asset2_counts({50, 5, 45}, pi1, 0.5);
        EXPECT_NEAR(a.demand / a.supply, b.supply / b.demand, 1e-15);
    }
}

TEST(FactorPricePaths, BalancedFactorsKeepAssetTwoAtItsQuote) {
    for (int j : {0, 10, 25}) {
        const auto r = bm::factor_price_paths(kAsset1, bm::value_asset(3.0, 0.6), {100 - 2 * j, j, j}, T);
        for (std::size_t t = 0; t < r.path_2.size(); ++t) {
            const auto& p = r.path_2.periods[t];
            EXPECT_EQ(p.imbalance, 0.0);
            EXPECT_EQ(p.price, p.quote);
            EXPECT_EQ(p.bid, p.quote);
            EXPECT_EQ(p.ask, p.quote);
            EXPECT_TRUE(r.equilibrium_2[t]);
        }
    }
}

TEST(FactorPricePaths, NoWeakForesightPutsBothAssetsInEquilibrium) {
    for (int jmn : {0, 5, 20, 45}) {
        const auto r = bm::factor_price_paths(bm::speculative_asset(4.0, 0.85), kAsset2, {50, 50 - jmn, jmn}, T);
        for (std::size_t t = 0; t < r.path_1.size(); ++t) {
            EXPECT_TRUE(r.equilibrium_1[t]);
            EXPECT_TRUE(r.equilibrium_2[t]);
        }
        EXPECT_LT(std::abs(r.path_2.rd), 1e-12);
    }
}

TEST(FactorPricePaths, AssetTwoFollowsImbalanceFormula) {
    const bm::FactorPopulation pop{50, 45, 5};
    const auto r = bm::factor_price_paths(kAsset1, kAsset2, pop, T);
    double prev = 2.80;
    for (const auto& p : r.path_2.periods) {
        const double pi1 = bm::buyer_probability(0.01, p.t);
        const double b = 0.5 * 50 + 45 * pi1 + 5 * (1 - pi1);
        const double a = 0.5 * 50 + 45 * (1 - pi1) + 5 * pi1;
        const double q = bm::noise_quote_mean(kAsset2, 2.80, prev);
        EXPECT_NEAR(p.quote, q, 1e-12);
        EXPECT_NEAR(p.imbalance, b / a - 1, 1e-12);
        EXPECT_NEAR(p.price, q + b / a - 1, 1e-12);
        EXPECT_NEAR(p.bid, b / a * q, 1e-12);
        EXPECT_NEAR(p.ask, a / b * q, 1e-12);
        prev = p.price;
    }
    EXPECT_LT(r.path_2.rd, 0.0);
}

TEST(FactorPricePaths, AssetOneIgnoresTheTraderSplit) {
    const auto base = bm::factor_price_paths(kAsset1, kAsset2, {50, 45, 5}, T);
    for (bm::FactorPopulation pop : {bm::FactorPopulation{50, 5, 45}, bm::FactorPopulation{100, 0, 0},
                                     bm::FactorPopulation{1, 2, 97}}) {
        const auto r = bm::factor_price_paths(kAsset1, kAsset2, pop, T);
        for (std::size_t t = 0; t < r.path_1.size(); ++t) {
            EXPECT_EQ(r.path_1.periods[t].price, base.path_1.periods[t].price);
            EXPECT_EQ(r.path_1.periods[t].bid, base.path_1.periods[t].bid);
        }
        EXPECT_EQ(r.path_1.rd, base.path_1.rd);
    }
}

TEST(FactorPricePaths, AssetTwoNoiseMustSplitEvenly) {
    EXPECT_THROW(bm::factor_price_paths(kAsset1, bm::value_asset(2.0, 0.85, 0.01), {50, 45, 5}, T), bm::ConfigError);
    EXPECT_THROW(bm::factor_price_paths(kAsset1, kAsset2, {0, 0, 0}, T), bm::ConfigError);
    EXPECT_THROW(bm::factor_price_paths(kAsset1, kAsset2, {50, 45, 5}, T, 1.0), bm::ConfigError);
}

TEST(CheckEquilibrium, Examples) {
    auto f = bm::check_equilibrium_conditions({50, 45, 5}, 0.5, 0.5);
    EXPECT_TRUE(f.asset1);
    EXPECT_TRUE(f.asset2);
    f = bm::check_equilibrium_conditions({50, 25, 25}, 0.4, 0.5);
    EXPECT_FALSE(f.asset1);
    EXPECT_TRUE(f.asset2);
    f = bm::check_equilibrium_conditions({50, 45, 5}, 0.4, 0.5);
    EXPECT_FALSE(f.asset1);
    EXPECT_FALSE(f.asset2);
    f = bm::check_equilibrium_conditions({50, 25, 25}, 0.5, 0.4);
    EXPECT_FALSE(f.asset2);
}

TEST(CheckEquilibrium, AgreesWithPrevailingPrices) {
    const auto q = 2.8;
    for (int jd = 0; jd <= 50; jd += 5)
        for (double pi1 : {0.3, 0.45, 0.5}) {
            const bm::FactorPopulation pop{50, jd, 50 - jd};
            const auto c = bm::factor_asset2_counts(pop, pi1, 0.5);
            const double bid = bm::prevailing_price(q, c.demand, c.supply);
            const double ask = bm::prevailing_price(q, c.supply, c.demand);
            EXPECT_EQ(bm::check_equilibrium_conditions(pop, pi1, 0.5).asset2, bid == ask)
                << "J_D=" << jd << " pi1=" << pi1;
        }
}

TEST(FactorRdSurface, DiagonalAndBalancedColumn) {
    const bm::FactorGrid grid{{0.3, 0.4, 0.5, 0.6}, {0, 10, 25, 40, 50}, 50, 100};
    const auto s = bm::factor_rd_surface(bm::speculative_asset(4.0, 0.85), kAsset2, T, grid);
    ASSERT_EQ(s.cells.size(), 20u);
    EXPECT_EQ(s.flagged(), 0u);
    for (const auto& c : s.cells) {
        if (c.coords[1] == 25.0) {
            EXPECT_LT(std::abs(c.values[1]), 1e-12);
        }
        if (c.coords[0] == 0.5) {
            EXPECT_LT(std::abs(c.values[1]), 1e-12);
        }
    }
    // RD_1 is constant along each pi_1 row
    for (std::size_t row = 0; row < 4; ++row)
        for (std::size_t col = 1; col < 5; ++col)
            EXPECT_EQ(s.cells[row * 5 + col].values[0], s.cells[row * 5].values[0]);
}

TEST(FactorRdSurface, InfeasibleCellsAreFlagged) {
    const bm::FactorGrid grid{{0.4}, {10, 60, 2.5}, 50, 100};
    const auto s = bm::factor_rd_surface(kAsset1, kAsset2, T, grid);
    EXPECT_TRUE(s.cells[0].ok());
    EXPECT_FALSE(s.cells[1].ok());
    EXPECT_FALSE(s.cells[2].ok());
}
