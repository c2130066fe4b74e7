#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace mida;
using oracle::market;
using oracle::seller;
using oracle::unit;

namespace {

Market two_by_two() {
    return market(1, {unit({Rational(4)}), unit({Rational(4)})}, {seller(0, {Rational(1)}), seller(0, {Rational(1)})});
}

void expect_sound(const Market& m, const Equilibrium& eq) {
    EXPECT_EQ(oracle::equilibrium_problem(m, eq), "");
    EXPECT_EQ(eq.gain, oracle::optimal_gain(m));
    Rational sum;
    for (const auto& x : eq.gain_per_type) sum += x;
    EXPECT_EQ(sum, eq.gain);
}

}  // namespace

TEST(SolveWalrasian, TwoByTwo) {
    auto m = two_by_two();
    auto eq = solve_walrasian(m);
    EXPECT_EQ(eq.prices[0], Rational(1));
    EXPECT_EQ(eq.per_type_volume, std::vector<int>{2});
    EXPECT_EQ(eq.gain, Rational(6));
    expect_sound(m, eq);
}

TEST(SolveWalrasian, EmptyMarket) {
    Market m;
    m.g = 3;
    auto eq = solve_walrasian(m);
    EXPECT_EQ(eq.prices, PriceVector(3));
    EXPECT_EQ(eq.gain, Rational(0));
}

TEST(SolveWalrasian, NoBuyersGivesZeroPrices) {
    auto m = market(2, {}, {seller(0, {Rational(3)}), seller(1, {Rational(5)})});
    auto eq = solve_walrasian(m);
    EXPECT_EQ(eq.prices, PriceVector(2));
    EXPECT_EQ(eq.gain, Rational(0));
}

TEST(SolveWalrasian, NoSellersPricesOutDemand) {
    auto m = market(2, {unit({Rational(3), Rational(7)})}, {});
    auto eq = solve_walrasian(m);
    expect_sound(m, eq);
    EXPECT_EQ(eq.buyer_bundles[0], Bundle());
    EXPECT_EQ(eq.prices[1], Rational(7));
}

TEST(SolveWalrasian, McAfeeWorstCaseMarket) {
    const int k = 100;
    const Rational eps(1, 1000);
    auto m = mcafee_sbb_market(k, eps);
    auto eq = solve_walrasian(m);
    EXPECT_EQ(eq.per_type_volume, std::vector<int>{k});
    EXPECT_EQ(eq.gain, Rational(k) - Rational(2) * eps);
    EXPECT_EQ(oracle::equilibrium_problem(m, eq), "");
    EXPECT_EQ(eq.prices[0], eps);
}

TEST(SolveWalrasian, SixEightNineWithTwoSellers) {
    Market m = market(2, {}, {seller(0, {Rational(1)}), seller(1, {Rational(1)})});
    m.buyers.push_back({"b", oracle::six_eight_nine()});
    auto eq = solve_walrasian(m);
    EXPECT_EQ(eq.gain, Rational(7));
    EXPECT_EQ(brute_force_optimal_gain(m).gain, Rational(7));
    expect_sound(m, eq);
}

TEST(SolveWalrasian, DemandSupplyScenarioVolumes) {
    for (int k : {2, 3, 10}) {
        auto [m, h] = demand_supply_market(k, 1);
        auto eq = solve_walrasian(m);
        EXPECT_EQ(eq.per_type_volume, (std::vector<int>{2 * k, 2 * k * k}));
        EXPECT_EQ(oracle::equilibrium_problem(m, eq), "");
        auto sets = efficient_trader_sets(m, eq);
        EXPECT_EQ(int(sets.buyers[0].size()), 2 * k);
        EXPECT_EQ(int(sets.sellers[1].size()), 2 * k * k);
    }
}

TEST(SolveWalrasian, HugeValuesAndFractions) {
    Rational huge(BigRational(boost::multiprecision::pow(BigInt(7), 90)));
    auto m = market(2, {unit({huge, Rational(0)}), unit({Rational(5, 3), Rational(7, 2)})},
                    {seller(0, {Rational(6)}), seller(1, {Rational(1, 4), Rational(1, 5)})});
    auto eq = solve_walrasian(m);
    expect_sound(m, eq);
}

TEST(BruteForce, Examples) {
    EXPECT_EQ(brute_force_optimal_gain(two_by_two()).gain, Rational(6));
    auto none = market(1, {unit({Rational(1)})}, {seller(0, {Rational(5)})});
    EXPECT_EQ(brute_force_optimal_gain(none).gain, Rational(0));
    Market big = market(1, {}, {seller(0, std::vector<Rational>(13, Rational(1)))});
    EXPECT_THROW(brute_force_optimal_gain(big), TooLarge);
}

TEST(EfficientTraderSets, TwoByTwoAndNoTrade) {
    auto m = two_by_two();
    auto sets = efficient_trader_sets(m, solve_walrasian(m));
    EXPECT_EQ(sets.buyers[0], (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(sets.sellers[0].size(), 2u);
    auto none = market(1, {unit({Rational(1)})}, {seller(0, {Rational(5)})});
    auto empty = efficient_trader_sets(none, solve_walrasian(none));
    EXPECT_TRUE(empty.buyers[0].empty());
    EXPECT_TRUE(empty.sellers[0].empty());
}

// ---------------------------------------------------------------------------
// Properties over random markets

TEST(Properties, OracleEquivalenceAndEnvyFreeness) {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        int g = int(seed % 3) + 1;
        int m = int(seed / 3 % 3) + 1;
        auto market = oracle::random_small_market(seed, g, 5, 4, m);
        if (market.total_units(0) > 12) continue;
        auto eq = solve_walrasian(market);
        ASSERT_EQ(oracle::equilibrium_problem(market, eq), "") << "seed " << seed;
        ASSERT_EQ(eq.gain, oracle::optimal_gain(market)) << "seed " << seed;
        int units = 0;
        for (const auto& s : market.sellers) units += s.valuation.units();
        if (units <= 12) {
            EXPECT_EQ(eq.gain, brute_force_optimal_gain(market).gain);
        }
        auto sets = efficient_trader_sets(market, eq);
        for (int t = 0; t < g; ++t) {
            EXPECT_EQ(int(sets.buyers[std::size_t(t)].size()), eq.per_type_volume[std::size_t(t)]);
            EXPECT_EQ(int(sets.sellers[std::size_t(t)].size()), eq.per_type_volume[std::size_t(t)]);
        }
        ++checked;
    }
    EXPECT_GT(checked, 300);
}

// Lowering any set of prices by one unit on integer markets loses Walrasian-ness.
TEST(Properties, MinimalPricesOnIntegerMarkets) {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        mida::GeneratorSpec spec;
        spec.g = int(seed % 3) + 1;
        spec.buyers = 1 + int(seed % 5);
        spec.sellers = 1 + int(seed % 4);
        spec.m = 1 + int(seed % 2);
        spec.value_hi = 12;
        spec.family = seed % 2 ? BuyerFamily::TableGS : BuyerFamily::UnitDemand;
        auto m = generate_market(spec, seed);
        auto eq = solve_walrasian(m);
        const Rational opt = eq.gain;
        ASSERT_EQ(oracle::lyapunov(m, eq.prices), opt);
        for (std::uint32_t mask = 1; mask < (1u << m.g); ++mask) {
            PriceVector q = eq.prices;
            bool feasible = true;
            for (int t : Bundle(mask).types()) {
                if (q[t] < Rational(1)) feasible = false;
                else q[t] -= Rational(1);
            }
            if (!feasible) continue;
            EXPECT_GT(oracle::lyapunov(m, q), opt) << "seed " << seed << " mask " << mask;
        }
        // Single coordinates by half a unit as well.
        for (int t = 0; t < m.g; ++t) {
            if (eq.prices[t] < Rational(1, 2)) continue;
            PriceVector q = eq.prices;
            q[t] -= Rational(1, 2);
            EXPECT_GT(oracle::lyapunov(m, q), opt) << "seed " << seed << " type " << t;
        }
    }
}

TEST(Properties, LargeSingleTypeMarketsMatchSortedOracle) {
    // Single-type unit agents: the optimum pairs the highest bids with the lowest asks.
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        mida::GeneratorSpec spec;
        spec.buyers = 300;
        spec.sellers = 300;
        auto m = generate_market(spec, seed);
        std::vector<Rational> bids, asks;
        for (const auto& b : m.buyers) bids.push_back(b.valuation.singleton(0));
        for (const auto& s : m.sellers) asks.push_back(s.valuation.marginals()[0]);
        std::sort(bids.rbegin(), bids.rend());
        std::sort(asks.begin(), asks.end());
        Rational opt;
        for (std::size_t i = 0; i < bids.size() && i < asks.size() && asks[i] < bids[i]; ++i) opt += bids[i] - asks[i];
        auto eq = solve_walrasian(m);
        EXPECT_EQ(eq.gain, opt);
        EXPECT_EQ(oracle::equilibrium_problem(m, eq), "");
    }
}
