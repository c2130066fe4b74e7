#include "oracles.hpp"

#include <gtest/gtest.h>

#include <atomic>

using namespace mida;
using oracle::market;
using oracle::seller;
using oracle::unit;

TEST(ParallelFor, VisitsEveryIndexAndRethrowsLowest) {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(100, [&](std::size_t i) { ++hits[i]; }, 4);
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
    try {
        parallel_for(
            50,
            [](std::size_t i) {
                if (i == 7 || i == 31) throw std::runtime_error(std::to_string(i));
            },
            3);
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "7");
    }
}

TEST(CompetitiveRatio, TwoAgentMarketNeverTrades) {
    // One buyer and one seller: whichever way the coins fall, some half is empty.
    auto m = market(1, {unit({Rational(5)})}, {seller(0, {Rational(1)})});
    auto r = estimate_competitive_ratio("two-agent", m, 50, 1);
    EXPECT_EQ(r.mean_ratio, Rational(0));
    for (const auto& t : r.per_trial) {
        EXPECT_TRUE(t.degenerate_R || t.degenerate_L);
        EXPECT_EQ(t.gft_opt, Rational(4));
    }
    EXPECT_EQ(r.failed_trials, 0);
}

TEST(CompetitiveRatio, NoTradeMarketHasRatioOne) {
    auto m = market(1, {unit({Rational(1)})}, {seller(0, {Rational(5)})});
    EXPECT_EQ(estimate_competitive_ratio("none", m, 5, 1).mean_ratio, Rational(1));
    EXPECT_EQ(trial_ratio(Rational(0), Rational(0)), Rational(1));
    EXPECT_THROW(estimate_competitive_ratio("none", m, 0, 1), InvalidSpec);
}

TEST(CompetitiveRatio, DeterministicAcrossThreadCounts) {
    GeneratorSpec spec;
    spec.g = 2;
    spec.buyers = 40;
    spec.sellers = 40;
    spec.m = 2;
    spec.family = BuyerFamily::TableGS;
    auto m = generate_market(spec, 17);
    ExperimentOptions one, many;
    one.threads = 1;
    many.threads = 4;
    auto a = estimate_competitive_ratio("x", m, 40, 100, one);
    auto b = estimate_competitive_ratio("x", m, 40, 100, many);
    EXPECT_EQ(a.mean_ratio, b.mean_ratio);
    ASSERT_EQ(a.per_trial.size(), b.per_trial.size());
    for (std::size_t i = 0; i < a.per_trial.size(); ++i) {
        EXPECT_EQ(a.per_trial[i].seed, 100 + i);
        EXPECT_EQ(a.per_trial[i].gft_mida, b.per_trial[i].gft_mida);
        EXPECT_EQ(a.per_trial[i].deals_lost, b.per_trial[i].deals_lost);
        EXPECT_EQ(a.per_trial[i].clearing_violations, b.per_trial[i].clearing_violations);
    }
    EXPECT_GT(a.mean_ratio, Rational(0));
    EXPECT_LE(a.mean_ratio, Rational(1));
    EXPECT_LE(a.min_ratio, a.mean_ratio);
    EXPECT_EQ(a.ddf_failures, 0);
}

TEST(CompetitiveRatio, MeanIsExactAverage) {
    GeneratorSpec spec;
    spec.buyers = 20;
    spec.sellers = 20;
    auto m = generate_market(spec, 2);
    auto r = estimate_competitive_ratio("avg", m, 25, 9);
    Rational sum;
    for (const auto& t : r.per_trial) sum += t.ratio;
    EXPECT_EQ(r.mean_ratio, sum / Rational(25));
}

TEST(Scaling, SmallRun) {
    GeneratorSpec spec;
    auto s = scaling_experiment(spec, {10, 40}, 30, 1);
    ASSERT_EQ(s.rows.size(), 2u);
    EXPECT_EQ(s.rows[0].k, 10);
    for (const auto& row : s.rows) {
        EXPECT_GT(row.mean_ratio, Rational(0));
        EXPECT_LE(row.mean_ratio, Rational(1));
    }
    EXPECT_GE(s.fitted_a, 0.0);
}

TEST(Deviations, GridsRespectTheValuationClass) {
    DeviationGrid grid;
    SellerValuation s(ItemType{0}, {Rational(5), Rational(3)});
    auto sd = seller_deviations(s, grid);
    EXPECT_FALSE(sd.empty());
    for (const auto& d : sd) {
        EXPECT_TRUE(is_dmr(d));
        for (const auto& v : d.marginals()) EXPECT_GE(v.sign(), 0);
        EXPECT_FALSE(d == s);
    }
    auto bd = buyer_deviations(oracle::six_eight_nine(), grid);
    EXPECT_FALSE(bd.empty());
    for (const auto& b : bd) EXPECT_TRUE(is_gross_substitute(b));
    auto ud = buyer_deviations(BuyerValuation::unit_demand({Rational(3)}), grid);
    // 3 + {1, 2, 5, 10}, 3 - {1, 2}, and 0.
    EXPECT_EQ(ud.size(), 7u);
}

TEST(Deviations, AllLotteriesCount) {
    auto m = market(2, {unit({Rational(1), Rational(1)}), unit({Rational(1), Rational(1)}), unit({Rational(1), Rational(1)})},
                    {seller(0, {Rational(0)}), seller(0, {Rational(0)}), seller(1, {Rational(0)})});
    auto ls = detail::all_lotteries(m, Halving::all(m, Half::R), Half::R);
    EXPECT_EQ(ls.size(), 6u * 2u * 1u);
    EXPECT_EQ(detail::all_lotteries(m, Halving::all(m, Half::R), Half::L).size(), 1u);
}

TEST(Deviations, MidaAndMcAfeeAreTruthfulOnSmallMarkets) {
    DeviationGrid grid;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        Rng rng = Rng::stream(seed, "truthful");
        std::vector<Rational> bids, asks;
        for (int i = 0; i < 2; ++i) bids.emplace_back(rng.uniform(0, 10));
        for (int i = 0; i < 2; ++i) asks.emplace_back(rng.uniform(0, 10));
        auto m = single_unit_market(bids, asks);
        for (std::size_t i = 0; i < 2; ++i)
            for (Role role : {Role::Buyer, Role::Seller}) {
                AgentRef a{role, i};
                EXPECT_FALSE(find_profitable_deviation(m, a, grid, DeviationSearch::of(MechanismKind::Mida))) << seed;
                EXPECT_FALSE(find_profitable_deviation(m, a, grid, DeviationSearch::of(MechanismKind::McAfee))) << seed;
            }
    }
}

TEST(Deviations, NaiveKeepOthersIsManipulable) {
    auto m = naive_multiunit_market();
    auto d = find_profitable_deviation(m, {Role::Seller, 0}, DeviationGrid{}, DeviationSearch::of(MechanismKind::NaiveKeepOthers));
    ASSERT_TRUE(d);
    EXPECT_GT(d->delta(), Rational(0));
    EXPECT_EQ(d->truthful_gain, Rational(4));
}

TEST(Deviations, BudgetAndAgentLimits) {
    DeviationGrid tiny;
    tiny.budget = 3;
    auto m = single_unit_market({Rational(5), Rational(6)}, {Rational(1), Rational(2)});
    EXPECT_THROW(find_profitable_deviation(m, {Role::Buyer, 0}, tiny), GridTooLarge);
    std::vector<Rational> many(11, Rational(3));
    auto big = single_unit_market(many, many);
    EXPECT_THROW(find_profitable_deviation(big, {Role::Buyer, 0}, DeviationGrid{}), GridTooLarge);
    DeviationSearch sampled;
    sampled.exhaustive_randomness = false;
    sampled.seeds = {1, 2, 3};
    EXPECT_FALSE(find_profitable_deviation(big, {Role::Buyer, 0}, DeviationGrid{}, sampled));
}

TEST(Reproduce, McAfeeWorstCase) {
    auto r = reproduce_mcafee_sbb();
    EXPECT_TRUE(r.matches) << r.text();
    EXPECT_NE(r.text().find("trader_gain = 99/500"), std::string::npos);
    EXPECT_FALSE(reproduce_mcafee_sbb(10, Rational(1, 100)).text().find("MISMATCH") != std::string::npos);
}

TEST(Reproduce, NaiveMultiUnit) {
    auto r = reproduce_naive_multiunit();
    EXPECT_TRUE(r.matches) << r.text();
    EXPECT_NE(r.text().find("mida_deviation = none"), std::string::npos);
}

TEST(Reproduce, DemandSupplyInteraction) {
    auto r = reproduce_demand_supply(10, 4);
    EXPECT_TRUE(r.matches) << r.text();
    EXPECT_NE(r.text().find("x_supply_in_L = 0"), std::string::npos);
    EXPECT_NE(r.text().find("Bxx_trades = 0"), std::string::npos);
    EXPECT_THROW(demand_supply_market(3, 10), InvalidSpec);
    EXPECT_THROW(reproduce("nope"), InvalidSpec);
}
