#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace mida;
using oracle::six_eight_nine;

namespace {

PriceVector pv(std::vector<Rational> p) { return PriceVector(std::move(p)); }


}  // namespace

TEST(Bundle, CanonicalOrder) {
    EXPECT_TRUE(canonical_less(Bundle(), Bundle::of({0})));
    EXPECT_TRUE(canonical_less(Bundle::of({1}), Bundle::of({0, 1})));
    EXPECT_TRUE(canonical_less(Bundle::of({0}), Bundle::of({1})));
    EXPECT_EQ(to_string(Bundle::of({0, 2})), "{0,2}");
}

TEST(Valuation, KindsMaterialize) {
    auto u = BuyerValuation::unit_demand({Rational(3), Rational(5)});
    auto a = BuyerValuation::additive({Rational(3), Rational(5)});
    EXPECT_EQ(u.value(Bundle::of({0, 1})), Rational(5));
    EXPECT_EQ(a.value(Bundle::of({0, 1})), Rational(8));
    EXPECT_EQ(u.value(Bundle()), Rational(0));
    EXPECT_THROW(BuyerValuation::table(2, {Rational(1), Rational(0), Rational(0), Rational(0)}), InvalidValuation);
    EXPECT_THROW(BuyerValuation::unit_demand({Rational(-1)}), InvalidValuation);
    EXPECT_THROW(BuyerValuation::unit_demand(std::vector<Rational>(17)), InvalidValuation);
    EXPECT_THROW(SellerValuation(ItemType{0}, {}), InvalidValuation);
    EXPECT_THROW(SellerValuation(ItemType{0}, {Rational(-1)}), InvalidValuation);
}

TEST(Market, Validate) {
    auto m = oracle::market(1, {oracle::unit({Rational(3)})}, {oracle::seller(1, {Rational(1)})});
    EXPECT_THROW(m.validate(), InvalidMarket);
    m.sellers[0].valuation = SellerValuation(ItemType{0}, {Rational(1)});
    EXPECT_NO_THROW(m.validate());
    m.buyers.push_back(oracle::unit({Rational(1), Rational(2)}));
    EXPECT_THROW(m.validate(), InvalidMarket);
}

TEST(BuyerDemand, SixEightNineAtFourFour) {
    auto d = buyer_demand(six_eight_nine(), pv({4, 4}));
    EXPECT_EQ(d.best_gain, Rational(4));
    // {y} gains 4, {x} gains 2, {x,y} gains 1.
    ASSERT_EQ(d.demand_set.size(), 1u);
    EXPECT_EQ(d.demand_set[0], Bundle::of({1}));
}

TEST(BuyerDemand, SixEightNineAtOneOne) {
    // {y} and {x,y} both gain 7.
    auto d = buyer_demand(six_eight_nine(), pv({1, 1}));
    EXPECT_EQ(d.best_gain, Rational(7));
    ASSERT_EQ(d.demand_set.size(), 2u);
    EXPECT_EQ(d.canonical(), Bundle::of({1}));
    EXPECT_TRUE(d.contains(Bundle::of({0, 1})));
}

TEST(BuyerDemand, TiesReturnWholeSetCanonicallySorted) {
    // {x}: 6 - 4 = 2, {y}: 8 - 6 = 2, {x,y}: 9 - 10 < 0.
    auto d = buyer_demand(six_eight_nine(), pv({4, 6}));
    EXPECT_EQ(d.best_gain, Rational(2));
    ASSERT_EQ(d.demand_set.size(), 2u);
    EXPECT_EQ(d.demand_set[0], Bundle::of({0}));
    EXPECT_EQ(d.demand_set[1], Bundle::of({1}));
}

TEST(BuyerDemand, AllTooExpensiveGivesEmptyBundle) {
    auto d = buyer_demand(six_eight_nine(), pv({100, 100}));
    EXPECT_EQ(d.best_gain, Rational(0));
    EXPECT_TRUE(d.contains(Bundle()));
}

TEST(BuyerDemand, RespectsAvailability) {
    auto d = buyer_demand(six_eight_nine(), pv({1, 1}), Bundle::of({0}));
    EXPECT_EQ(d.best_gain, Rational(5));
    EXPECT_EQ(d.canonical(), Bundle::of({0}));
}

TEST(SellerSupply, Examples) {
    SellerValuation v(ItemType{0}, {Rational(7), Rational(2)});
    auto s = seller_supply(v, Rational(6));
    EXPECT_EQ(s.best_gain, Rational(4));
    EXPECT_EQ(s.quantities, std::vector<int>{1});
    auto z = seller_supply(v, Rational(0));
    EXPECT_EQ(z.best_gain, Rational(0));
    EXPECT_EQ(z.quantities, std::vector<int>{0});
    auto flat = seller_supply(SellerValuation(ItemType{0}, {Rational(5), Rational(5), Rational(5)}), Rational(5));
    EXPECT_EQ(flat.best_gain, Rational(0));
    EXPECT_EQ(flat.quantities, (std::vector<int>{0, 1, 2, 3}));
}

TEST(Dmr, Examples) {
    EXPECT_TRUE(is_dmr(SellerValuation(ItemType{0}, {Rational(7), Rational(2)})));
    EXPECT_FALSE(is_dmr(SellerValuation(ItemType{0}, {Rational(1), Rational(9)})));
    EXPECT_TRUE(is_dmr(SellerValuation(ItemType{0}, {Rational(5)})));
}

TEST(GrossSubstitutes, Examples) {
    EXPECT_TRUE(is_gross_substitute(BuyerValuation::unit_demand({Rational(3), Rational(9), Rational(1)})));
    EXPECT_TRUE(is_gross_substitute(BuyerValuation::additive({Rational(3), Rational(9)})));
    EXPECT_TRUE(is_gross_substitute(six_eight_nine()));
    auto complements = BuyerValuation::table(2, {Rational(0), Rational(0), Rational(0), Rational(10)});
    EXPECT_FALSE(is_gross_substitute(complements));
    auto violation = find_gs_violation(complements, default_price_grid(complements));
    ASSERT_TRUE(violation.has_value());
    EXPECT_TRUE(violation->demanded.contains(violation->raised_type == 0 ? 1 : 0));
    EXPECT_FALSE(violation->describe().empty());
}

TEST(GrossSubstitutes, GridMustCoverMarginals) {
    auto complements = BuyerValuation::table(2, {Rational(0), Rational(0), Rational(0), Rational(10)});
    EXPECT_THROW(find_gs_violation(complements, {Rational(0), Rational(1)}), GridTooCoarse);
}

TEST(Ddf, Examples) {
    auto v = six_eight_nine();
    // At (4,4) the buyer wants {y}; lowering y further keeps it there.
    EXPECT_TRUE(check_ddf(v, pv({4, 4}), pv({4, 1})).holds);
    // Lowering y under x: demand moves from {x} to {y}, toward the larger drop.
    auto r = check_ddf(v, pv({2, 6}), pv({2, 3}));
    EXPECT_TRUE(r.holds);
    EXPECT_EQ(r.before, Bundle::of({0}));
    EXPECT_EQ(r.after, Bundle::of({1}));
    EXPECT_TRUE(check_ddf(BuyerValuation::unit_demand({Rational(5), Rational(7)}), pv({1, 2}), pv({6, 3})).holds);
}

TEST(Ddf, ComplementsReportTheItem) {
    auto complements = BuyerValuation::table(2, {Rational(0), Rational(0), Rational(0), Rational(10)});
    auto r = check_ddf(complements, pv({1, 1}), pv({1, 100}));
    EXPECT_FALSE(r.holds);
    ASSERT_TRUE(r.violating_item.has_value());
    EXPECT_EQ(*r.violating_item, 0);  // x kept its price but was dropped
}

TEST(VirtualSellers, Examples) {
    auto vs = virtual_sellers(oracle::seller(0, {Rational(7), Rational(2)}));
    ASSERT_EQ(vs.size(), 2u);
    EXPECT_EQ(vs[0].unit_index, 0);
    EXPECT_EQ(vs[0].marginal_value, Rational(7));
    EXPECT_EQ(vs[1].marginal_value, Rational(2));
    EXPECT_EQ(virtual_sellers(oracle::seller(0, {Rational(5)})).size(), 1u);
    auto nines = virtual_sellers(oracle::seller(0, {Rational(9), Rational(9), Rational(9)}));
    EXPECT_EQ(nines.size(), 3u);
    for (const auto& x : nines) EXPECT_EQ(x.marginal_value, Rational(9));
}

TEST(Generator, DeterministicAndWellFormed) {
    GeneratorSpec spec;
    spec.g = 1;
    spec.buyers = 10;
    spec.sellers = 10;
    spec.m = 1;
    auto a = generate_market(spec, 7);
    auto b = generate_market(spec, 7);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, generate_market(spec, 8));
    EXPECT_EQ(a.buyers.size(), 10u);
    for (const auto& x : a.buyers) {
        EXPECT_GE(x.valuation.singleton(0), Rational(0));
        EXPECT_LE(x.valuation.singleton(0), Rational(100));
    }
}

TEST(Generator, FamiliesAreGsAndSellersDmr) {
    for (auto family : {BuyerFamily::UnitDemand, BuyerFamily::Additive, BuyerFamily::TableGS}) {
        GeneratorSpec spec;
        spec.g = 2;
        spec.buyers = 8;
        spec.sellers = 8;
        spec.m = 3;
        spec.family = family;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            auto m = generate_market(spec, seed);
            EXPECT_NO_THROW(m.validate());
            for (const auto& b : m.buyers) EXPECT_TRUE(is_gross_substitute(b.valuation, default_price_grid(b.valuation)));
            for (const auto& s : m.sellers) {
                EXPECT_TRUE(is_dmr(s.valuation));
                EXPECT_LE(s.valuation.units(), 3);
            }
        }
    }
}

TEST(Generator, RejectsBadSpecs) {
    GeneratorSpec spec;
    spec.buyers = -1;
    EXPECT_THROW(generate_market(spec, 1), InvalidSpec);
    spec = {};
    spec.g = 0;
    EXPECT_THROW(generate_market(spec, 1), InvalidSpec);
    spec = {};
    spec.g = 17;
    EXPECT_THROW(generate_market(spec, 1), InvalidSpec);
}

TEST(Generator, CalibratedVolume) {
    GeneratorSpec spec;
    spec.g = 2;
    spec.calibrated_k = {5, 9};
    auto m = generate_market(spec, 3);
    auto eq = solve_walrasian(m);
    EXPECT_EQ(eq.per_type_volume, (std::vector<int>{5, 9}));
}

TEST(Rng, LabeledStreamsAreIndependentAndStable) {
    auto a = Rng::stream(1, "halving");
    auto b = Rng::stream(1, "halving");
    auto c = Rng::stream(1, "lottery-R-buyers");
    auto x = a.next();
    EXPECT_EQ(x, b.next());
    EXPECT_NE(x, c.next());
    Rng r(5);
    for (int i = 0; i < 1000; ++i) {
        auto u = r.uniform(-3, 3);
        EXPECT_GE(u, -3);
        EXPECT_LE(u, 3);
    }
    std::vector<int> v{1, 2, 3, 4, 5};
    r.shuffle(v);
    std::sort(v.begin(), v.end());
    EXPECT_EQ(v, (std::vector<int>{1, 2, 3, 4, 5}));
}

// ---------------------------------------------------------------------------
// Properties

TEST(Properties, DemandMatchesEnumerationAndIsNonNegative) {
    Rng rng(99);
    for (int trial = 0; trial < 500; ++trial) {
        auto m = oracle::random_small_market(std::uint64_t(trial), int(rng.uniform(1, 3)), 3, 0, 1);
        for (const auto& b : m.buyers) {
            PriceVector p(m.g);
            for (int t = 0; t < m.g; ++t) p[t] = Rational(rng.uniform(0, 40), 2);
            auto d = buyer_demand(b.valuation, p);
            EXPECT_EQ(d.best_gain, oracle::buyer_best(b.valuation, p));
            EXPECT_GE(d.best_gain, Rational(0));
            if (d.best_gain.is_zero()) {
                EXPECT_TRUE(d.contains(Bundle()));
            }
            for (Bundle x : d.demand_set) EXPECT_EQ(b.valuation.value(x) - p.cost(x), d.best_gain);
            EXPECT_TRUE(std::is_sorted(d.demand_set.begin(), d.demand_set.end(), canonical_less));
        }
    }
}

TEST(Properties, SupplyIsContiguousInterval) {
    Rng rng(7);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<Rational> marg;
        int n = int(rng.uniform(1, 4));
        for (int i = 0; i < n; ++i) marg.push_back(Rational(rng.uniform(0, 6)));
        std::sort(marg.rbegin(), marg.rend());
        SellerValuation v(ItemType{0}, marg);
        Rational price(rng.uniform(0, 14), 2);
        auto s = seller_supply(v, price);
        EXPECT_EQ(s.best_gain, oracle::seller_best(v, price));
        for (std::size_t i = 1; i < s.quantities.size(); ++i) EXPECT_EQ(s.quantities[i], s.quantities[i - 1] + 1);
    }
}

TEST(Properties, VirtualSellerMarginalsDecrease) {
    GeneratorSpec spec;
    spec.g = 2;
    spec.sellers = 30;
    spec.m = 4;
    auto m = generate_market(spec, 11);
    for (std::size_t j = 0; j < m.sellers.size(); ++j) {
        auto vs = virtual_sellers(m.sellers[j], j);
        for (std::size_t u = 1; u < vs.size(); ++u) EXPECT_LE(vs[u].marginal_value, vs[u - 1].marginal_value);
    }
}

// DMR and GS agree on single-type valuations written as identical copies.
TEST(Properties, DmrEqualsGsForSingleTypeUpToThreeUnits) {
    for (int m = 1; m <= 3; ++m) {
        std::vector<int> digits(std::size_t(m), 0);
        for (;;) {
            std::vector<Rational> marg(digits.begin(), digits.end());
            EXPECT_EQ(is_dmr(marg), is_gross_substitute(oracle::symmetric_table(marg))) << "m=" << m;
            int i = 0;
            while (i < m && ++digits[std::size_t(i)] == 7) digits[std::size_t(i++)] = 0;
            if (i == m) break;
        }
    }
}

TEST(Properties, GsValuationsSatisfyDdfOnTheirGrid) {
    GeneratorSpec spec;
    spec.g = 2;
    spec.buyers = 6;
    spec.value_hi = 6;
    for (auto family : {BuyerFamily::UnitDemand, BuyerFamily::Additive, BuyerFamily::TableGS}) {
        spec.family = family;
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            auto m = generate_market(spec, seed);
            for (const auto& b : m.buyers) {
                auto grid = default_price_grid(b.valuation);
                for (const auto& p0 : grid)
                    for (const auto& p1 : grid)
                        for (const auto& q0 : grid)
                            for (const auto& q1 : grid) {
                                auto r = check_ddf(b.valuation, pv({p0, p1}), pv({q0, q1}));
                                ASSERT_TRUE(r.holds) << to_string(pv({p0, p1})) << " -> " << to_string(pv({q0, q1}));
                            }
            }
        }
    }
}
