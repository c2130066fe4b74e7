#pragma once

// Independent reference computations used by the tests. Nothing here calls
// the solver or the mechanism; everything is plain enumeration.

#include "mida/mida.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace oracle {

using mida::Bundle;
using mida::Market;
using mida::PriceVector;
using mida::Rational;

/// Best gain of a buyer at p by enumerating every bundle.
inline Rational buyer_best(const mida::BuyerValuation& v, const PriceVector& p) {
    Rational best;
    for (std::uint32_t mask = 0; mask < (1u << v.g()); ++mask) {
        Bundle b(mask);
        Rational gain = v.value(b);
        for (int t : b.types()) gain -= p[t];
        best = std::max(best, gain);
    }
    return best;
}

/// Best gain of a seller at price x by enumerating every quantity.
inline Rational seller_best(const mida::SellerValuation& v, const Rational& price) {
    Rational best;
    for (int q = 0; q <= v.units(); ++q) {
        Rational sold;
        for (int u = v.units() - q; u < v.units(); ++u) sold += v.marginals()[std::size_t(u)];
        best = std::max(best, price * Rational(q) - sold);
    }
    return best;
}

/// Sum of everyone's best gain at p. Equals the optimal gain exactly when p is
/// a Walrasian price vector, and exceeds it otherwise.
inline Rational lyapunov(const Market& m, const PriceVector& p) {
    Rational s;
    for (const auto& b : m.buyers) s += buyer_best(b.valuation, p);
    for (const auto& x : m.sellers) s += seller_best(x.valuation, p[x.valuation.item_type().index]);
    return s;
}

/// Maximum gain from trade by enumerating every buyer bundle profile; the
/// cheapest d units of a type are the d smallest marginals overall (DMR makes
/// that choice consistent per seller).
inline Rational optimal_gain(const Market& m) {
    const int g = m.g;
    std::vector<std::vector<Rational>> asks(static_cast<std::size_t>(g));
    for (const auto& s : m.sellers)
        for (const auto& v : s.valuation.marginals()) asks[std::size_t(s.valuation.item_type().index)].push_back(v);
    for (auto& a : asks) std::sort(a.begin(), a.end());

    std::optional<Rational> best;
    std::vector<int> demand(static_cast<std::size_t>(g), 0);
    std::function<void(std::size_t, Rational)> rec = [&](std::size_t i, Rational value) {
        if (i == m.buyers.size()) {
            Rational gain = value;
            for (int t = 0; t < g; ++t) {
                const auto& a = asks[std::size_t(t)];
                if (demand[std::size_t(t)] > int(a.size())) return;
                for (int u = 0; u < demand[std::size_t(t)]; ++u) gain -= a[std::size_t(u)];
            }
            if (!best || gain > *best) best = gain;
            return;
        }
        for (std::uint32_t mask = 0; mask < (1u << g); ++mask) {
            Bundle b(mask);
            for (int t : b.types()) ++demand[std::size_t(t)];
            rec(i + 1, value + m.buyers[i].valuation.value(b));
            for (int t : b.types()) --demand[std::size_t(t)];
        }
    };
    rec(0, Rational());
    return best.value_or(Rational());
}

/// Checks that an equilibrium is envy-free and clears the market.
inline std::string equilibrium_problem(const Market& m, const mida::Equilibrium& eq) {
    std::vector<int> bought(std::size_t(m.g), 0), sold(std::size_t(m.g), 0);
    for (std::size_t i = 0; i < m.buyers.size(); ++i) {
        Bundle b = eq.buyer_bundles[i];
        Rational gain = m.buyers[i].valuation.value(b) - eq.prices.cost(b);
        if (gain != buyer_best(m.buyers[i].valuation, eq.prices)) return "buyer " + std::to_string(i) + " is not best-responding";
        for (int t : b.types()) ++bought[std::size_t(t)];
    }
    for (std::size_t j = 0; j < m.sellers.size(); ++j) {
        const auto& v = m.sellers[j].valuation;
        int q = eq.seller_quantities[j];
        Rational p = eq.prices[v.item_type().index];
        if (p * Rational(q) - v.cost_of_selling(q) != seller_best(v, p)) return "seller " + std::to_string(j) + " is not best-responding";
        sold[std::size_t(v.item_type().index)] += q;
    }
    if (bought != sold) return "market does not clear";
    return {};
}

struct McAfee {
    int deals = 0;
    Rational buy_price, sell_price, trader_gain, surplus;
};

/// Trade reduction on sorted copies.
inline McAfee mcafee(std::vector<Rational> asks, std::vector<Rational> bids) {
    std::sort(asks.begin(), asks.end());
    std::sort(bids.rbegin(), bids.rend());
    std::size_t k = 0;
    while (k < asks.size() && k < bids.size() && asks[k] <= bids[k]) ++k;
    McAfee r;
    if (k == 0) return r;
    r.deals = int(k) - 1;
    r.sell_price = asks[k - 1];
    r.buy_price = bids[k - 1];
    for (std::size_t i = 0; i + 1 < k; ++i) r.trader_gain += (bids[i] - r.buy_price) + (r.sell_price - asks[i]);
    r.surplus = Rational(r.deals) * (r.buy_price - r.sell_price);
    return r;
}

// ---------------------------------------------------------------------------
// Small market builders

inline mida::Buyer unit(std::vector<Rational> values, std::string id = "b") {
    return {std::move(id), mida::BuyerValuation::unit_demand(std::move(values))};
}
inline mida::Buyer additive(std::vector<Rational> values, std::string id = "b") {
    return {std::move(id), mida::BuyerValuation::additive(std::move(values))};
}
inline mida::Seller seller(int type, std::vector<Rational> marginals, std::string id = "s") {
    return {std::move(id), mida::SellerValuation(mida::ItemType{type}, std::move(marginals))};
}

/// v({x}) = 6, v({y}) = 8, v({x, y}) = 9.
inline mida::BuyerValuation six_eight_nine() {
    return mida::BuyerValuation::table(2, {Rational(0), Rational(6), Rational(8), Rational(9)});
}

/// m identical copies of one type as m item-types, valued by the sum of the
/// first |B| marginals.
inline mida::BuyerValuation symmetric_table(const std::vector<Rational>& marginals) {
    const int m = int(marginals.size());
    std::vector<Rational> table(std::size_t(1) << m);
    for (std::uint32_t mask = 0; mask < table.size(); ++mask)
        for (int j = 0; j < std::popcount(mask); ++j) table[mask] += marginals[std::size_t(j)];
    return mida::BuyerValuation::table(m, table);
}

inline Market market(int g, std::vector<mida::Buyer> buyers, std::vector<mida::Seller> sellers) {
    Market m;
    m.g = g;
    m.buyers = std::move(buyers);
    m.sellers = std::move(sellers);
    for (std::size_t i = 0; i < m.buyers.size(); ++i) m.buyers[i].id += std::to_string(i);
    for (std::size_t j = 0; j < m.sellers.size(); ++j) m.sellers[j].id += std::to_string(j);
    return m;
}

/// Random small market within brute-force limits.
inline Market random_small_market(std::uint64_t seed, int g, int max_buyers, int max_sellers, int m, bool tables = true) {
    mida::Rng rng = mida::Rng::stream(seed, "test-market");
    mida::GeneratorSpec spec;
    spec.g = g;
    spec.buyers = int(rng.uniform(0, max_buyers));
    spec.sellers = int(rng.uniform(0, max_sellers));
    spec.m = m;
    int family = int(rng.uniform(0, tables ? 2 : 1));
    spec.family = family == 0 ? mida::BuyerFamily::UnitDemand : family == 1 ? mida::BuyerFamily::Additive : mida::BuyerFamily::TableGS;
    spec.value_hi = rng.uniform(3, 20);
    spec.denominator = rng.uniform(1, 3);
    return mida::generate_market(spec, seed);
}

}  // namespace oracle
