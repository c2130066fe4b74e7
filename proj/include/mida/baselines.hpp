#pragma once

// Trade-reduction baseline for single-type markets, its naive extension to
// multi-unit sellers, and the optimal benchmark.

#include "mida/equilibrium.hpp"
#include "mida/model.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace mida {

/// One unit per agent, a single item-type.
struct SingleTypeMarket {
    std::vector<Rational> asks;
    std::vector<Rational> bids;
};

struct McAfeeOutcome {
    int k = 0;  // number of efficient pairs; k - 1 of them trade
    int deals = 0;
    Rational buy_price;
    Rational sell_price;
    Rational trader_gain;
    Rational surplus;  // money kept by the auctioneer
    std::vector<bool> buyer_trades;   // by original bid index
    std::vector<bool> seller_trades;  // by original ask index

    [[nodiscard]] Rational buyer_gain(const SingleTypeMarket& m, std::size_t i) const {
        return buyer_trades[i] ? m.bids[i] - buy_price : Rational();
    }
    [[nodiscard]] Rational seller_gain(const SingleTypeMarket& m, std::size_t j) const {
        return seller_trades[j] ? sell_price - m.asks[j] : Rational();
    }
};

namespace detail {

/// Indices of asks ascending and bids descending; equal values keep index order.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> mcafee_order(const SingleTypeMarket& m) {
    std::vector<std::size_t> a(m.asks.size()), b(m.bids.size());
    std::iota(a.begin(), a.end(), 0);
    std::iota(b.begin(), b.end(), 0);
    std::stable_sort(a.begin(), a.end(), [&](auto x, auto y) { return m.asks[x] < m.asks[y]; });
    std::stable_sort(b.begin(), b.end(), [&](auto x, auto y) { return m.bids[x] > m.bids[y]; });
    return {a, b};
}

inline int mcafee_k(const SingleTypeMarket& m, const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    int k = 0;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i)
        if (m.asks[a[i]] <= m.bids[b[i]]) k = int(i) + 1;
    return k;
}

}  // namespace detail

/// Sellers 1..k-1 receive s_k and buyers 1..k-1 pay b_k.
inline McAfeeOutcome run_mcafee(const SingleTypeMarket& m) {
    McAfeeOutcome o;
    o.buyer_trades.assign(m.bids.size(), false);
    o.seller_trades.assign(m.asks.size(), false);
    auto [a, b] = detail::mcafee_order(m);
    o.k = detail::mcafee_k(m, a, b);
    if (o.k == 0) return o;
    o.deals = o.k - 1;
    o.sell_price = m.asks[a[std::size_t(o.k - 1)]];
    o.buy_price = m.bids[b[std::size_t(o.k - 1)]];
    for (int i = 0; i < o.deals; ++i) {
        o.seller_trades[a[std::size_t(i)]] = true;
        o.buyer_trades[b[std::size_t(i)]] = true;
        o.trader_gain += (m.bids[b[std::size_t(i)]] - o.buy_price) + (o.sell_price - m.asks[a[std::size_t(i)]]);
    }
    o.surplus = Rational(o.deals) * (o.buy_price - o.sell_price);
    return o;
}

enum class NaiveMode { KeepOthers, RemoveOwner };

struct NaiveMultiUnitOutcome {
    McAfeeOutcome virtual_outcome;          // over the virtual asks
    std::vector<int> seller_units;          // by real seller
    std::vector<Rational> seller_revenue;   // by real seller
    std::vector<bool> buyer_trades;
    Rational buy_price;
    Rational sell_price;

    [[nodiscard]] Rational seller_gain(const Market& m, std::size_t j) const {
        return seller_revenue[j] - m.sellers[j].valuation.cost_of_selling(seller_units[j]);
    }
    [[nodiscard]] Rational buyer_gain(const Market& m, std::size_t i) const {
        return buyer_trades[i] ? m.buyers[i].valuation.singleton(0) - buy_price : Rational();
    }
    [[nodiscard]] Rational trader_gain(const Market& m) const {
        Rational g;
        for (std::size_t i = 0; i < m.buyers.size(); ++i) g += buyer_gain(m, i);
        for (std::size_t j = 0; j < m.sellers.size(); ++j) g += seller_gain(m, j);
        return g;
    }
};

/// Trade reduction over virtual sellers. Under KeepOthers the owner of the
/// price-setting ask still sells its other winning units; under RemoveOwner
/// those units are withdrawn and the lowest winning buyers are dropped to
/// keep the market balanced.
inline NaiveMultiUnitOutcome run_naive_multiunit_mcafee(const Market& market, NaiveMode mode) {
    market.validate();
    if (market.g != 1) throw InvalidMarket("the naive multi-unit baseline needs a single-type market");
    SingleTypeMarket flat;
    std::vector<std::size_t> owner;
    for (std::size_t j = 0; j < market.sellers.size(); ++j)
        for (const auto& vs : virtual_sellers(market.sellers[j], j)) {
            flat.asks.push_back(vs.marginal_value);
            owner.push_back(j);
        }
    for (const auto& b : market.buyers) flat.bids.push_back(b.valuation.singleton(0));

    NaiveMultiUnitOutcome out;
    out.virtual_outcome = run_mcafee(flat);
    const auto& vo = out.virtual_outcome;
    out.buy_price = vo.buy_price;
    out.sell_price = vo.sell_price;
    out.seller_units.assign(market.sellers.size(), 0);
    out.seller_revenue.assign(market.sellers.size(), Rational());
    out.buyer_trades = vo.buyer_trades;
    if (vo.k == 0) return out;

    auto [a, b] = detail::mcafee_order(flat);
    std::size_t setter = owner[a[std::size_t(vo.k - 1)]];
    int evicted = 0;
    for (std::size_t v = 0; v < flat.asks.size(); ++v) {
        if (!vo.seller_trades[v]) continue;
        if (mode == NaiveMode::RemoveOwner && owner[v] == setter) {
            ++evicted;
            continue;
        }
        ++out.seller_units[owner[v]];
        out.seller_revenue[owner[v]] += vo.sell_price;
    }
    for (int i = vo.deals - evicted; i < vo.deals; ++i) out.buyer_trades[b[std::size_t(i)]] = false;
    return out;
}

/// Denominator of every competitive ratio.
inline Rational optimal_benchmark(const Market& market) { return solve_walrasian(market).gain; }

}  // namespace mida
