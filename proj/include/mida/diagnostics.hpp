#pragma once

// Analysis objects for a single run: who changes demand or supply between the
// optimal prices and a half's prices, the resulting clearing differences and
// lost deals, the market parameters, and the closed-form ratio bound.

#include "mida/demand.hpp"
#include "mida/equilibrium.hpp"
#include "mida/mechanism.hpp"
#include "mida/properties.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace mida {

struct TypeTraderSets {
    Rational delta;                        // p_half - p_opt on this type
    std::vector<std::size_t> buyers_minus;  // held x at p_opt, not at p_half
    std::vector<std::size_t> buyers_plus;   // the reverse
    std::vector<VirtualSellerRef> sellers_minus;
    std::vector<VirtualSellerRef> sellers_plus;
};

struct TraderSets {
    std::vector<TypeTraderSets> types;
    std::vector<Bundle> buyer_before, buyer_after;
    std::vector<int> seller_before, seller_after;
};

/// Each buyer moves from its optimal-equilibrium bundle to a bundle demanded
/// at p_half, preferring moves consistent with downward demand flow and then
/// the smallest change. Each seller moves to the supply closest to its
/// optimal one; by DMR the units that change hands are its lowest-valued.
inline TraderSets compute_trader_sets(const Market& market, const Equilibrium& opt, const PriceVector& p_half) {
    const int g = market.g;
    TraderSets ts;
    ts.types.resize(std::size_t(g));
    auto delta = price_delta(opt.prices, p_half);
    for (int t = 0; t < g; ++t) ts.types[std::size_t(t)].delta = delta[std::size_t(t)];

    for (std::size_t i = 0; i < market.buyers.size(); ++i) {
        Bundle before = opt.buyer_bundles[i];
        Bundle after = ddf_successor(before, buyer_demand(market.buyers[i].valuation, p_half).demand_set, delta);
        ts.buyer_before.push_back(before);
        ts.buyer_after.push_back(after);
        for (int t = 0; t < g; ++t) {
            if (before.contains(t) && !after.contains(t)) ts.types[std::size_t(t)].buyers_minus.push_back(i);
            if (!before.contains(t) && after.contains(t)) ts.types[std::size_t(t)].buyers_plus.push_back(i);
        }
    }
    for (std::size_t j = 0; j < market.sellers.size(); ++j) {
        const auto& v = market.sellers[j].valuation;
        int t = v.item_type().index;
        int before = opt.seller_quantities[j];
        auto supply = seller_supply(v, p_half[t]);
        int after = std::clamp(before, supply.min_quantity(), supply.max_quantity());
        ts.seller_before.push_back(before);
        ts.seller_after.push_back(after);
        auto& set = ts.types[std::size_t(t)];
        for (int u = v.units() - before; u < v.units() - after; ++u) set.sellers_minus.push_back({j, u});
        for (int u = v.units() - after; u < v.units() - before; ++u) set.sellers_plus.push_back({j, u});
    }
    return ts;
}

inline TraderSets compute_trader_sets(const Market& market, const PriceVector& p_opt, const PriceVector& p_half) {
    return compute_trader_sets(market, clearing_allocation(market, p_opt), p_half);
}

struct MarketParameters {
    int g = 1;
    int m = 1;
    std::vector<int> k;  // optimal volume per type
    int k_min = 0;
    int k_max = 0;
    std::optional<Rational> c;  // absent when some type has no optimal trade
    std::optional<Rational> h;  // absent when no buyer-seller pair has a positive gap
    std::vector<double> e;      // m * sqrt(k ln k); floating point, approximate

    [[nodiscard]] double e_max() const { return e.empty() ? 0.0 : *std::max_element(e.begin(), e.end()); }
};

/// Sampling-error scale m * sqrt(k ln k).
inline double sampling_error(int m, int k) {
    if (k <= 1) return 0.0;
    return m * std::sqrt(double(k) * std::log(double(k)));
}

inline MarketParameters market_parameters(const Market& market, const Equilibrium& opt) {
    MarketParameters mp;
    mp.g = market.g;
    mp.m = std::max(1, market.max_units());
    mp.k = opt.per_type_volume;
    mp.k_min = *std::min_element(mp.k.begin(), mp.k.end());
    mp.k_max = *std::max_element(mp.k.begin(), mp.k.end());
    if (mp.k_min > 0) mp.c = Rational(mp.k_max, mp.k_min);
    for (int x : mp.k) mp.e.push_back(sampling_error(mp.m, x));

    // Gaps between a buyer's value for a single unit of x and an x-seller's marginal.
    std::optional<Rational> lo, hi;
    for (int t = 0; t < market.g; ++t) {
        std::vector<Rational> b, s;
        for (const auto& buyer : market.buyers) b.push_back(buyer.valuation.singleton(t));
        for (const auto& seller : market.sellers)
            if (seller.valuation.item_type().index == t)
                for (const auto& v : seller.valuation.marginals()) s.push_back(v);
        if (b.empty() || s.empty()) continue;
        std::sort(b.begin(), b.end());
        std::sort(s.begin(), s.end());
        Rational widest = b.back() - s.front();
        if (widest.sign() <= 0) continue;
        if (!hi || widest > *hi) hi = widest;
        std::size_t k = 0;
        for (const auto& v : b) {
            while (k < s.size() && s[k] < v) ++k;
            if (k == 0) continue;
            Rational gap = v - s[k - 1];
            if (!lo || gap < *lo) lo = gap;
        }
    }
    if (lo && hi) mp.h = *hi / *lo;
    return mp;
}

inline MarketParameters market_parameters(const Market& market) { return market_parameters(market, solve_walrasian(market)); }

struct ClearingDifference {
    int d_minus = 0;  // |D_{x-}| restricted to the half
    int d_plus = 0;   // |D_{+x}| restricted to the half
    double bound = 0;  // 2 e_x
    [[nodiscard]] int difference() const { return std::abs(d_minus - d_plus); }
    [[nodiscard]] bool within() const { return difference() < bound; }
};

/// Sizes of the excess-supply and excess-demand sets among the agents that
/// landed in half h, compared against twice the sampling error.
inline std::vector<ClearingDifference> check_clearing_difference(const TraderSets& sets, const Halving& halving, Half h,
                                                                 const MarketParameters& mp) {
    std::vector<ClearingDifference> out;
    for (std::size_t t = 0; t < sets.types.size(); ++t) {
        const auto& s = sets.types[t];
        auto buyers_in = [&](const std::vector<std::size_t>& v) {
            return int(std::count_if(v.begin(), v.end(), [&](std::size_t i) { return halving.buyers[i] == h; }));
        };
        auto sellers_in = [&](const std::vector<VirtualSellerRef>& v) {
            return int(std::count_if(v.begin(), v.end(), [&](const VirtualSellerRef& r) { return halving.sellers[r.owner] == h; }));
        };
        ClearingDifference cd;
        cd.d_minus = buyers_in(s.buyers_minus) + sellers_in(s.sellers_plus);
        cd.d_plus = buyers_in(s.buyers_plus) + sellers_in(s.sellers_minus);
        cd.bound = 2 * mp.e[t];
        out.push_back(cd);
    }
    return out;
}

/// Per type: for a cheaper type, everyone in D_{x-} moved into D_{+y} of a type
/// whose price fell further; for a dearer type, everyone in D_{+x} left D_{z-}
/// of a type whose price rose further.
inline std::vector<bool> check_ddf_corollary(const TraderSets& sets) {
    const std::size_t g = sets.types.size();
    std::vector<bool> out(g, true);
    auto member = [](const std::vector<std::size_t>& v, std::size_t i) { return std::find(v.begin(), v.end(), i) != v.end(); };
    for (std::size_t x = 0; x < g; ++x) {
        const auto& sx = sets.types[x];
        if (sx.delta.sign() <= 0) {
            if (!sx.sellers_plus.empty()) out[x] = false;
            for (std::size_t i : sx.buyers_minus) {
                bool ok = false;
                for (std::size_t y = 0; y < g && !ok; ++y)
                    ok = sets.types[y].delta < sx.delta && member(sets.types[y].buyers_plus, i);
                if (!ok) out[x] = false;
            }
        }
        if (sx.delta.sign() >= 0) {
            if (!sx.sellers_minus.empty()) out[x] = false;
            for (std::size_t i : sx.buyers_plus) {
                bool ok = false;
                for (std::size_t z = 0; z < g && !ok; ++z)
                    ok = sets.types[z].delta > sx.delta && member(sets.types[z].buyers_minus, i);
                if (!ok) out[x] = false;
            }
        }
    }
    return out;
}

struct TypeLoss {
    int k = 0;
    int realized = 0;
    int deals_lost = 0;
    int d_plus = 0;
    int d_minus = 0;
    double bound_rhs = 0;  // 2 e_x + d_{+x} + d_{x-}
    [[nodiscard]] bool within() const { return deals_lost < bound_rhs; }
};

/// Lost deals per type against the loss bound. The set sizes are taken over
/// the whole population for the price posted in each half, and the larger of
/// the two directions is used.
inline std::vector<TypeLoss> loss_accounting(const Market& market, const TradeOutcome& outcome, const Equilibrium& opt,
                                             const MarketParameters& mp) {
    std::vector<TypeLoss> out(std::size_t(market.g));
    auto volume = outcome.volume();
    std::vector<int> worst(std::size_t(market.g), 0);
    std::vector<std::pair<int, int>> sizes(std::size_t(market.g));
    for (const PriceVector* p : {&outcome.prices_R, &outcome.prices_L}) {
        auto ts = compute_trader_sets(market, opt, *p);
        for (std::size_t t = 0; t < ts.types.size(); ++t) {
            const auto& s = ts.types[t];
            int dp = int(s.buyers_plus.size() + s.sellers_minus.size());
            int dm = int(s.buyers_minus.size() + s.sellers_plus.size());
            if (dp + dm >= worst[t]) {
                worst[t] = dp + dm;
                sizes[t] = {dp, dm};
            }
        }
    }
    for (std::size_t t = 0; t < out.size(); ++t) {
        auto& l = out[t];
        l.k = opt.per_type_volume[t];
        l.realized = volume[t];
        l.deals_lost = std::max(0, l.k - l.realized);
        l.d_plus = sizes[t].first;
        l.d_minus = sizes[t].second;
        l.bound_rhs = 2 * mp.e[t] + l.d_plus + l.d_minus;
    }
    return out;
}

enum class BoundPreset { General, UnitDemand, SingleType };

struct RatioBound {
    double via_c = -INFINITY;
    std::optional<double> via_h;
    bool volume_assumption = false;
};

/// Closed-form lower bounds on the expected ratio, clamped above at 1. A
/// missing c (some type without optimal trade) gives a vacuous -inf.
inline RatioBound ratio_lower_bound(const MarketParameters& mp, BoundPreset preset = BoundPreset::General) {
    RatioBound tb;
    const double k = mp.k_max;
    const double g = mp.g, m = mp.m;
    auto sq5 = [&] { return k > 1 ? std::sqrt(std::pow(std::log(k), 5) / k) : INFINITY; };
    auto sq1 = [&] { return k > 1 ? std::sqrt(std::log(k) / k) : INFINITY; };
    auto clamp = [](double v) { return std::isnan(v) ? -INFINITY : std::min(1.0, v); };
    double factor = 0;
    switch (preset) {
        case BoundPreset::General: factor = std::pow(2.0, 3 * g) * 20 * m * g * sq5(); break;
        case BoundPreset::UnitDemand: factor = 640 * g * g * m * sq5(); break;
        case BoundPreset::SingleType: factor = 160 * m * sq1(); break;
    }
    if (preset == BoundPreset::SingleType) {
        tb.via_c = clamp(1 - factor);
    } else {
        if (mp.c) tb.via_c = clamp(1 - factor * mp.c->to_double());
        if (mp.h) tb.via_h = clamp(1 - factor * mp.h->to_double());
    }
    tb.volume_assumption = 1 - std::pow(2.0, 3 * g) * 20 * m * sq5() > 0;
    return tb;
}

}  // namespace mida
