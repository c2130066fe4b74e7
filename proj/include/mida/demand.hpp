#pragma once

// Demand and supply oracles. Every oracle returns the full optimal set so that
// callers can apply their own tie-break policy; the canonical representative
// is the first element.

#include "mida/model.hpp"

#include <algorithm>
#include <vector>

namespace mida {

struct DemandResult {
    Rational best_gain;
    std::vector<Bundle> demand_set;  // sorted by canonical_less

    [[nodiscard]] Bundle canonical() const { return demand_set.front(); }
    [[nodiscard]] bool contains(Bundle b) const {
        return std::find(demand_set.begin(), demand_set.end(), b) != demand_set.end();
    }
    [[nodiscard]] bool some_bundle_contains(int type) const {
        return std::any_of(demand_set.begin(), demand_set.end(), [&](Bundle b) { return b.contains(type); });
    }
};

/// All bundles B within `available` maximizing v(B) - p(B).
inline DemandResult buyer_demand(const BuyerValuation& v, const PriceVector& p, Bundle available) {
    DemandResult r;
    r.demand_set.push_back(Bundle());
    std::uint32_t all = available.mask();
    for (std::uint32_t sub = all; sub; sub = (sub - 1) & all) {
        Bundle b(sub);
        Rational gain = v.value(b) - p.cost(b);
        auto cmp = gain <=> r.best_gain;
        if (cmp > 0) {
            r.best_gain = std::move(gain);
            r.demand_set.assign(1, b);
        } else if (cmp == 0) {
            r.demand_set.push_back(b);
        }
    }
    std::sort(r.demand_set.begin(), r.demand_set.end(), canonical_less);
    return r;
}

inline DemandResult buyer_demand(const BuyerValuation& v, const PriceVector& p) {
    return buyer_demand(v, p, Bundle::full(v.g()));
}

/// max_B v(B) - p(B), without materializing the demand set.
inline Rational buyer_best_gain(const BuyerValuation& v, const PriceVector& p) {
    const auto& table = v.table();
    if (v.kind() != ValuationKind::Table) {
        if (v.kind() == ValuationKind::Additive) {
            Rational g;
            for (int t = 0; t < v.g(); ++t) {
                Rational d = v.per_type()[t] - p[t];
                if (d.sign() > 0) g += d;
            }
            return g;
        }
        Rational g;
        for (int t = 0; t < v.g(); ++t) {
            Rational d = v.per_type()[t] - p[t];
            if (d > g) g = std::move(d);
        }
        return g;
    }
    Rational best;
    for (std::uint32_t mask = 1; mask < table.size(); ++mask) {
        Rational gain = table[mask] - p.cost(Bundle(mask));
        if (gain > best) best = std::move(gain);
    }
    return best;
}

struct SupplyResult {
    Rational best_gain;
    std::vector<int> quantities;  // ascending

    [[nodiscard]] int min_quantity() const { return quantities.front(); }
    [[nodiscard]] int max_quantity() const { return quantities.back(); }
    [[nodiscard]] bool contains(int q) const {
        return std::find(quantities.begin(), quantities.end(), q) != quantities.end();
    }
};

/// All quantities q maximizing q*p - (v(m') - v(m'-q)).
inline SupplyResult seller_supply(const SellerValuation& v, const Rational& price) {
    SupplyResult r;
    r.quantities.push_back(0);
    Rational gain;
    for (int q = 1; q <= v.units(); ++q) {
        gain += price - v.next_unit_value(q - 1);
        auto cmp = gain <=> r.best_gain;
        if (cmp > 0) {
            r.best_gain = gain;
            r.quantities.assign(1, q);
        } else if (cmp == 0) {
            r.quantities.push_back(q);
        }
    }
    return r;
}

inline Rational seller_best_gain(const SellerValuation& v, const Rational& price) {
    Rational gain, best;
    for (int q = 1; q <= v.units(); ++q) {
        gain += price - v.next_unit_value(q - 1);
        if (gain > best) best = gain;
    }
    return best;
}

/// Sum of all agents' best gains at p. Its minimizers over p >= 0 are exactly
/// the Walrasian price vectors.
inline Rational indirect_utility(const Market& market, const PriceVector& p) {
    Rational total;
    for (const auto& b : market.buyers) total += buyer_best_gain(b.valuation, p);
    for (const auto& s : market.sellers) total += seller_best_gain(s.valuation, p[s.valuation.item_type().index]);
    return total;
}

}  // namespace mida
