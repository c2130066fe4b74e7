#pragma once

// Random market generators used by the experiments and the property tests.

#include "mida/model.hpp"
#include "mida/random.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace mida {

enum class BuyerFamily { UnitDemand, Additive, TableGS };

inline const char* to_string(BuyerFamily f) {
    switch (f) {
        case BuyerFamily::UnitDemand: return "unit-demand";
        case BuyerFamily::Additive: return "additive";
        case BuyerFamily::TableGS: return "table-gs";
    }
    return "?";
}

inline BuyerFamily parse_buyer_family(const std::string& s) {
    if (s == "unit-demand") return BuyerFamily::UnitDemand;
    if (s == "additive") return BuyerFamily::Additive;
    if (s == "table-gs") return BuyerFamily::TableGS;
    throw InvalidSpec("unknown buyer family: " + s);
}

/// Uniform market: buyers and sellers with integer values drawn uniformly
/// from [value_lo, value_hi], divided by `denominator`. Sellers hold between
/// 1 and m units of a uniformly chosen type.
///
/// When `calibrated_k` is non-empty it must have g entries and the counts
/// above are ignored: for every type x it places k_x unit-demand buyers in the
/// high band and k_x single-unit sellers in the low band (the efficient
/// traders), plus k_x of each on the wrong side of the gap, so the optimal
/// volume of x is exactly k_x.
struct GeneratorSpec {
    int g = 1;
    int buyers = 0;
    int sellers = 0;
    int m = 1;
    BuyerFamily family = BuyerFamily::UnitDemand;
    std::int64_t value_lo = 0;
    std::int64_t value_hi = 100;
    std::int64_t denominator = 1;
    std::vector<int> calibrated_k;

    friend bool operator==(const GeneratorSpec&, const GeneratorSpec&) = default;

    void validate() const {
        if (g < 1 || g > kMaxItemTypes) throw InvalidSpec("g must be in [1, 16]");
        if (buyers < 0 || sellers < 0) throw InvalidSpec("agent counts must be non-negative");
        if (m < 1) throw InvalidSpec("m must be at least 1");
        if (value_lo < 0 || value_lo > value_hi) throw InvalidSpec("value range must satisfy 0 <= lo <= hi");
        if (denominator < 1) throw InvalidSpec("denominator must be positive");
        if (!calibrated_k.empty()) {
            if (int(calibrated_k.size()) != g) throw InvalidSpec("calibrated_k needs one entry per type");
            for (int k : calibrated_k)
                if (k < 0) throw InvalidSpec("calibrated_k entries must be non-negative");
        }
    }
};

/// OXS valuation: the buyer has `slots` slots with a weight per (slot, type)
/// and values a bundle at its best assignment of items to distinct slots.
/// Such valuations are gross substitutes.
inline BuyerValuation oxs_valuation(int g, const std::vector<std::vector<Rational>>& weights) {
    const std::size_t n = std::size_t(1) << g;
    std::vector<Rational> f(n);
    for (const auto& w : weights) {
        std::vector<Rational> next = f;
        for (std::uint32_t mask = 1; mask < n; ++mask)
            for (int x = 0; x < g; ++x)
                if (Bundle(mask).contains(x)) {
                    Rational cand = f[mask & ~(1u << x)] + w[x];
                    if (cand > next[mask]) next[mask] = std::move(cand);
                }
        f = std::move(next);
    }
    return BuyerValuation::table(g, std::move(f));
}

namespace detail {

inline Rational draw(Rng& rng, std::int64_t lo, std::int64_t hi, std::int64_t den) {
    return Rational(rng.uniform(lo, hi), den);
}

inline Market calibrated_market(const GeneratorSpec& spec, std::uint64_t seed) {
    Rng rng = Rng::stream(seed, "generator");
    Market market;
    market.g = spec.g;
    // Bands: low [0, 40], high [60, 100], scaled to the configured range.
    const std::int64_t lo = spec.value_lo, hi = spec.value_hi;
    const std::int64_t span = hi - lo;
    const std::int64_t low_hi = lo + span * 2 / 5, high_lo = lo + span * 3 / 5;
    for (int x = 0; x < spec.g; ++x) {
        for (int i = 0; i < 2 * spec.calibrated_k[std::size_t(x)]; ++i) {
            bool efficient = i % 2 == 0;
            std::vector<Rational> values(std::size_t(spec.g));
            values[std::size_t(x)] = efficient ? detail::draw(rng, high_lo, hi, spec.denominator)
                                               : detail::draw(rng, lo, low_hi, spec.denominator);
            market.buyers.push_back({"b" + std::to_string(market.buyers.size()),
                                     BuyerValuation::unit_demand(std::move(values))});
            Rational ask = efficient ? detail::draw(rng, lo, low_hi, spec.denominator)
                                     : detail::draw(rng, high_lo, hi, spec.denominator);
            market.sellers.push_back({"s" + std::to_string(market.sellers.size()), SellerValuation(ItemType{x}, {ask})});
        }
    }
    return market;
}

}  // namespace detail

/// Deterministic in (spec, seed).
inline Market generate_market(const GeneratorSpec& spec, std::uint64_t seed) {
    spec.validate();
    if (!spec.calibrated_k.empty()) return detail::calibrated_market(spec, seed);

    Rng rng = Rng::stream(seed, "generator");
    auto draw = [&] { return detail::draw(rng, spec.value_lo, spec.value_hi, spec.denominator); };
    Market market;
    market.g = spec.g;
    for (int i = 0; i < spec.buyers; ++i) {
        BuyerValuation v;
        if (spec.family == BuyerFamily::TableGS) {
            int slots = int(rng.uniform(1, spec.g));
            std::vector<std::vector<Rational>> w(static_cast<std::size_t>(slots));
            for (auto& row : w)
                for (int x = 0; x < spec.g; ++x) row.push_back(draw());
            v = oxs_valuation(spec.g, w);
        } else {
            std::vector<Rational> values;
            for (int x = 0; x < spec.g; ++x) values.push_back(draw());
            v = spec.family == BuyerFamily::Additive ? BuyerValuation::additive(std::move(values))
                                                     : BuyerValuation::unit_demand(std::move(values));
        }
        market.buyers.push_back({"b" + std::to_string(i), std::move(v)});
    }
    for (int j = 0; j < spec.sellers; ++j) {
        int type = int(rng.uniform(0, spec.g - 1));
        int units = int(rng.uniform(1, spec.m));
        std::vector<Rational> marginals;
        for (int u = 0; u < units; ++u) marginals.push_back(draw());
        std::sort(marginals.begin(), marginals.end(), std::greater<>());
        market.sellers.push_back({"s" + std::to_string(j), SellerValuation(ItemType{type}, std::move(marginals))});
    }
    return market;
}

}  // namespace mida
