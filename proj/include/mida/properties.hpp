#pragma once

// Valuation-class checkers: diminishing marginal returns, gross substitutes
// (grid based) and downward demand flow.

#include "mida/demand.hpp"
#include "mida/model.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace mida {

/// True iff the marginals are weakly decreasing.
inline bool is_dmr(std::span<const Rational> marginals) {
    for (std::size_t i = 1; i < marginals.size(); ++i)
        if (marginals[i] > marginals[i - 1]) return false;
    return true;
}

inline bool is_dmr(const SellerValuation& v) { return is_dmr(std::span<const Rational>(v.marginals())); }

/// Distinct non-negative values of v(B + x) - v(B), i.e. the prices at which
/// some demand decision can flip.
inline std::vector<Rational> marginal_values(const BuyerValuation& v) {
    std::set<Rational> out;
    const auto n = std::uint32_t(1) << v.g();
    for (std::uint32_t mask = 0; mask < n; ++mask)
        for (int x = 0; x < v.g(); ++x)
            if (!Bundle(mask).contains(x)) {
                Rational d = v.value(Bundle(mask).with(x)) - v.value(Bundle(mask));
                if (d.sign() >= 0) out.insert(std::move(d));
            }
    return {out.begin(), out.end()};
}

/// Zero, every distinct marginal value, the midpoints between consecutive
/// ones, and one point above the largest.
inline std::vector<Rational> default_price_grid(const BuyerValuation& v) {
    std::set<Rational> base{Rational(0)};
    for (auto& m : marginal_values(v)) base.insert(m);
    std::vector<Rational> sorted(base.begin(), base.end());
    std::vector<Rational> grid;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        grid.push_back(sorted[i]);
        if (i + 1 < sorted.size()) grid.push_back((sorted[i] + sorted[i + 1]) / 2);
    }
    grid.push_back(sorted.back() + 1);
    return grid;
}

struct GsViolation {
    PriceVector from;
    PriceVector to;
    Bundle demanded;  // demanded at `from`, with no counterpart at `to`
    int raised_type = 0;

    [[nodiscard]] std::string describe() const {
        return "bundle " + to_string(demanded) + " demanded at p=" + to_string(from) + " but no demanded bundle at q=" +
               to_string(to) + " keeps the items whose price did not change";
    }
};

/// Searches the grid for a pair p <= q violating gross substitutes: some
/// D in demand(p) such that no D' in demand(q) contains {y in D : q_y = p_y}.
///
/// Any increase p -> q on the product grid decomposes into single-coordinate
/// moves to the next grid value, and the condition composes along such a
/// chain, so only those moves are checked.
inline std::optional<GsViolation> find_gs_violation(const BuyerValuation& v, std::vector<Rational> grid) {
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.empty() || grid.front().sign() < 0) throw GridTooCoarse("price grid must be non-empty and non-negative");
    for (const auto& m : marginal_values(v))
        if (!std::binary_search(grid.begin(), grid.end(), m))
            throw GridTooCoarse("price grid misses the marginal value " + m.to_string());

    const int g = v.g();
    const std::size_t side = grid.size();
    std::size_t points = 1;
    for (int i = 0; i < g; ++i) {
        points *= side;
        if (points > (std::size_t(1) << 24)) throw GridTooLarge("gross-substitutes grid has too many points");
    }

    auto price_at = [&](std::size_t idx) {
        PriceVector p(g);
        for (int t = 0; t < g; ++t) {
            p[t] = grid[idx % side];
            idx /= side;
        }
        return p;
    };

    std::vector<std::vector<Bundle>> demand(points);
    for (std::size_t idx = 0; idx < points; ++idx) demand[idx] = buyer_demand(v, price_at(idx)).demand_set;

    std::size_t stride = 1;
    for (int y = 0; y < g; ++y, stride *= side) {
        for (std::size_t idx = 0; idx < points; ++idx) {
            if ((idx / stride) % side + 1 >= side) continue;
            const auto& at_q = demand[idx + stride];
            for (Bundle d : demand[idx]) {
                Bundle keep = d.without(y);
                bool ok = std::any_of(at_q.begin(), at_q.end(), [&](Bundle e) { return keep.subset_of(e); });
                if (!ok) return GsViolation{price_at(idx), price_at(idx + stride), d, y};
            }
        }
    }
    return std::nullopt;
}

/// Unit-demand and additive valuations are gross substitutes by construction;
/// tables are checked on the supplied grid.
inline bool is_gross_substitute(const BuyerValuation& v, const std::vector<Rational>& grid) {
    if (v.kind() != ValuationKind::Table) return true;
    return !find_gs_violation(v, grid).has_value();
}

inline bool is_gross_substitute(const BuyerValuation& v) { return is_gross_substitute(v, default_price_grid(v)); }

/// Returns the first item violating downward demand flow for the move from
/// bundle `before` to bundle `after` under price increments `delta`.
inline std::optional<int> ddf_violation(Bundle before, Bundle after, std::span<const Rational> delta) {
    const int g = int(delta.size());
    for (int x = 0; x < g; ++x) {
        bool stopped = before.contains(x) && !after.contains(x);
        bool started = !before.contains(x) && after.contains(x);
        if (stopped && delta[x].sign() <= 0) {
            bool ok = false;
            for (int y = 0; y < g && !ok; ++y) ok = !before.contains(y) && after.contains(y) && delta[y] < delta[x];
            if (!ok) return x;
        }
        if (started && delta[x].sign() >= 0) {
            bool ok = false;
            for (int y = 0; y < g && !ok; ++y) ok = before.contains(y) && !after.contains(y) && delta[y] > delta[x];
            if (!ok) return x;
        }
    }
    return std::nullopt;
}

inline std::vector<Rational> price_delta(const PriceVector& from, const PriceVector& to) {
    std::vector<Rational> d;
    for (int t = 0; t < from.g(); ++t) d.push_back(to[t] - from[t]);
    return d;
}

/// Picks the bundle of `at_q` an agent holding `before` moves to: a
/// DDF-consistent one if any exists, then closest to `before`, then canonical.
inline Bundle ddf_successor(Bundle before, const std::vector<Bundle>& at_q, std::span<const Rational> delta,
                            std::optional<Bundle> preferred = std::nullopt) {
    auto key = [&](Bundle b) {
        bool consistent = !ddf_violation(before, b, delta).has_value();
        bool pref = preferred && *preferred == b;
        int distance = Bundle(before.mask() ^ b.mask()).size();
        return std::tuple(!consistent, !pref, distance, b.size(), b.mask());
    };
    return *std::min_element(at_q.begin(), at_q.end(), [&](Bundle a, Bundle b) { return key(a) < key(b); });
}

struct DdfReport {
    bool holds = true;
    Bundle before;
    Bundle after;
    std::optional<int> violating_item;
};

/// Downward demand flow for the move from prices p to q. The agent starts at
/// the canonical bundle demanded at p and may move to any bundle demanded at q.
inline DdfReport check_ddf(const BuyerValuation& v, const PriceVector& p, const PriceVector& q) {
    auto delta = price_delta(p, q);
    DdfReport r;
    r.before = buyer_demand(v, p).canonical();
    r.after = ddf_successor(r.before, buyer_demand(v, q).demand_set, delta);
    r.violating_item = ddf_violation(r.before, r.after, delta);
    r.holds = !r.violating_item.has_value();
    return r;
}

}  // namespace mida
