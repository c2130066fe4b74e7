#pragma once

// Walrasian equilibrium: minimal clearing prices, a clearing allocation, and a
// brute-force optimum used as an independent check.
//
// Prices are found by minimizing L(p) = sum of every agent's best gain at p.
// L is convex and, once all values are scaled to integers, L-natural convex
// on the integer lattice, so local optimality against the moves p +/- 1_S is
// global optimality. The search runs on the lattice with step 1/LCM of all
// input denominators.

#include "mida/demand.hpp"
#include "mida/model.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <vector>

namespace mida {

struct Equilibrium {
    PriceVector prices;
    std::vector<Bundle> buyer_bundles;   // by buyer index
    std::vector<int> seller_quantities;  // units sold, by seller index
    Rational gain;
    std::vector<Rational> gain_per_type;  // marginal-gain decomposition, ascending type order
    std::vector<int> per_type_volume;     // k_x
};

/// A unit of a seller: the `unit_index`-th marginal of seller `owner`.
struct VirtualSellerRef {
    std::size_t owner = 0;
    int unit_index = 0;
    friend auto operator<=>(const VirtualSellerRef&, const VirtualSellerRef&) = default;
};

struct EfficientTraderSets {
    std::vector<std::vector<std::size_t>> buyers;        // Bxs, buyer indices per type
    std::vector<std::vector<VirtualSellerRef>> sellers;  // Sxs per type
};

namespace detail {

inline Rational lattice_step(const Market& market) {
    std::vector<Rational> values;
    for (const auto& b : market.buyers)
        for (const auto& v : b.valuation.table()) values.push_back(v);
    for (const auto& s : market.sellers)
        for (const auto& v : s.valuation.marginals()) values.push_back(v);
    return Rational(BigRational(BigInt(1), denominator_lcm(values)));
}

class PriceSearch {
public:
    explicit PriceSearch(const Market& market) : market_(market), g_(market.g), step_(lattice_step(market)) {}

    PriceVector run() {
        PriceVector p(g_);
        Rational value = L(p);
        constexpr int kGuard = 1'000'000;
        int iter = 0;
        for (;; ++iter) {
            if (iter > kGuard) throw NoEquilibriumFound("price search did not converge");
            if (auto s = best_move(p, value, +1)) {
                line_search(p, value, *s, +1);
                continue;
            }
            if (auto s = best_move(p, value, -1)) {
                line_search(p, value, *s, -1);
                continue;
            }
            break;
        }
        lower_to_minimal(p, value);
        return p;
    }

private:
    Rational L(const PriceVector& p) const { return indirect_utility(market_, p); }

    PriceVector moved(const PriceVector& p, Bundle s, const Rational& amount) const {
        PriceVector q = p;
        for (int t : s.types()) q[t] += amount;
        return q;
    }

    Bundle positive_coords(const PriceVector& p) const {
        Bundle b;
        for (int t = 0; t < g_; ++t)
            if (p[t].sign() > 0) b = b.with(t);
        return b;
    }

    /// Steepest single-step improvement in direction dir; upward moves take the
    /// smallest minimizing set so prices never overshoot the minimal optimum.
    std::optional<Bundle> best_move(const PriceVector& p, const Rational& value, int dir) const {
        const std::uint32_t universe = dir > 0 ? Bundle::full(g_).mask() : positive_coords(p).mask();
        std::optional<Rational> best;
        std::vector<Bundle> argmin;
        for (std::uint32_t s = universe; s; s = (s - 1) & universe) {
            Rational f = L(moved(p, Bundle(s), dir > 0 ? step_ : -step_));
            if (!best || f < *best) {
                best = f;
                argmin.assign(1, Bundle(s));
            } else if (f == *best) {
                argmin.push_back(Bundle(s));
            }
        }
        if (!best || *best >= value) return std::nullopt;
        Bundle meet = argmin.front();
        for (Bundle b : argmin) meet = meet & b;
        if (!meet.empty() && L(moved(p, meet, dir > 0 ? step_ : -step_)) == *best) return meet;
        return *std::min_element(argmin.begin(), argmin.end(), canonical_less);
    }

    /// Moves along dir * step * 1_S to the first minimizer of the convex
    /// restriction of L to that ray.
    void line_search(PriceVector& p, Rational& value, Bundle s, int dir) {
        std::optional<BigInt> tmax;
        if (dir < 0) {
            for (int t : s.types()) {
                BigRational r = p[t].to_big() / step_.to_big();
                BigInt n = boost::multiprecision::numerator(r) / boost::multiprecision::denominator(r);
                if (!tmax || n < *tmax) tmax = n;
            }
        }
        auto at = [&](const BigInt& t) {
            Rational amount = Rational(BigRational(t)) * step_;
            return L(moved(p, s, dir > 0 ? amount : -amount));
        };
        // done(t): t is the last admissible point, or the ray stops decreasing after t.
        auto done = [&](const BigInt& t) { return (tmax && t >= *tmax) || at(t + 1) >= at(t); };
        BigInt lo = 0, hi = 1;
        const BigInt cap = BigInt(1) << 2048;
        while (!done(hi)) {
            lo = hi;
            hi *= 2;
            if (tmax && hi > *tmax) hi = *tmax;
            if (hi > cap) throw NoEquilibriumFound("prices diverge");
        }
        while (hi - lo > 1) {
            BigInt mid = (lo + hi) / 2;
            if (done(mid)) hi = mid;
            else lo = mid;
        }
        Rational amount = Rational(BigRational(hi)) * step_;
        p = moved(p, s, dir > 0 ? amount : -amount);
        value = L(p);
    }

    /// From any minimizer, walks down inside the minimizer set. The set is
    /// closed under p -> p - 1_S for S the coordinates where p exceeds the
    /// minimal minimizer the most, so this stops exactly at the minimal one.
    void lower_to_minimal(PriceVector& p, const Rational& value) {
        for (;;) {
            const std::uint32_t universe = positive_coords(p).mask();
            Bundle join;
            for (std::uint32_t s = universe; s; s = (s - 1) & universe)
                if (L(moved(p, Bundle(s), -step_)) == value) join = join | Bundle(s);
            if (join.empty()) return;
            BigInt tmax;
            bool first = true;
            for (int t : join.types()) {
                BigRational r = p[t].to_big() / step_.to_big();
                BigInt n = boost::multiprecision::numerator(r) / boost::multiprecision::denominator(r);
                if (first || n < tmax) tmax = n;
                first = false;
            }
            auto stays = [&](const BigInt& t) {
                return L(moved(p, join, -(Rational(BigRational(t)) * step_))) == value;
            };
            BigInt lo = 1, hi = 2;
            while (hi <= tmax && stays(hi)) {
                lo = hi;
                hi *= 2;
            }
            if (hi > tmax) hi = tmax + 1;
            while (hi - lo > 1) {
                BigInt mid = (lo + hi) / 2;
                if (stays(mid)) lo = mid;
                else hi = mid;
            }
            p = moved(p, join, -(Rational(BigRational(lo)) * step_));
        }
    }

    const Market& market_;
    int g_;
    Rational step_;
};

/// Picks a demanded bundle per buyer so that every type's demand lies in
/// [lo, hi]. Starts from canonical bundles and repairs one unit at a time
/// along exchange paths; falls back to exhaustive search over count vectors.
class AllocationRepair {
public:
    AllocationRepair(std::vector<std::vector<Bundle>> demand, std::vector<int> lo, std::vector<int> hi)
        : demand_(std::move(demand)), lo_(std::move(lo)), hi_(std::move(hi)), g_(int(lo_.size())) {}

    std::vector<Bundle> run() {
        chosen_.clear();
        counts_.assign(std::size_t(g_), 0);
        for (const auto& d : demand_) {
            chosen_.push_back(d.front());
            for (int t : d.front().types()) ++counts_[std::size_t(t)];
        }
        std::size_t guard = 4 * demand_.size() * std::size_t(g_) + 16;
        while (guard-- > 0) {
            int x = violated();
            if (x < 0) return chosen_;
            if (!augment(x)) break;
        }
        return exhaustive();
    }

private:
    static constexpr int kNull = -1;

    int violated() const {
        for (int x = 0; x < g_; ++x)
            if (counts_[std::size_t(x)] < lo_[std::size_t(x)] || counts_[std::size_t(x)] > hi_[std::size_t(x)])
                return x;
        return -1;
    }

    bool in_demand(std::size_t i, Bundle b) const {
        return std::find(demand_[i].begin(), demand_[i].end(), b) != demand_[i].end();
    }

    /// Bundle buyer i would hold after giving up u and taking v (either may be
    /// kNull), if that swap is possible.
    std::optional<Bundle> swap_of(std::size_t i, int u, int v) const {
        Bundle b = chosen_[i];
        if (u != kNull) {
            if (!b.contains(u)) return std::nullopt;
            b = b.without(u);
        }
        if (v != kNull) {
            if (b.contains(v) || chosen_[i].contains(v)) return std::nullopt;
            b = b.with(v);
        }
        if (!in_demand(i, b)) return std::nullopt;
        return b;
    }

    /// Shifts one unit of demand out of x (if over) or into x (if under).
    bool augment(int x) {
        const bool over = counts_[std::size_t(x)] > hi_[std::size_t(x)];
        // Node index: type t -> t, null -> g_.
        auto node_of = [&](int n) { return n == g_ ? kNull : n; };
        std::vector<int> parent(std::size_t(g_ + 1), -2);
        std::vector<std::size_t> via(std::size_t(g_ + 1));
        std::deque<int> queue;
        auto is_target = [&](int n) {
            if (over) return n == g_ || (n != x && counts_[std::size_t(n)] < hi_[std::size_t(n)]);
            return n == x;
        };
        if (over) {
            parent[std::size_t(x)] = -1;
            queue.push_back(x);
        } else {
            parent[std::size_t(g_)] = -1;
            queue.push_back(g_);
            for (int s = 0; s < g_; ++s)
                if (s != x && counts_[std::size_t(s)] > lo_[std::size_t(s)]) {
                    parent[std::size_t(s)] = -1;
                    queue.push_back(s);
                }
        }
        int reached = -1;
        while (!queue.empty() && reached < 0) {
            int u = queue.front();
            queue.pop_front();
            for (int v = 0; v <= g_ && reached < 0; ++v) {
                if (v == u || parent[std::size_t(v)] != -2) continue;
                if (u == g_ && v == g_) continue;
                for (std::size_t i = 0; i < demand_.size(); ++i) {
                    if (swap_of(i, node_of(u), node_of(v))) {
                        parent[std::size_t(v)] = u;
                        via[std::size_t(v)] = i;
                        if (is_target(v)) reached = v;
                        else queue.push_back(v);
                        break;
                    }
                }
            }
        }
        if (reached < 0) return false;

        std::vector<std::pair<int, int>> edges;  // (from, to) in path order
        for (int n = reached; parent[std::size_t(n)] != -1; n = parent[std::size_t(n)])
            edges.emplace_back(parent[std::size_t(n)], n);
        std::reverse(edges.begin(), edges.end());
        auto saved = chosen_;
        for (auto [u, v] : edges) {
            std::size_t i = via[std::size_t(v)];
            auto nb = swap_of(i, node_of(u), node_of(v));
            if (!nb) {
                chosen_ = std::move(saved);
                return false;
            }
            chosen_[i] = *nb;
        }
        counts_.assign(std::size_t(g_), 0);
        for (Bundle b : chosen_)
            for (int t : b.types()) ++counts_[std::size_t(t)];
        return true;
    }

    /// DP over buyers on capped count vectors.
    std::vector<Bundle> exhaustive() const {
        std::vector<std::size_t> radix(static_cast<std::size_t>(g_));
        std::size_t states = 1;
        for (int t = 0; t < g_; ++t) {
            radix[std::size_t(t)] = states;
            states *= std::size_t(hi_[std::size_t(t)] + 1);
            if (states > 5'000'000) throw NoEquilibriumFound("clearing allocation search too large");
        }
        const std::size_t n = demand_.size();
        // choice[i][state] = index into demand_[i] + 1 used to reach state after buyer i; 0 = unreachable.
        std::vector<std::vector<std::uint16_t>> choice(n, std::vector<std::uint16_t>(states, 0));
        std::vector<char> reach(states, 0), next(states, 0);
        reach[0] = 1;
        auto shift = [&](std::size_t state, Bundle b) -> std::optional<std::size_t> {
            for (int t : b.types()) {
                std::size_t c = (state / radix[std::size_t(t)]) % std::size_t(hi_[std::size_t(t)] + 1);
                if (int(c) + 1 > hi_[std::size_t(t)]) return std::nullopt;
                state += radix[std::size_t(t)];
            }
            return state;
        };
        for (std::size_t i = 0; i < n; ++i) {
            std::fill(next.begin(), next.end(), 0);
            for (std::size_t s = 0; s < states; ++s) {
                if (!reach[s]) continue;
                for (std::size_t d = 0; d < demand_[i].size(); ++d)
                    if (auto to = shift(s, demand_[i][d]); to && !next[*to]) {
                        next[*to] = 1;
                        choice[i][*to] = std::uint16_t(d + 1);
                    }
            }
            std::swap(reach, next);
        }
        for (std::size_t s = 0; s < states; ++s) {
            if (!reach[s]) continue;
            bool ok = true;
            for (int t = 0; t < g_ && ok; ++t)
                ok = int((s / radix[std::size_t(t)]) % std::size_t(hi_[std::size_t(t)] + 1)) >= lo_[std::size_t(t)];
            if (!ok) continue;
            std::vector<Bundle> out(n);
            std::size_t state = s;
            for (std::size_t i = n; i-- > 0;) {
                Bundle b = demand_[i][choice[i][state] - 1u];
                out[i] = b;
                for (int t : b.types()) state -= radix[std::size_t(t)];
            }
            return out;
        }
        throw NoEquilibriumFound("no clearing allocation at the computed prices");
    }

    std::vector<std::vector<Bundle>> demand_;
    std::vector<int> lo_, hi_;
    int g_;
    std::vector<Bundle> chosen_;
    std::vector<int> counts_;
};

}  // namespace detail

/// Minimal Walrasian price vector. With no buyers this is the zero vector;
/// with no supply of a type, the lowest price at which no buyer strictly
/// wants it.
inline PriceVector walrasian_prices(const Market& market) {
    market.validate();
    return detail::PriceSearch(market).run();
}

/// Per-type split of a buyer's value along ascending type order.
inline std::vector<Rational> marginal_values_by_type(const BuyerValuation& v, Bundle b) {
    std::vector<Rational> out(std::size_t(v.g()));
    Bundle prefix;
    for (int t = 0; t < v.g(); ++t) {
        if (!b.contains(t)) continue;
        Bundle next = prefix.with(t);
        out[std::size_t(t)] = v.value(next) - v.value(prefix);
        prefix = next;
    }
    return out;
}

/// Fills in gain, the per-type decomposition and volumes of an allocation at
/// the given prices.
inline void account(const Market& market, Equilibrium& eq) {
    eq.gain = Rational();
    eq.gain_per_type.assign(std::size_t(market.g), Rational());
    eq.per_type_volume.assign(std::size_t(market.g), 0);
    for (std::size_t i = 0; i < market.buyers.size(); ++i) {
        Bundle b = eq.buyer_bundles[i];
        auto mv = marginal_values_by_type(market.buyers[i].valuation, b);
        for (int t : b.types()) {
            eq.gain_per_type[std::size_t(t)] += mv[std::size_t(t)] - eq.prices[t];
            ++eq.per_type_volume[std::size_t(t)];
        }
    }
    for (std::size_t j = 0; j < market.sellers.size(); ++j) {
        const auto& v = market.sellers[j].valuation;
        int t = v.item_type().index;
        int q = eq.seller_quantities[j];
        eq.gain_per_type[std::size_t(t)] += eq.prices[t] * Rational(q) - v.cost_of_selling(q);
    }
    for (const auto& x : eq.gain_per_type) eq.gain += x;
}

/// A clearing allocation at prices p, assuming p is Walrasian.
inline Equilibrium clearing_allocation(const Market& market, const PriceVector& p) {
    const int g = market.g;
    std::vector<std::vector<Bundle>> demand;
    for (const auto& b : market.buyers) demand.push_back(buyer_demand(b.valuation, p).demand_set);
    std::vector<int> lo(std::size_t(g), 0), hi(std::size_t(g), 0);
    std::vector<SupplyResult> supply;
    for (const auto& s : market.sellers) {
        int t = s.valuation.item_type().index;
        supply.push_back(seller_supply(s.valuation, p[t]));
        lo[std::size_t(t)] += supply.back().min_quantity();
        hi[std::size_t(t)] += supply.back().max_quantity();
    }

    Equilibrium eq;
    eq.prices = p;
    eq.buyer_bundles = detail::AllocationRepair(std::move(demand), lo, hi).run();

    std::vector<int> need(std::size_t(g), 0);
    for (Bundle b : eq.buyer_bundles)
        for (int t : b.types()) ++need[std::size_t(t)];
    for (int t = 0; t < g; ++t) need[std::size_t(t)] -= lo[std::size_t(t)];
    for (const auto& s : supply) eq.seller_quantities.push_back(s.min_quantity());
    for (std::size_t j = 0; j < market.sellers.size(); ++j) {
        auto t = std::size_t(market.sellers[j].valuation.item_type().index);
        int extra = std::min(need[t], supply[j].max_quantity() - supply[j].min_quantity());
        eq.seller_quantities[j] += extra;
        need[t] -= extra;
    }
    for (int t = 0; t < g; ++t)
        if (need[std::size_t(t)] != 0) throw NoEquilibriumFound("supply cannot match demand");

    account(market, eq);
    if (eq.gain != indirect_utility(market, p)) throw NoEquilibriumFound("allocation is not optimal at the prices");
    return eq;
}

inline Equilibrium solve_walrasian(const Market& market) { return clearing_allocation(market, walrasian_prices(market)); }

/// Bxs: buyers holding x in the equilibrium. Sxs: the sold units, which are
/// each seller's lowest-valued ones.
inline EfficientTraderSets efficient_trader_sets(const Market& market, const Equilibrium& eq) {
    EfficientTraderSets out;
    out.buyers.resize(std::size_t(market.g));
    out.sellers.resize(std::size_t(market.g));
    for (std::size_t i = 0; i < market.buyers.size(); ++i)
        for (int t : eq.buyer_bundles[i].types()) out.buyers[std::size_t(t)].push_back(i);
    for (std::size_t j = 0; j < market.sellers.size(); ++j) {
        const auto& v = market.sellers[j].valuation;
        for (int u = v.units() - eq.seller_quantities[j]; u < v.units(); ++u)
            out.sellers[std::size_t(v.item_type().index)].push_back({j, u});
    }
    return out;
}

struct BruteForceResult {
    Rational gain;
    std::vector<Bundle> buyer_bundles;
    std::vector<int> seller_quantities;
};

/// Exhaustive maximum gain-from-trade over all materially balanced
/// allocations. Limited to 12 units and 8 buyers.
inline BruteForceResult brute_force_optimal_gain(const Market& market) {
    market.validate();
    const int g = market.g;
    int units = 0;
    for (const auto& s : market.sellers) units += s.valuation.units();
    if (units > 12 || market.buyers.size() > 8) throw TooLarge("brute force is limited to 12 units and 8 buyers");

    std::vector<int> cap(static_cast<std::size_t>(g));
    std::vector<std::size_t> radix(static_cast<std::size_t>(g));
    std::size_t states = 1;
    for (int t = 0; t < g; ++t) {
        cap[std::size_t(t)] = market.total_units(t);
        radix[std::size_t(t)] = states;
        states *= std::size_t(cap[std::size_t(t)] + 1);
    }
    auto count = [&](std::size_t s, int t) { return int((s / radix[std::size_t(t)]) % std::size_t(cap[std::size_t(t)] + 1)); };

    // Buyers: best value for each demanded count vector.
    const std::size_t nb = market.buyers.size();
    std::vector<std::vector<std::optional<Rational>>> value(nb + 1, std::vector<std::optional<Rational>>(states));
    std::vector<std::vector<Bundle>> pick(nb + 1, std::vector<Bundle>(states));
    value[0][0] = Rational();
    for (std::size_t i = 0; i < nb; ++i) {
        const auto& v = market.buyers[i].valuation;
        for (std::size_t s = 0; s < states; ++s) {
            if (!value[i][s]) continue;
            for (std::uint32_t mask = 0; mask < (1u << g); ++mask) {
                Bundle b(mask);
                std::size_t to = s;
                bool ok = true;
                for (int t : b.types()) {
                    if (count(to, t) == cap[std::size_t(t)]) ok = false;
                    to += radix[std::size_t(t)];
                }
                if (!ok) continue;
                Rational cand = *value[i][s] + v.value(b);
                if (!value[i + 1][to] || cand > *value[i + 1][to]) {
                    value[i + 1][to] = cand;
                    pick[i + 1][to] = b;
                }
            }
        }
    }

    // Sellers, per type: cheapest way to supply c units.
    std::vector<std::vector<Rational>> cost(static_cast<std::size_t>(g));
    std::vector<std::vector<std::vector<int>>> split(static_cast<std::size_t>(g));  // split[t][c] = quantities of that type's sellers
    for (int t = 0; t < g; ++t) {
        std::vector<std::size_t> owners;
        for (std::size_t j = 0; j < market.sellers.size(); ++j)
            if (market.sellers[j].valuation.item_type().index == t) owners.push_back(j);
        std::map<int, std::pair<Rational, std::vector<int>>> best{{0, {Rational(), {}}}};
        for (std::size_t j : owners) {
            std::map<int, std::pair<Rational, std::vector<int>>> next;
            const auto& v = market.sellers[j].valuation;
            for (const auto& [c, entry] : best)
                for (int q = 0; q <= v.units(); ++q) {
                    Rational cand = entry.first + v.cost_of_selling(q);
                    auto it = next.find(c + q);
                    if (it == next.end() || cand < it->second.first) {
                        auto qs = entry.second;
                        qs.push_back(q);
                        next[c + q] = {cand, std::move(qs)};
                    }
                }
            best = std::move(next);
        }
        cost[std::size_t(t)].resize(std::size_t(cap[std::size_t(t)] + 1));
        split[std::size_t(t)].resize(std::size_t(cap[std::size_t(t)] + 1));
        for (auto& [c, entry] : best) {
            cost[std::size_t(t)][std::size_t(c)] = entry.first;
            split[std::size_t(t)][std::size_t(c)] = entry.second;
        }
    }

    BruteForceResult r;
    std::size_t best_state = 0;
    for (std::size_t s = 0; s < states; ++s) {
        if (!value[nb][s]) continue;
        Rational gain = *value[nb][s];
        for (int t = 0; t < g; ++t) gain -= cost[std::size_t(t)][std::size_t(count(s, t))];
        if (gain > r.gain) {
            r.gain = gain;
            best_state = s;
        }
    }
    r.buyer_bundles.resize(nb);
    std::size_t s = best_state;
    for (std::size_t i = nb; i > 0; --i) {
        Bundle b = pick[i][s];
        r.buyer_bundles[i - 1] = b;
        for (int t : b.types()) s -= radix[std::size_t(t)];
    }
    r.seller_quantities.assign(market.sellers.size(), 0);
    for (int t = 0; t < g; ++t) {
        std::size_t k = 0;
        const auto& qs = split[std::size_t(t)][std::size_t(count(best_state, t))];
        for (std::size_t j = 0; j < market.sellers.size(); ++j)
            if (market.sellers[j].valuation.item_type().index == t) r.seller_quantities[j] = qs[k++];
    }
    return r;
}

}  // namespace mida
