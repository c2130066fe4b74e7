#pragma once

// The random-halving double auction. Traders are split into halves R and L by
// fair coins; each half computes its Walrasian prices, and the other half
// trades at them in a serial lottery.

#include "mida/demand.hpp"
#include "mida/equilibrium.hpp"
#include "mida/model.hpp"
#include "mida/random.hpp"

#include <array>
#include <string>
#include <vector>

namespace mida {

enum class Half { R = 0, L = 1 };

inline const char* to_string(Half h) { return h == Half::R ? "R" : "L"; }

struct Halving {
    std::vector<Half> buyers;   // by buyer index
    std::vector<Half> sellers;  // by seller index

    static Halving all(const Market& m, Half h) {
        return {std::vector<Half>(m.buyers.size(), h), std::vector<Half>(m.sellers.size(), h)};
    }
    friend bool operator==(const Halving&, const Halving&) = default;
};

/// Order of service in one half. Indices refer to the full market.
struct Lottery {
    std::vector<std::vector<std::size_t>> seller_lines;  // per type
    std::vector<std::size_t> buyer_line;
    friend bool operator==(const Lottery&, const Lottery&) = default;
};

enum class TieBreak { Canonical, MaxCardinality };

inline const char* to_string(TieBreak t) { return t == TieBreak::Canonical ? "canonical" : "max-cardinality"; }

inline TieBreak parse_tie_break(const std::string& s) {
    if (s == "canonical") return TieBreak::Canonical;
    if (s == "max-cardinality") return TieBreak::MaxCardinality;
    throw InvalidSpec("unknown tie-break policy: " + s);
}

struct MechanismOptions {
    TieBreak tie_break = TieBreak::Canonical;
    friend bool operator==(const MechanismOptions&, const MechanismOptions&) = default;
};

struct TradeOutcome {
    std::vector<Bundle> buyer_bundles;
    std::vector<int> seller_units;
    std::vector<Rational> buyer_payments;   // negative: the buyer pays
    std::vector<Rational> seller_payments;  // positive: the seller receives
    PriceVector prices_R;                   // computed in R, posted in L
    PriceVector prices_L;                   // computed in L, posted in R
    Halving halving;
    Lottery lottery_R;
    Lottery lottery_L;
    Rational gain_total;
    std::vector<Rational> gain_per_type;
    std::vector<int> volume_R;
    std::vector<int> volume_L;
    bool degenerate_R = false;
    bool degenerate_L = false;

    [[nodiscard]] const PriceVector& prices_posted_in(Half h) const { return h == Half::R ? prices_L : prices_R; }
    [[nodiscard]] std::vector<int> volume() const {
        std::vector<int> v = volume_R;
        for (std::size_t t = 0; t < v.size(); ++t) v[t] += volume_L[t];
        return v;
    }
};

/// Sub-market of the agents assigned to h, with maps back to full-market indices.
struct HalfMarket {
    Market market;
    std::vector<std::size_t> buyer_index;
    std::vector<std::size_t> seller_index;
};

inline HalfMarket half_market(const Market& m, const Halving& halving, Half h) {
    HalfMarket out;
    out.market.g = m.g;
    for (std::size_t i = 0; i < m.buyers.size(); ++i)
        if (halving.buyers[i] == h) {
            out.market.buyers.push_back(m.buyers[i]);
            out.buyer_index.push_back(i);
        }
    for (std::size_t j = 0; j < m.sellers.size(); ++j)
        if (halving.sellers[j] == h) {
            out.market.sellers.push_back(m.sellers[j]);
            out.seller_index.push_back(j);
        }
    return out;
}

inline void validate_halving(const Market& m, const Halving& halving) {
    if (halving.buyers.size() != m.buyers.size() || halving.sellers.size() != m.sellers.size())
        throw InvalidHalving("halving must assign every agent to R or L");
}

/// Coins for buyers in order, then sellers.
inline Halving random_halving(const Market& m, std::uint64_t seed) {
    Rng rng = Rng::stream(seed, "halving");
    Halving h;
    for (std::size_t i = 0; i < m.buyers.size(); ++i) h.buyers.push_back(rng.coin() ? Half::R : Half::L);
    for (std::size_t j = 0; j < m.sellers.size(); ++j) h.sellers.push_back(rng.coin() ? Half::R : Half::L);
    return h;
}

inline Lottery random_lottery(const Market& m, const Halving& halving, Half h, std::uint64_t seed) {
    const std::string tag = std::string("lottery-") + to_string(h);
    Lottery lot;
    for (std::size_t i = 0; i < m.buyers.size(); ++i)
        if (halving.buyers[i] == h) lot.buyer_line.push_back(i);
    Rng buyers = Rng::stream(seed, tag + "-buyers");
    buyers.shuffle(lot.buyer_line);
    lot.seller_lines.resize(std::size_t(m.g));
    for (std::size_t j = 0; j < m.sellers.size(); ++j)
        if (halving.sellers[j] == h) lot.seller_lines[std::size_t(m.sellers[j].valuation.item_type().index)].push_back(j);
    for (int t = 0; t < m.g; ++t) {
        Rng sellers = Rng::stream(seed, tag + "-sellers-" + std::to_string(t));
        sellers.shuffle(lot.seller_lines[std::size_t(t)]);
    }
    return lot;
}

inline Bundle pick_bundle(const DemandResult& d, TieBreak policy) {
    if (policy == TieBreak::Canonical) return d.canonical();
    Bundle best = d.demand_set.front();
    for (Bundle b : d.demand_set)
        if (b.size() > best.size()) best = b;
    return best;
}

/// Serial trade inside one half at posted prices. Writes into `out`; returns
/// the volume per type.
inline std::vector<int> serial_trade(const Market& m, const PriceVector& prices, const Lottery& lottery,
                                     TradeOutcome& out, const MechanismOptions& options = {}) {
    const int g = m.g;
    std::vector<std::size_t> front(std::size_t(g), 0);
    std::vector<int> volume(std::size_t(g), 0);
    // Advances type t's line past sellers who no longer want to sell at the price.
    auto available = [&](int t) {
        const auto& line = lottery.seller_lines[std::size_t(t)];
        auto& f = front[std::size_t(t)];
        while (f < line.size()) {
            std::size_t j = line[f];
            const auto& v = m.sellers[j].valuation;
            int sold = out.seller_units[j];
            if (sold < v.units() && (prices[t] - v.next_unit_value(sold)).sign() > 0) return true;
            ++f;
        }
        return false;
    };
    for (std::size_t i : lottery.buyer_line) {
        Bundle open;
        for (int t = 0; t < g; ++t)
            if (available(t)) open = open.with(t);
        if (open.empty()) break;
        Bundle b = pick_bundle(buyer_demand(m.buyers[i].valuation, prices, open), options.tie_break);
        out.buyer_bundles[i] = b;
        for (int t : b.types()) {
            std::size_t j = lottery.seller_lines[std::size_t(t)][front[std::size_t(t)]];
            ++out.seller_units[j];
            out.buyer_payments[i] -= prices[t];
            out.seller_payments[j] += prices[t];
            ++volume[std::size_t(t)];
        }
    }
    return volume;
}

/// Total and per-type gain of an outcome. Money cancels, so this depends only
/// on who holds what. Throws Unbalanced if some half-type is not cleared.
inline std::pair<Rational, std::vector<Rational>> gain_from_trade(const TradeOutcome& o, const Market& m) {
    const auto g = std::size_t(m.g);
    std::array<std::vector<int>, 2> bought{std::vector<int>(g), std::vector<int>(g)};
    std::array<std::vector<int>, 2> sold{std::vector<int>(g), std::vector<int>(g)};
    std::vector<Rational> per_type(g);
    for (std::size_t i = 0; i < m.buyers.size(); ++i) {
        Bundle b = o.buyer_bundles[i];
        auto mv = marginal_values_by_type(m.buyers[i].valuation, b);
        for (int t : b.types()) {
            per_type[std::size_t(t)] += mv[std::size_t(t)];
            ++bought[std::size_t(o.halving.buyers[i])][std::size_t(t)];
        }
    }
    for (std::size_t j = 0; j < m.sellers.size(); ++j) {
        const auto& v = m.sellers[j].valuation;
        auto t = std::size_t(v.item_type().index);
        per_type[t] -= v.cost_of_selling(o.seller_units[j]);
        sold[std::size_t(o.halving.sellers[j])][t] += o.seller_units[j];
    }
    for (int h = 0; h < 2; ++h)
        if (bought[std::size_t(h)] != sold[std::size_t(h)]) throw Unbalanced("units bought and sold differ in a half");
    Rational total;
    for (const auto& x : per_type) total += x;
    return {total, per_type};
}

/// Checks strong budget balance, ex-post individual rationality and material
/// balance. Throws InvariantViolation.
inline void verify_outcome(const Market& m, const TradeOutcome& o) {
    Rational sum;
    for (std::size_t i = 0; i < m.buyers.size(); ++i) {
        sum += o.buyer_payments[i];
        if ((m.buyers[i].valuation.value(o.buyer_bundles[i]) + o.buyer_payments[i]).sign() < 0)
            throw InvariantViolation("buyer " + m.buyers[i].id + " has negative gain");
    }
    for (std::size_t j = 0; j < m.sellers.size(); ++j) {
        sum += o.seller_payments[j];
        const auto& v = m.sellers[j].valuation;
        if (o.seller_units[j] < 0 || o.seller_units[j] > v.units())
            throw InvariantViolation("seller " + m.sellers[j].id + " sold more units than it holds");
        if ((o.seller_payments[j] - v.cost_of_selling(o.seller_units[j])).sign() < 0)
            throw InvariantViolation("seller " + m.sellers[j].id + " has negative gain");
    }
    if (!sum.is_zero()) throw InvariantViolation("payments do not sum to zero");
    try {
        auto [total, per_type] = gain_from_trade(o, m);
        if (total != o.gain_total) throw InvariantViolation("recorded gain does not match the allocation");
    } catch (const Unbalanced& e) {
        throw InvariantViolation(e.what());
    }
}

/// Realized gain of a single agent, measured with the market's valuations.
inline Rational agent_gain(const Market& m, const TradeOutcome& o, AgentRef a) {
    if (a.role == Role::Buyer) return m.buyers[a.index].valuation.value(o.buyer_bundles[a.index]) + o.buyer_payments[a.index];
    return o.seller_payments[a.index] - m.sellers[a.index].valuation.cost_of_selling(o.seller_units[a.index]);
}

/// Step 3 of a run: each half's prices, which depend only on the halving.
struct HalvingPrices {
    PriceVector prices_R;
    PriceVector prices_L;
    bool degenerate_R = false;
    bool degenerate_L = false;
};

inline HalvingPrices halving_prices(const Market& market, const Halving& halving) {
    validate_halving(market, halving);
    HalfMarket r = half_market(market, halving, Half::R);
    HalfMarket l = half_market(market, halving, Half::L);
    // A half without buyers or without sellers posts zero prices, and the
    // gain of the whole run is discarded.
    HalvingPrices hp;
    hp.degenerate_R = r.market.buyers.empty() || r.market.sellers.empty();
    hp.degenerate_L = l.market.buyers.empty() || l.market.sellers.empty();
    hp.prices_R = hp.degenerate_R ? PriceVector(market.g) : walrasian_prices(r.market);
    hp.prices_L = hp.degenerate_L ? PriceVector(market.g) : walrasian_prices(l.market);
    return hp;
}

/// Runs the mechanism with every random choice supplied and the prices
/// already computed for this halving.
inline TradeOutcome run_mida_with(const Market& market, const Halving& halving, const HalvingPrices& hp,
                                  const Lottery& lottery_R, const Lottery& lottery_L,
                                  const MechanismOptions& options = {}) {
    validate_halving(market, halving);
    TradeOutcome o;
    o.halving = halving;
    o.lottery_R = lottery_R;
    o.lottery_L = lottery_L;
    o.buyer_bundles.assign(market.buyers.size(), Bundle());
    o.buyer_payments.assign(market.buyers.size(), Rational());
    o.seller_units.assign(market.sellers.size(), 0);
    o.seller_payments.assign(market.sellers.size(), Rational());
    o.volume_R.assign(std::size_t(market.g), 0);
    o.volume_L.assign(std::size_t(market.g), 0);
    o.prices_R = hp.prices_R;
    o.prices_L = hp.prices_L;
    o.degenerate_R = hp.degenerate_R;
    o.degenerate_L = hp.degenerate_L;

    if (!o.degenerate_R && !o.degenerate_L) {
        o.volume_L = serial_trade(market, o.prices_R, lottery_L, o, options);
        o.volume_R = serial_trade(market, o.prices_L, lottery_R, o, options);
    }
    auto [total, per_type] = gain_from_trade(o, market);
    o.gain_total = total;
    o.gain_per_type = per_type;
    return o;
}

inline TradeOutcome run_mida_with(const Market& market, const Halving& halving, const Lottery& lottery_R,
                                  const Lottery& lottery_L, const MechanismOptions& options = {}) {
    market.validate();
    return run_mida_with(market, halving, halving_prices(market, halving), lottery_R, lottery_L, options);
}

inline TradeOutcome run_mida_with_halving(const Market& market, const Halving& halving, std::uint64_t lottery_seed,
                                          const MechanismOptions& options = {}) {
    validate_halving(market, halving);
    return run_mida_with(market, halving, random_lottery(market, halving, Half::R, lottery_seed),
                         random_lottery(market, halving, Half::L, lottery_seed), options);
}

inline TradeOutcome run_mida(const Market& market, std::uint64_t seed, const MechanismOptions& options = {}) {
    return run_mida_with_halving(market, random_halving(market, seed), seed, options);
}

}  // namespace mida
