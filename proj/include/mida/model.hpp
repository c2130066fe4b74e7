#pragma once

// Domain types: item-types, bundles, buyer and seller valuations, markets and
// price vectors.

#include "mida/errors.hpp"
#include "mida/rational.hpp"

#include <bit>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mida {

/// Bundle spaces are enumerated explicitly, so the number of item-types is capped.
inline constexpr int kMaxItemTypes = 16;

struct ItemType {
    int index = 0;
    friend bool operator==(ItemType, ItemType) = default;
};

/// A set of item-types, at most one unit of each.
class Bundle {
public:
    constexpr Bundle() = default;
    constexpr explicit Bundle(std::uint32_t mask) : mask_(mask) {}

    static Bundle of(std::initializer_list<int> types) {
        Bundle b;
        for (int t : types) b = b.with(t);
        return b;
    }
    static constexpr Bundle full(int g) { return Bundle(g >= 32 ? ~0u : ((1u << g) - 1u)); }

    [[nodiscard]] constexpr std::uint32_t mask() const { return mask_; }
    [[nodiscard]] constexpr bool empty() const { return mask_ == 0; }
    [[nodiscard]] constexpr int size() const { return std::popcount(mask_); }
    [[nodiscard]] constexpr bool contains(int type) const { return (mask_ >> type) & 1u; }
    [[nodiscard]] constexpr bool subset_of(Bundle o) const { return (mask_ & ~o.mask_) == 0; }
    [[nodiscard]] constexpr Bundle with(int type) const { return Bundle(mask_ | (1u << type)); }
    [[nodiscard]] constexpr Bundle without(int type) const { return Bundle(mask_ & ~(1u << type)); }
    [[nodiscard]] constexpr Bundle operator&(Bundle o) const { return Bundle(mask_ & o.mask_); }
    [[nodiscard]] constexpr Bundle operator|(Bundle o) const { return Bundle(mask_ | o.mask_); }

    [[nodiscard]] std::vector<int> types() const {
        std::vector<int> out;
        for (std::uint32_t m = mask_; m; m &= m - 1) out.push_back(std::countr_zero(m));
        return out;
    }

    friend constexpr bool operator==(Bundle, Bundle) = default;

private:
    std::uint32_t mask_ = 0;
};

/// Canonical tie-break order: cardinality ascending, then bitmask ascending.
constexpr bool canonical_less(Bundle a, Bundle b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a.mask() < b.mask();
}

inline std::string to_string(Bundle b) {
    std::string s = "{";
    bool first = true;
    for (int t : b.types()) {
        if (!first) s += ",";
        s += std::to_string(t);
        first = false;
    }
    return s + "}";
}

enum class ValuationKind { UnitDemand, Additive, Table };

inline const char* to_string(ValuationKind k) {
    switch (k) {
        case ValuationKind::UnitDemand: return "unit-demand";
        case ValuationKind::Additive: return "additive";
        case ValuationKind::Table: return "table";
    }
    return "?";
}

/// A buyer's value for every bundle of item-types. All kinds are materialized
/// into a 2^g table at construction so lookups are O(1).
class BuyerValuation {
public:
    BuyerValuation() = default;

    static BuyerValuation unit_demand(std::vector<Rational> per_type) {
        return from_per_type(ValuationKind::UnitDemand, std::move(per_type));
    }
    static BuyerValuation additive(std::vector<Rational> per_type) {
        return from_per_type(ValuationKind::Additive, std::move(per_type));
    }
    /// table[mask] is the value of the bundle with that bitmask; table[0] must be 0.
    static BuyerValuation table(int g, std::vector<Rational> table) {
        check_g(g);
        if (table.size() != (std::size_t(1) << g)) throw InvalidValuation("table must have 2^g entries");
        if (!table[0].is_zero()) throw InvalidValuation("value of the empty bundle must be 0");
        for (const auto& v : table)
            if (v.sign() < 0) throw InvalidValuation("bundle values must be non-negative");
        BuyerValuation b;
        b.kind_ = ValuationKind::Table;
        b.g_ = g;
        b.table_ = std::move(table);
        return b;
    }

    [[nodiscard]] ValuationKind kind() const { return kind_; }
    [[nodiscard]] int g() const { return g_; }
    [[nodiscard]] const Rational& value(Bundle b) const { return table_[b.mask()]; }
    [[nodiscard]] const std::vector<Rational>& table() const { return table_; }
    /// Per-type values for unit-demand and additive kinds; empty for tables.
    [[nodiscard]] const std::vector<Rational>& per_type() const { return per_type_; }
    [[nodiscard]] const Rational& singleton(int type) const { return table_[1u << type]; }

    friend bool operator==(const BuyerValuation&, const BuyerValuation&) = default;

private:
    static void check_g(int g) {
        if (g < 1 || g > kMaxItemTypes) throw InvalidValuation("number of item-types must be in [1, 16]");
    }

    static BuyerValuation from_per_type(ValuationKind kind, std::vector<Rational> per_type) {
        int g = int(per_type.size());
        check_g(g);
        for (const auto& v : per_type)
            if (v.sign() < 0) throw InvalidValuation("values must be non-negative");
        BuyerValuation b;
        b.kind_ = kind;
        b.g_ = g;
        b.table_.assign(std::size_t(1) << g, Rational());
        for (std::uint32_t mask = 1; mask < b.table_.size(); ++mask) {
            int low = std::countr_zero(mask);
            const Rational& rest = b.table_[mask & (mask - 1)];
            b.table_[mask] = kind == ValuationKind::Additive ? rest + per_type[low] : max(rest, per_type[low]);
        }
        b.per_type_ = std::move(per_type);
        return b;
    }

    ValuationKind kind_ = ValuationKind::Additive;
    int g_ = 0;
    std::vector<Rational> per_type_;
    std::vector<Rational> table_;
};

/// A seller endowed with units of a single item-type; marginals[j] is the value
/// of holding j+1 units minus the value of holding j.
class SellerValuation {
public:
    SellerValuation() = default;
    SellerValuation(ItemType type, std::vector<Rational> marginals) : type_(type), marginals_(std::move(marginals)) {
        if (marginals_.empty()) throw InvalidValuation("a seller must hold at least one unit");
        for (const auto& v : marginals_)
            if (v.sign() < 0) throw InvalidValuation("marginal values must be non-negative");
    }

    [[nodiscard]] ItemType item_type() const { return type_; }
    [[nodiscard]] int units() const { return int(marginals_.size()); }
    [[nodiscard]] const std::vector<Rational>& marginals() const { return marginals_; }

    /// Value of holding j units.
    [[nodiscard]] Rational value(int j) const {
        Rational v;
        for (int i = 0; i < j; ++i) v += marginals_[i];
        return v;
    }
    /// Value given up by selling q units out of the full endowment.
    [[nodiscard]] Rational cost_of_selling(int q) const {
        Rational v;
        for (int i = units() - q; i < units(); ++i) v += marginals_[i];
        return v;
    }
    /// Marginal value of the unit that would be sold next after `sold` units.
    [[nodiscard]] const Rational& next_unit_value(int sold) const { return marginals_[units() - 1 - sold]; }

    friend bool operator==(const SellerValuation&, const SellerValuation&) = default;

private:
    ItemType type_;
    std::vector<Rational> marginals_;
};

/// Single-unit proxy for one marginal of a multi-unit seller.
struct VirtualSeller {
    std::size_t owner = 0;  // index of the seller in its market
    int unit_index = 0;
    Rational marginal_value;
};

enum class Role { Buyer, Seller };

struct Buyer {
    std::string id;
    BuyerValuation valuation;
    friend bool operator==(const Buyer&, const Buyer&) = default;
};

struct Seller {
    std::string id;
    SellerValuation valuation;
    friend bool operator==(const Seller&, const Seller&) = default;
};

/// Position of an agent inside a Market.
struct AgentRef {
    Role role = Role::Buyer;
    std::size_t index = 0;
    friend bool operator==(const AgentRef&, const AgentRef&) = default;
};

inline std::vector<VirtualSeller> virtual_sellers(const Seller& s, std::size_t owner = 0) {
    std::vector<VirtualSeller> out;
    const auto& m = s.valuation.marginals();
    for (int j = 0; j < int(m.size()); ++j) out.push_back({owner, j, m[j]});
    return out;
}

struct Market {
    int g = 1;
    std::vector<Buyer> buyers;
    std::vector<Seller> sellers;

    [[nodiscard]] std::size_t agent_count() const { return buyers.size() + sellers.size(); }
    [[nodiscard]] bool empty() const { return buyers.empty() && sellers.empty(); }

    [[nodiscard]] int max_units() const {
        int m = 0;
        for (const auto& s : sellers) m = std::max(m, s.valuation.units());
        return m;
    }
    [[nodiscard]] int total_units(int type) const {
        int n = 0;
        for (const auto& s : sellers)
            if (s.valuation.item_type().index == type) n += s.valuation.units();
        return n;
    }

    /// Throws InvalidMarket when the structural invariants do not hold.
    void validate() const {
        if (g < 1 || g > kMaxItemTypes) throw InvalidMarket("g must be in [1, 16]");
        for (const auto& b : buyers)
            if (b.valuation.g() != g) throw InvalidMarket("buyer " + b.id + " valuation is not defined on 2^g bundles");
        for (const auto& s : sellers) {
            int t = s.valuation.item_type().index;
            if (t < 0 || t >= g) throw InvalidMarket("seller " + s.id + " item type out of range");
        }
    }

    friend bool operator==(const Market&, const Market&) = default;
};

class PriceVector {
public:
    PriceVector() = default;
    explicit PriceVector(int g) : prices_(std::size_t(g)) {}
    explicit PriceVector(std::vector<Rational> prices) : prices_(std::move(prices)) {
        for (const auto& p : prices_)
            if (p.sign() < 0) throw std::invalid_argument("prices must be non-negative");
    }

    [[nodiscard]] int g() const { return int(prices_.size()); }
    [[nodiscard]] const Rational& operator[](int type) const { return prices_[std::size_t(type)]; }
    Rational& operator[](int type) { return prices_[std::size_t(type)]; }
    [[nodiscard]] const std::vector<Rational>& values() const { return prices_; }

    [[nodiscard]] Rational cost(Bundle b) const {
        Rational c;
        for (std::uint32_t m = b.mask(); m; m &= m - 1) c += prices_[std::size_t(std::countr_zero(m))];
        return c;
    }

    friend bool operator==(const PriceVector&, const PriceVector&) = default;

private:
    std::vector<Rational> prices_;
};

inline std::string to_string(const PriceVector& p) {
    std::string s = "(";
    for (int i = 0; i < p.g(); ++i) {
        if (i) s += ", ";
        s += p[i].to_string();
    }
    return s + ")";
}

}  // namespace mida
