#pragma once

// Scenario files (JSON) and experiment CSV output.
//
// Numbers are JSON integers or strings "n" / "n/d". Example:
//
//   {
//     "schema_version": 1,
//     "scenario_id": "two-types",
//     "g": 2,
//     "buyers": [
//       {"id": "b0", "kind": "unit-demand", "values": [9, "17/2"]},
//       {"id": "b1", "kind": "table", "table": [{"bundle": [0], "value": 4},
//                                               {"bundle": [1], "value": 5},
//                                               {"bundle": [0, 1], "value": 7}]}
//     ],
//     "sellers": [{"id": "s0", "type": 0, "marginals": [5, 1]}],
//     "mechanism": {"tie_break": "canonical"},
//     "experiment": {"trials": 100, "seed": 1, "k_values": [25, 100],
//                    "generator": {"g": 1, "m": 1, "family": "unit-demand"}}
//   }

#include "mida/experiments.hpp"
#include "mida/generator.hpp"
#include "mida/mechanism.hpp"
#include "mida/model.hpp"
#include "mida/properties.hpp"

#include "json.hpp"

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

namespace mida {

inline constexpr int kSchemaVersion = 1;

struct ExperimentConfig {
    std::size_t trials = 100;
    std::uint64_t seed = 1;
    std::vector<int> k_values;
    std::optional<GeneratorSpec> generator;
    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

struct ScenarioConfig {
    int schema_version = kSchemaVersion;
    std::string scenario_id = "scenario";
    Market market;
    MechanismOptions mechanism;
    ExperimentConfig experiment;
    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

struct LoadOptions {
    bool require_dmr = true;
    bool require_gs = false;  // grid check on table buyers
};

namespace detail {

using json = nlohmann::ordered_json;

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
    throw ParseError(path + ": " + what);
}

inline const json& field(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path, std::string("missing field '") + key + "'");
    return *it;
}

inline Rational to_rational(const json& j, const std::string& path) {
    if (j.is_number_integer()) return j.is_number_unsigned() ? Rational(BigInt(j.get<std::uint64_t>())) : Rational(j.get<std::int64_t>());
    if (j.is_string()) {
        try {
            return Rational::parse(j.get<std::string>());
        } catch (const std::exception& e) {
            fail(path, "bad number '" + j.get<std::string>() + "'");
        }
    }
    fail(path, "expected an integer or a \"p/q\" string");
}

inline json from_rational(const Rational& r) {
    if (r.is_small() && r.is_integer()) return json(r.numerator().convert_to<std::int64_t>());
    return json(r.to_string());
}

template <class T>
T to_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<T>();
}

inline std::vector<Rational> to_rationals(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array");
    std::vector<Rational> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(to_rational(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline json from_rationals(const std::vector<Rational>& v) {
    json a = json::array();
    for (const auto& r : v) a.push_back(from_rational(r));
    return a;
}

inline BuyerValuation parse_buyer(const json& b, int g, const std::string& path) {
    std::string kind = field(b, "kind", path).get<std::string>();
    try {
        if (kind == "unit-demand" || kind == "additive") {
            auto values = to_rationals(field(b, "values", path), path + ".values");
            if (int(values.size()) != g) fail(path + ".values", "expected " + std::to_string(g) + " entries");
            return kind == "additive" ? BuyerValuation::additive(std::move(values)) : BuyerValuation::unit_demand(std::move(values));
        }
        if (kind == "table") {
            if (g > kMaxItemTypes) fail(path, "g too large");
            std::vector<Rational> table(std::size_t(1) << g);
            std::vector<bool> seen(table.size());
            const json& entries = field(b, "table", path);
            if (!entries.is_array()) fail(path + ".table", "expected an array");
            for (std::size_t e = 0; e < entries.size(); ++e) {
                std::string ep = path + ".table[" + std::to_string(e) + "]";
                const json& types = field(entries[e], "bundle", ep);
                if (!types.is_array()) fail(ep + ".bundle", "expected an array of type indices");
                Bundle bundle;
                for (const auto& t : types) {
                    int x = to_int<int>(t, ep + ".bundle");
                    if (x < 0 || x >= g) fail(ep + ".bundle", "type index out of range");
                    bundle = bundle.with(x);
                }
                if (seen[bundle.mask()]) fail(ep, "bundle listed twice");
                seen[bundle.mask()] = true;
                table[bundle.mask()] = to_rational(field(entries[e], "value", ep), ep + ".value");
            }
            return BuyerValuation::table(g, std::move(table));
        }
    } catch (const InvalidValuation& e) {
        fail(path, e.what());
    }
    fail(path + ".kind", "unknown buyer kind '" + kind + "'");
}

inline json buyer_json(const Buyer& b) {
    json j;
    j["id"] = b.id;
    j["kind"] = to_string(b.valuation.kind());
    if (b.valuation.kind() == ValuationKind::Table) {
        json entries = json::array();
        for (std::uint32_t mask = 1; mask < b.valuation.table().size(); ++mask)
            entries.push_back({{"bundle", Bundle(mask).types()}, {"value", from_rational(b.valuation.table()[mask])}});
        j["table"] = entries;
    } else {
        j["values"] = from_rationals(b.valuation.per_type());
    }
    return j;
}

inline GeneratorSpec parse_generator(const json& j, const std::string& path) {
    GeneratorSpec s;
    if (!j.is_object()) fail(path, "expected an object");
    if (j.contains("g")) s.g = to_int<int>(j["g"], path + ".g");
    if (j.contains("buyers")) s.buyers = to_int<int>(j["buyers"], path + ".buyers");
    if (j.contains("sellers")) s.sellers = to_int<int>(j["sellers"], path + ".sellers");
    if (j.contains("m")) s.m = to_int<int>(j["m"], path + ".m");
    if (j.contains("family")) {
        try {
            s.family = parse_buyer_family(j["family"].get<std::string>());
        } catch (const std::exception& e) {
            fail(path + ".family", e.what());
        }
    }
    if (j.contains("value_lo")) s.value_lo = to_int<std::int64_t>(j["value_lo"], path + ".value_lo");
    if (j.contains("value_hi")) s.value_hi = to_int<std::int64_t>(j["value_hi"], path + ".value_hi");
    if (j.contains("denominator")) s.denominator = to_int<std::int64_t>(j["denominator"], path + ".denominator");
    if (j.contains("calibrated_k"))
        for (const auto& k : j["calibrated_k"]) s.calibrated_k.push_back(to_int<int>(k, path + ".calibrated_k"));
    try {
        s.validate();
    } catch (const InvalidSpec& e) {
        fail(path, e.what());
    }
    return s;
}

inline json generator_json(const GeneratorSpec& s) {
    json j{{"g", s.g},
           {"buyers", s.buyers},
           {"sellers", s.sellers},
           {"m", s.m},
           {"family", to_string(s.family)},
           {"value_lo", s.value_lo},
           {"value_hi", s.value_hi},
           {"denominator", s.denominator}};
    if (!s.calibrated_k.empty()) j["calibrated_k"] = s.calibrated_k;
    return j;
}

/// Line and column of a byte offset, for parse diagnostics.
inline std::string position(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

/// Parses a scenario. Structural problems raise ParseError with the field
/// path; with the default options non-DMR sellers raise InvalidValuation.
inline ScenarioConfig parse_scenario(const std::string& text, const LoadOptions& options = {}) {
    using detail::fail;
    using detail::field;
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(detail::position(text, e.byte == 0 ? 0 : e.byte - 1) + ": malformed JSON");
    }
    try {
        ScenarioConfig s;
        s.schema_version = detail::to_int<int>(field(j, "schema_version", "$"), "$.schema_version");
        if (s.schema_version != kSchemaVersion) fail("$.schema_version", "unsupported version " + std::to_string(s.schema_version));
        if (j.contains("scenario_id")) s.scenario_id = j["scenario_id"].get<std::string>();
        s.market.g = detail::to_int<int>(field(j, "g", "$"), "$.g");
        if (s.market.g < 1 || s.market.g > kMaxItemTypes) fail("$.g", "must be in [1, 16]");

        const auto& buyers = j.contains("buyers") ? j["buyers"] : nlohmann::ordered_json::array();
        if (!buyers.is_array()) fail("$.buyers", "expected an array");
        for (std::size_t i = 0; i < buyers.size(); ++i) {
            std::string path = "$.buyers[" + std::to_string(i) + "]";
            std::string id = buyers[i].contains("id") ? buyers[i]["id"].get<std::string>() : "b" + std::to_string(i);
            s.market.buyers.push_back({id, detail::parse_buyer(buyers[i], s.market.g, path)});
        }
        const auto& sellers = j.contains("sellers") ? j["sellers"] : nlohmann::ordered_json::array();
        if (!sellers.is_array()) fail("$.sellers", "expected an array");
        for (std::size_t i = 0; i < sellers.size(); ++i) {
            std::string path = "$.sellers[" + std::to_string(i) + "]";
            std::string id = sellers[i].contains("id") ? sellers[i]["id"].get<std::string>() : "s" + std::to_string(i);
            int type = detail::to_int<int>(field(sellers[i], "type", path), path + ".type");
            if (type < 0 || type >= s.market.g) fail(path + ".type", "type index out of range");
            auto marginals = detail::to_rationals(field(sellers[i], "marginals", path), path + ".marginals");
            try {
                s.market.sellers.push_back({id, SellerValuation(ItemType{type}, std::move(marginals))});
            } catch (const InvalidValuation& e) {
                fail(path, e.what());
            }
        }

        if (j.contains("mechanism")) {
            const auto& m = j["mechanism"];
            if (m.contains("tie_break")) {
                try {
                    s.mechanism.tie_break = parse_tie_break(m["tie_break"].get<std::string>());
                } catch (const InvalidSpec& e) {
                    fail("$.mechanism.tie_break", e.what());
                }
            }
        }
        if (j.contains("experiment")) {
            const auto& e = j["experiment"];
            if (e.contains("trials")) {
                auto t = detail::to_int<std::int64_t>(e["trials"], "$.experiment.trials");
                if (t < 1) fail("$.experiment.trials", "must be at least 1");
                s.experiment.trials = std::size_t(t);
            }
            if (e.contains("seed")) s.experiment.seed = detail::to_int<std::uint64_t>(e["seed"], "$.experiment.seed");
            if (e.contains("k_values"))
                for (const auto& k : e["k_values"]) s.experiment.k_values.push_back(detail::to_int<int>(k, "$.experiment.k_values"));
            if (e.contains("generator")) s.experiment.generator = detail::parse_generator(e["generator"], "$.experiment.generator");
        }

        for (std::size_t i = 0; i < s.market.sellers.size(); ++i)
            if (options.require_dmr && !is_dmr(s.market.sellers[i].valuation))
                throw InvalidValuation("seller " + s.market.sellers[i].id + " violates diminishing marginal returns");
        if (options.require_gs)
            for (const auto& b : s.market.buyers)
                if (!is_gross_substitute(b.valuation)) throw InvalidValuation("buyer " + b.id + " is not gross-substitutes");
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid scenario: ") + e.what());
    }
}

inline ScenarioConfig load_scenario(const std::string& path, const LoadOptions& options = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_scenario(ss.str(), options);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline std::string serialize_scenario(const ScenarioConfig& s) {
    nlohmann::ordered_json j;
    j["schema_version"] = s.schema_version;
    j["scenario_id"] = s.scenario_id;
    j["g"] = s.market.g;
    j["buyers"] = nlohmann::ordered_json::array();
    for (const auto& b : s.market.buyers) j["buyers"].push_back(detail::buyer_json(b));
    j["sellers"] = nlohmann::ordered_json::array();
    for (const auto& x : s.market.sellers)
        j["sellers"].push_back(
            {{"id", x.id}, {"type", x.valuation.item_type().index}, {"marginals", detail::from_rationals(x.valuation.marginals())}});
    j["mechanism"] = {{"tie_break", to_string(s.mechanism.tie_break)}};
    nlohmann::ordered_json e{{"trials", s.experiment.trials}, {"seed", s.experiment.seed}};
    if (!s.experiment.k_values.empty()) e["k_values"] = s.experiment.k_values;
    if (s.experiment.generator) e["generator"] = detail::generator_json(*s.experiment.generator);
    j["experiment"] = e;
    return j.dump(2) + "\n";
}

/// Scenario wrapper around a market built in code.
inline ScenarioConfig scenario_of(const std::string& id, Market market) {
    ScenarioConfig s;
    s.scenario_id = id;
    s.market = std::move(market);
    return s;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string csv_header(int g) {
    std::string h = "scenario_id,trial,seed,gft_mida_num,gft_mida_den,gft_opt_num,gft_opt_den,ratio_decimal_15sig,degenerate_R,degenerate_L";
    for (int t = 0; t < g; ++t) h += ",k_" + std::to_string(t);
    for (int t = 0; t < g; ++t) h += ",deals_lost_" + std::to_string(t);
    return h + "\n";
}

namespace detail {
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}
}  // namespace detail

inline std::string csv_rows(const ExperimentResult& r, int g) {
    std::ostringstream os;
    for (const auto& t : r.per_trial) {
        os << detail::csv_field(r.scenario_id) << ',' << t.trial << ',' << t.seed << ',' << t.gft_mida.numerator() << ','
           << t.gft_mida.denominator() << ',' << t.gft_opt.numerator() << ',' << t.gft_opt.denominator() << ','
           << to_decimal(t.ratio.to_double(), 15) << ',' << int(t.degenerate_R) << ',' << int(t.degenerate_L);
        for (int x = 0; x < g; ++x) os << ',' << (std::size_t(x) < t.k.size() ? t.k[std::size_t(x)] : 0);
        for (int x = 0; x < g; ++x) os << ',' << (std::size_t(x) < t.deals_lost.size() ? t.deals_lost[std::size_t(x)] : 0);
        os << '\n';
    }
    return os.str();
}

}  // namespace mida
