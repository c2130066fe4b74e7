#pragma once

// Monte Carlo harness: competitive ratios, scaling studies, deviation search
// and the worked example scenarios.

#include "mida/baselines.hpp"
#include "mida/diagnostics.hpp"
#include "mida/equilibrium.hpp"
#include "mida/generator.hpp"
#include "mida/mechanism.hpp"
#include "mida/properties.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <vector>

namespace mida {

/// Worker count: MIDA_THREADS if set, else the hardware concurrency.
inline unsigned worker_count() {
    if (const char* env = std::getenv("MIDA_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return unsigned(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n). The first exception (lowest index) is rethrown.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads = worker_count()) {
    std::vector<std::exception_ptr> errors(n);
    auto guarded = [&](std::size_t i) {
        try {
            fn(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    threads = unsigned(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) guarded(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < n;) guarded(i);
            });
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct TrialResult {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    Rational gft_mida;
    Rational gft_opt;
    Rational ratio;
    bool degenerate_R = false;
    bool degenerate_L = false;
    std::vector<int> k;
    std::vector<int> deals_lost;
    bool ddf_corollary = true;
    int clearing_checks = 0;      // (half, type) pairs checked
    int clearing_violations = 0;  // of the difference bound
    int loss_violations = 0;      // types whose lost deals reach the bound
    std::string error;            // non-empty if the trial failed
};

struct ExperimentResult {
    std::string scenario_id;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::vector<TrialResult> per_trial;
    Rational mean_ratio;  // exact
    Rational min_ratio;
    int failed_trials = 0;
    int ddf_failures = 0;
    double clearing_violation_rate = 0;
    double loss_violation_rate = 0;
    double wall_seconds = 0;
};

struct ExperimentOptions {
    MechanismOptions mechanism;
    bool diagnostics = true;
    unsigned threads = worker_count();
};

/// Ratio of one trial; defined as 1 when the optimum is 0.
inline Rational trial_ratio(const Rational& mida, const Rational& opt) { return opt.is_zero() ? Rational(1) : mida / opt; }

/// One trial per seed in [seed, seed + trials). Every outcome is re-verified;
/// an invariant breach aborts the experiment.
inline ExperimentResult estimate_competitive_ratio(const std::string& scenario_id, const Market& market, std::size_t trials,
                                                   std::uint64_t seed, const ExperimentOptions& options = {}) {
    if (trials < 1) throw InvalidSpec("trials must be at least 1");
    auto start = std::chrono::steady_clock::now();
    const Equilibrium opt = solve_walrasian(market);
    const MarketParameters mp = market_parameters(market, opt);

    ExperimentResult r;
    r.scenario_id = scenario_id;
    r.trials = trials;
    r.seed = seed;
    r.per_trial.resize(trials);
    parallel_for(
        trials,
        [&](std::size_t i) {
            TrialResult& t = r.per_trial[i];
            t.trial = i;
            t.seed = seed + i;
            t.gft_opt = opt.gain;
            t.k = opt.per_type_volume;
            try {
                TradeOutcome o = run_mida(market, t.seed, options.mechanism);
                verify_outcome(market, o);
                t.gft_mida = o.gain_total;
                t.degenerate_R = o.degenerate_R;
                t.degenerate_L = o.degenerate_L;
                if (options.diagnostics) {
                    for (const auto& l : loss_accounting(market, o, opt, mp)) {
                        t.deals_lost.push_back(l.deals_lost);
                        if (!l.within()) ++t.loss_violations;
                    }
                    for (Half h : {Half::R, Half::L}) {
                        const PriceVector& own = h == Half::R ? o.prices_R : o.prices_L;
                        auto sets = compute_trader_sets(market, opt, own);
                        for (bool ok : check_ddf_corollary(sets)) t.ddf_corollary = t.ddf_corollary && ok;
                        for (const auto& cd : check_clearing_difference(sets, o.halving, h, mp)) {
                            ++t.clearing_checks;
                            if (!cd.within()) ++t.clearing_violations;
                        }
                    }
                } else {
                    auto v = o.volume();
                    for (std::size_t x = 0; x < v.size(); ++x) t.deals_lost.push_back(std::max(0, t.k[x] - v[x]));
                }
            } catch (const InvariantViolation&) {
                throw;
            } catch (const std::exception& e) {
                t.error = e.what();
            }
            t.ratio = trial_ratio(t.gft_mida, t.gft_opt);
            if (t.ratio > Rational(1)) throw InvariantViolation("mechanism gain exceeds the optimum");
        },
        options.threads);

    Rational sum;
    int checks = 0, clearing = 0, losses = 0, types = 0;
    for (std::size_t i = 0; i < trials; ++i) {
        const auto& t = r.per_trial[i];
        sum += t.gft_mida;
        if (i == 0 || t.ratio < r.min_ratio) r.min_ratio = t.ratio;
        if (!t.error.empty()) ++r.failed_trials;
        if (!t.ddf_corollary) ++r.ddf_failures;
        checks += t.clearing_checks;
        clearing += t.clearing_violations;
        losses += t.loss_violations;
        types += int(t.k.size());
    }
    r.mean_ratio = opt.gain.is_zero() ? Rational(1) : sum / (opt.gain * Rational(std::int64_t(trials)));
    r.clearing_violation_rate = checks ? double(clearing) / checks : 0.0;
    r.loss_violation_rate = types ? double(losses) / types : 0.0;
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

struct ScalingRow {
    int k = 0;
    Rational mean_ratio;
    Rational min_ratio;
    double shape = 0;  // sqrt(ln k / k)
};

struct ScalingResult {
    std::vector<ScalingRow> rows;
    double fitted_a = 0;  // least squares for 1 - ratio ~ a * sqrt(ln k / k)
    [[nodiscard]] bool increasing() const {
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (!(rows[i].mean_ratio > rows[i - 1].mean_ratio)) return false;
        return true;
    }
};

/// For each k, a calibrated market with optimal volume k in every type.
inline ScalingResult scaling_experiment(const GeneratorSpec& base, const std::vector<int>& k_values, std::size_t trials,
                                       std::uint64_t seed, const ExperimentOptions& options = {}) {
    ScalingResult out;
    double num = 0, den = 0;
    for (int k : k_values) {
        GeneratorSpec spec = base;
        spec.calibrated_k.assign(std::size_t(spec.g), k);
        Market market = generate_market(spec, seed + std::uint64_t(k));
        auto r = estimate_competitive_ratio("scaling-k" + std::to_string(k), market, trials, seed, options);
        ScalingRow row{k, r.mean_ratio, r.min_ratio, k > 1 ? std::sqrt(std::log(double(k)) / k) : 0.0};
        num += (1 - row.mean_ratio.to_double()) * row.shape;
        den += row.shape * row.shape;
        out.rows.push_back(row);
    }
    out.fitted_a = den > 0 ? num / den : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Deviation search

enum class MechanismKind { Mida, McAfee, NaiveKeepOthers, NaiveRemoveOwner };

struct DeviationGrid {
    std::vector<std::int64_t> steps{1, 2, 5, 10};
    Rational unit{1};
    bool include_zero = true;
    std::size_t budget = 50'000'000;  // mechanism evaluations
};

inline std::vector<BuyerValuation> buyer_deviations(const BuyerValuation& v, const DeviationGrid& grid) {
    std::vector<BuyerValuation> out;
    auto add = [&](BuyerValuation b) {
        if (b == v || std::find(out.begin(), out.end(), b) != out.end()) return;
        out.push_back(std::move(b));
    };
    std::vector<Rational> signed_steps;
    for (auto s : grid.steps) {
        signed_steps.push_back(grid.unit * Rational(s));
        signed_steps.push_back(-(grid.unit * Rational(s)));
    }
    if (v.kind() == ValuationKind::Table) {
        for (std::size_t mask = 1; mask < v.table().size(); ++mask)
            for (const auto& d : signed_steps) {
                auto t = v.table();
                t[mask] += d;
                if (t[mask].sign() < 0) continue;
                auto b = BuyerValuation::table(v.g(), t);
                if (is_gross_substitute(b)) add(std::move(b));
            }
        if (grid.include_zero) add(BuyerValuation::table(v.g(), std::vector<Rational>(v.table().size())));
        return out;
    }
    auto make = [&](std::vector<Rational> per_type) {
        return v.kind() == ValuationKind::Additive ? BuyerValuation::additive(std::move(per_type))
                                                   : BuyerValuation::unit_demand(std::move(per_type));
    };
    for (int x = 0; x < v.g(); ++x)
        for (const auto& d : signed_steps) {
            auto pt = v.per_type();
            pt[std::size_t(x)] += d;
            if (pt[std::size_t(x)].sign() >= 0) add(make(std::move(pt)));
        }
    if (grid.include_zero) add(make(std::vector<Rational>(std::size_t(v.g()))));
    return out;
}

inline std::vector<SellerValuation> seller_deviations(const SellerValuation& v, const DeviationGrid& grid) {
    std::vector<SellerValuation> out;
    auto add = [&](std::vector<Rational> marginals) {
        for (const auto& x : marginals)
            if (x.sign() < 0) return;
        if (!is_dmr(marginals)) return;
        SellerValuation s(v.item_type(), std::move(marginals));
        if (s == v || std::find(out.begin(), out.end(), s) != out.end()) return;
        out.push_back(std::move(s));
    };
    for (int u = 0; u < v.units(); ++u)
        for (auto s : grid.steps)
            for (int sign : {1, -1}) {
                auto m = v.marginals();
                m[std::size_t(u)] += grid.unit * Rational(s * sign);
                add(std::move(m));
            }
    if (grid.include_zero) add(std::vector<Rational>(std::size_t(v.units())));
    return out;
}

struct Deviation {
    AgentRef agent;
    std::string reported;  // the misreport, human readable
    Rational truthful_gain;
    Rational deviating_gain;
    [[nodiscard]] Rational delta() const { return deviating_gain - truthful_gain; }
};

namespace detail {

inline std::string describe(const BuyerValuation& v) {
    std::string s = std::string(to_string(v.kind())) + " [";
    const auto& vals = v.kind() == ValuationKind::Table ? v.table() : v.per_type();
    for (std::size_t i = 0; i < vals.size(); ++i) s += (i ? ", " : "") + vals[i].to_string();
    return s + "]";
}

inline std::string describe(const SellerValuation& v) {
    std::string s = "type " + std::to_string(v.item_type().index) + " marginals [";
    for (std::size_t i = 0; i < v.marginals().size(); ++i) s += (i ? ", " : "") + v.marginals()[i].to_string();
    return s + "]";
}

template <class T>
std::vector<std::vector<T>> permutations(std::vector<T> v) {
    std::vector<std::vector<T>> out;
    std::sort(v.begin(), v.end());
    do out.push_back(v);
    while (std::next_permutation(v.begin(), v.end()));
    return out;
}

/// Every service order in half h.
inline std::vector<Lottery> all_lotteries(const Market& m, const Halving& halving, Half h) {
    Lottery base = random_lottery(m, halving, h, 0);
    std::vector<Lottery> out{Lottery{std::vector<std::vector<std::size_t>>(std::size_t(m.g)), {}}};
    auto expand = [&](auto&& assign, const std::vector<std::size_t>& members) {
        std::vector<Lottery> next;
        for (const auto& l : out)
            for (const auto& perm : permutations(members)) {
                Lottery c = l;
                assign(c, perm);
                next.push_back(std::move(c));
            }
        out = std::move(next);
    };
    expand([](Lottery& l, const std::vector<std::size_t>& p) { l.buyer_line = p; }, base.buyer_line);
    for (int t = 0; t < m.g; ++t)
        expand([t](Lottery& l, const std::vector<std::size_t>& p) { l.seller_lines[std::size_t(t)] = p; },
               base.seller_lines[std::size_t(t)]);
    return out;
}

inline SingleTypeMarket as_single_type(const Market& m) {
    if (m.g != 1) throw InvalidMarket("single-unit trade reduction needs a single-type market");
    SingleTypeMarket s;
    for (const auto& b : m.buyers) s.bids.push_back(b.valuation.singleton(0));
    for (const auto& x : m.sellers) {
        if (x.valuation.units() != 1) throw InvalidMarket("single-unit trade reduction needs single-unit sellers");
        s.asks.push_back(x.valuation.marginals()[0]);
    }
    return s;
}

/// Gain of agent a, measured with `truth`, when the mechanism runs on `reported`.
inline Rational deterministic_gain(MechanismKind kind, const Market& reported, const Market& truth, AgentRef a) {
    if (kind == MechanismKind::McAfee) {
        auto o = run_mcafee(as_single_type(reported));
        auto t = as_single_type(truth);
        return a.role == Role::Buyer ? o.buyer_gain(t, a.index) : o.seller_gain(t, a.index);
    }
    auto o = run_naive_multiunit_mcafee(reported, kind == MechanismKind::NaiveKeepOthers ? NaiveMode::KeepOthers
                                                                                          : NaiveMode::RemoveOwner);
    return a.role == Role::Buyer ? o.buyer_gain(truth, a.index) : o.seller_gain(truth, a.index);
}

}  // namespace detail

struct DeviationSearch {
    MechanismKind mechanism = MechanismKind::Mida;
    bool exhaustive_randomness = true;
    std::vector<std::uint64_t> seeds{0};  // used when randomness is not enumerated
    MechanismOptions options;

    static DeviationSearch of(MechanismKind kind) {
        DeviationSearch s;
        s.mechanism = kind;
        return s;
    }
};

/// Largest ex-post improvement any grid misreport gives `agent`, over every
/// realization of the randomness (all halvings and lotteries when exhaustive).
/// Returns nothing when no misreport helps in any realization.
inline std::optional<Deviation> find_profitable_deviation(const Market& truth, AgentRef agent, const DeviationGrid& grid,
                                                          const DeviationSearch& search = {}) {
    std::vector<Market> reports;
    std::vector<std::string> labels;
    if (agent.role == Role::Buyer) {
        for (auto& v : buyer_deviations(truth.buyers[agent.index].valuation, grid)) {
            Market m = truth;
            labels.push_back(detail::describe(v));
            m.buyers[agent.index].valuation = std::move(v);
            reports.push_back(std::move(m));
        }
    } else {
        for (auto& v : seller_deviations(truth.sellers[agent.index].valuation, grid)) {
            Market m = truth;
            labels.push_back(detail::describe(v));
            m.sellers[agent.index].valuation = std::move(v);
            reports.push_back(std::move(m));
        }
    }

    std::optional<Deviation> best;
    auto consider = [&](std::size_t r, const Rational& truthful, const Rational& deviating) {
        if (deviating > truthful && (!best || deviating - truthful > best->delta()))
            best = Deviation{agent, labels[r], truthful, deviating};
    };

    if (search.mechanism != MechanismKind::Mida) {
        if (reports.size() > grid.budget) throw GridTooLarge("deviation search exceeds its budget");
        Rational truthful = detail::deterministic_gain(search.mechanism, truth, truth, agent);
        for (std::size_t r = 0; r < reports.size(); ++r)
            consider(r, truthful, detail::deterministic_gain(search.mechanism, reports[r], truth, agent));
        return best;
    }

    if (!search.exhaustive_randomness) {
        if (reports.size() * search.seeds.size() > grid.budget) throw GridTooLarge("deviation search exceeds its budget");
        for (auto seed : search.seeds) {
            Halving h = random_halving(truth, seed);
            Lottery lr = random_lottery(truth, h, Half::R, seed), ll = random_lottery(truth, h, Half::L, seed);
            Rational truthful = agent_gain(truth, run_mida_with(truth, h, lr, ll, search.options), agent);
            for (std::size_t r = 0; r < reports.size(); ++r)
                consider(r, truthful, agent_gain(truth, run_mida_with(reports[r], h, lr, ll, search.options), agent));
        }
        return best;
    }

    const std::size_t n = truth.agent_count();
    if (n > 20) throw GridTooLarge("too many agents to enumerate every halving");
    std::size_t evaluations = 0;
    for (std::uint64_t bits = 0; bits < (std::uint64_t(1) << n); ++bits) {
        Halving h;
        for (std::size_t i = 0; i < truth.buyers.size(); ++i) h.buyers.push_back((bits >> i) & 1 ? Half::L : Half::R);
        for (std::size_t j = 0; j < truth.sellers.size(); ++j)
            h.sellers.push_back((bits >> (truth.buyers.size() + j)) & 1 ? Half::L : Half::R);
        auto lrs = detail::all_lotteries(truth, h, Half::R);
        auto lls = detail::all_lotteries(truth, h, Half::L);
        evaluations += (reports.size() + 1) * lrs.size() * lls.size();
        if (evaluations > grid.budget) throw GridTooLarge("deviation search exceeds its budget");
        HalvingPrices hp = halving_prices(truth, h);
        std::vector<Rational> truthful;
        for (const auto& lr : lrs)
            for (const auto& ll : lls) truthful.push_back(agent_gain(truth, run_mida_with(truth, h, hp, lr, ll, search.options), agent));
        for (std::size_t r = 0; r < reports.size(); ++r) {
            HalvingPrices hpr = halving_prices(reports[r], h);
            std::size_t idx = 0;
            for (const auto& lr : lrs)
                for (const auto& ll : lls)
                    consider(r, truthful[idx++], agent_gain(truth, run_mida_with(reports[r], h, hpr, lr, ll, search.options), agent));
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Worked example scenarios

inline Market single_unit_market(const std::vector<Rational>& bids, const std::vector<Rational>& asks) {
    Market m;
    m.g = 1;
    for (std::size_t i = 0; i < bids.size(); ++i) m.buyers.push_back({"b" + std::to_string(i), BuyerValuation::unit_demand({bids[i]})});
    for (std::size_t j = 0; j < asks.size(); ++j) m.sellers.push_back({"s" + std::to_string(j), SellerValuation(ItemType{0}, {asks[j]})});
    return m;
}

/// k-1 buyers at 1 and one at 1-eps; k-1 sellers at 0 and one at eps.
inline Market mcafee_sbb_market(int k, const Rational& eps) {
    std::vector<Rational> bids(std::size_t(k - 1), Rational(1)), asks(std::size_t(k - 1), Rational(0));
    bids.push_back(Rational(1) - eps);
    asks.push_back(eps);
    return single_unit_market(bids, asks);
}

/// Buyers 10, 9, 8; seller A holds two units with marginals (5, 1); seller B
/// one unit at 2. A's unit at 5 sets the price for its own unit at 1.
inline Market naive_multiunit_market() {
    Market m = single_unit_market({Rational(10), Rational(9), Rational(8)}, {});
    m.sellers.push_back({"A", SellerValuation(ItemType{0}, {Rational(5), Rational(1)})});
    m.sellers.push_back({"B", SellerValuation(ItemType{0}, {Rational(2)})});
    return m;
}

/// Two types (x = 0, y = 1). Returns the market and the halving of the
/// worked example; buyer and seller ids carry the group name.
inline std::pair<Market, Halving> demand_supply_market(int k, int K) {
    if (k < 1 || K < 0 || K > k * k) throw InvalidSpec("need k >= 1 and 0 <= K <= k^2");
    Market m;
    m.g = 2;
    Halving h;
    const Rational huge(BigRational(boost::multiprecision::pow(BigInt(k), 100)));
    auto buyers = [&](const std::string& name, int in_r, int in_l, Rational vx, Rational vy) {
        for (int i = 0; i < in_r + in_l; ++i) {
            m.buyers.push_back({name + "-" + std::to_string(i), BuyerValuation::unit_demand({vx, vy})});
            h.buyers.push_back(i < in_r ? Half::R : Half::L);
        }
    };
    auto sellers = [&](const std::string& name, int in_r, int in_l, int type, Rational v) {
        for (int i = 0; i < in_r + in_l; ++i) {
            m.sellers.push_back({name + "-" + std::to_string(i), SellerValuation(ItemType{type}, {v})});
            h.sellers.push_back(i < in_r ? Half::R : Half::L);
        }
    };
    buyers("Byy", k * k, k * k, 0, 9);
    buyers("Bxy", k - 1, k - 1, 9, 9);
    buyers("Bxx", 0, 2, huge, 0);
    sellers("Syy", k * k + K, k * k - K, 1, 1);
    sellers("Sx0", k, k, 0, 6);
    return {m, h};
}

struct ReproReport {
    std::string id;
    std::vector<std::pair<std::string, std::string>> facts;
    bool matches = true;

    void add(const std::string& key, const std::string& value) { facts.emplace_back(key, value); }
    void expect(const std::string& key, const Rational& got, const Rational& want) {
        add(key, got.to_string() + (got == want ? "" : " (expected " + want.to_string() + ")"));
        if (got != want) matches = false;
    }
    [[nodiscard]] std::string text() const {
        std::ostringstream os;
        os << "reproduce " << id << ": " << (matches ? "MATCH" : "MISMATCH") << "\n";
        for (const auto& [k, v] : facts) os << "  " << k << " = " << v << "\n";
        return os.str();
    }
};

inline ReproReport reproduce_mcafee_sbb(int k = 100, const Rational& eps = Rational(1, 1000)) {
    ReproReport r{"mcafee-sbb", {}, true};
    Market m = mcafee_sbb_market(k, eps);
    auto o = run_mcafee(detail::as_single_type(m));
    r.add("k", std::to_string(k));
    r.add("epsilon", eps.to_string());
    r.expect("deals", Rational(o.deals), Rational(k - 1));
    r.expect("buy_price", o.buy_price, Rational(1) - eps);
    r.expect("sell_price", o.sell_price, eps);
    r.expect("trader_gain", o.trader_gain, Rational(2 * (k - 1)) * eps);
    r.expect("surplus", o.surplus, Rational(k - 1) * (Rational(1) - Rational(2) * eps));
    r.expect("optimal_gain", solve_walrasian(m).gain, Rational(k) - Rational(2) * eps);
    return r;
}

inline ReproReport reproduce_naive_multiunit() {
    ReproReport r{"naive-multiunit", {}, true};
    Market m = naive_multiunit_market();
    AgentRef owner{Role::Seller, 0};
    DeviationGrid grid;
    auto naive = find_profitable_deviation(m, owner, grid, DeviationSearch::of(MechanismKind::NaiveKeepOthers));
    r.add("truthful_report", detail::describe(m.sellers[0].valuation));
    if (naive) {
        r.add("naive_keep_others_deviation", naive->reported);
        r.add("naive_keep_others_gain", naive->truthful_gain.to_string() + " -> " + naive->deviating_gain.to_string());
    } else {
        r.add("naive_keep_others_deviation", "none");
        r.matches = false;
    }
    auto remove = find_profitable_deviation(m, owner, grid, DeviationSearch::of(MechanismKind::NaiveRemoveOwner));
    r.add("naive_remove_owner_deviation", remove ? remove->reported : "none");
    auto mida = find_profitable_deviation(m, owner, grid, DeviationSearch::of(MechanismKind::Mida));
    r.add("mida_deviation", mida ? mida->reported : "none");
    if (mida) r.matches = false;
    return r;
}

inline ReproReport reproduce_demand_supply(int k = 10, int K = 4, std::size_t random_seeds = 0, std::uint64_t seed = 1) {
    ReproReport r{"demand-supply-interaction", {}, true};
    auto [m, h] = demand_supply_market(k, K);
    Equilibrium opt = solve_walrasian(m);
    TradeOutcome o = run_mida_with_halving(m, h, seed);
    verify_outcome(m, o);
    int supply_x_in_l = 0;
    for (std::size_t j = 0; j < m.sellers.size(); ++j) {
        const auto& v = m.sellers[j].valuation;
        if (h.sellers[j] == Half::L && v.item_type().index == 0)
            supply_x_in_l += seller_supply(v, o.prices_R[0]).min_quantity();  // strictly profitable units only
    }
    int bxx_trades = 0;
    for (std::size_t i = 0; i < m.buyers.size(); ++i)
        if (m.buyers[i].id.rfind("Bxx", 0) == 0 && !o.buyer_bundles[i].empty()) ++bxx_trades;
    Rational ratio = trial_ratio(o.gain_total, opt.gain);
    r.add("k", std::to_string(k));
    r.add("K", std::to_string(K));
    r.add("optimal_prices", to_string(opt.prices));
    r.expect("k_x", Rational(opt.per_type_volume[0]), Rational(2 * k));
    r.expect("k_y", Rational(opt.per_type_volume[1]), Rational(2 * k * k));
    r.add("prices_R", to_string(o.prices_R));
    r.add("prices_L", to_string(o.prices_L));
    r.expect("x_supply_in_L", Rational(supply_x_in_l), Rational(0));
    r.expect("Bxx_trades", Rational(bxx_trades), Rational(0));
    r.add("x_deals_in_L", std::to_string(o.volume_L[0]));
    r.add("ratio", to_decimal(ratio.to_double()));
    if (!(ratio < Rational(1, 100))) r.matches = false;
    if (random_seeds > 0) {
        ExperimentOptions eo;
        eo.diagnostics = false;
        auto er = estimate_competitive_ratio("demand-supply-interaction", m, random_seeds, seed, eo);
        r.add("random_halving_trials", std::to_string(random_seeds));
        r.add("random_halving_mean_ratio", to_decimal(er.mean_ratio.to_double()));
    }
    return r;
}

inline ReproReport reproduce(const std::string& id) {
    if (id == "mcafee-sbb") return reproduce_mcafee_sbb();
    if (id == "naive-multiunit") return reproduce_naive_multiunit();
    if (id == "demand-supply-interaction") return reproduce_demand_supply();
    throw InvalidSpec("unknown example: " + id);
}

}  // namespace mida
