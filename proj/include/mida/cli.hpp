#pragma once

// Command-line front end. run_cli is the whole program; tools/mida.cpp only
// forwards argv, which keeps every subcommand testable in-process.

#include "mida/baselines.hpp"
#include "mida/diagnostics.hpp"
#include "mida/equilibrium.hpp"
#include "mida/experiments.hpp"
#include "mida/properties.hpp"
#include "mida/scenario_io.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <ostream>
#include <string>
#include <vector>

namespace mida {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitUsage = 2, kExitInvariant = 3 };

namespace cli {

/// First price pair on the buyer's default grid where demand flows upward.
inline std::optional<std::string> find_ddf_problem(const BuyerValuation& v, std::size_t max_points = 20000) {
    if (v.kind() != ValuationKind::Table) return std::nullopt;
    auto grid = default_price_grid(v);
    const int g = v.g();
    double points = std::pow(double(grid.size()), g);
    if (points > double(max_points)) throw GridTooLarge("DDF scan grid too large");
    std::vector<std::size_t> idx(std::size_t(g), 0);
    for (;;) {
        PriceVector p(g);
        for (int t = 0; t < g; ++t) p[t] = grid[idx[std::size_t(t)]];
        for (int t = 0; t < g; ++t)
            for (int dir : {-1, 1}) {
                auto j = std::int64_t(idx[std::size_t(t)]) + dir;
                if (j < 0 || j >= std::int64_t(grid.size())) continue;
                PriceVector q = p;
                q[t] = grid[std::size_t(j)];
                auto r = check_ddf(v, p, q);
                if (!r.holds)
                    return "demand moves from " + to_string(r.before) + " at p=" + to_string(p) + " to " + to_string(r.after) +
                           " at q=" + to_string(q) + " (item " + std::to_string(*r.violating_item) + ")";
            }
        int t = 0;
        while (t < g && ++idx[std::size_t(t)] == grid.size()) idx[std::size_t(t++)] = 0;
        if (t == g) break;
    }
    return std::nullopt;
}

inline int cmd_check(const std::string& file, std::ostream& out) {
    LoadOptions lo;
    lo.require_dmr = false;
    ScenarioConfig s = load_scenario(file, lo);
    s.market.validate();
    bool ok = true;
    out << "scenario " << s.scenario_id << ": g=" << s.market.g << ", " << s.market.buyers.size() << " buyers, "
        << s.market.sellers.size() << " sellers\n";
    for (const auto& x : s.market.sellers) {
        const auto& m = x.valuation.marginals();
        out << "seller " << x.id << ": ";
        std::size_t bad = 0;
        for (std::size_t i = 1; i < m.size() && !bad; ++i)
            if (m[i] > m[i - 1]) bad = i;
        if (bad) {
            ok = false;
            out << "INVALID DMR violation: marginal " << bad + 1 << " (" << m[bad].to_string() << ") exceeds marginal " << bad
                << " (" << m[bad - 1].to_string() << ")\n";
        } else {
            out << "ok (DMR)\n";
        }
    }
    for (const auto& b : s.market.buyers) {
        out << "buyer " << b.id << " (" << to_string(b.valuation.kind()) << "): ";
        if (b.valuation.kind() != ValuationKind::Table) {
            out << "ok (GS by construction)\n";
            continue;
        }
        auto gs = find_gs_violation(b.valuation, default_price_grid(b.valuation));
        if (gs) {
            ok = false;
            out << "INVALID GS violation: " << gs->describe() << "\n";
            continue;
        }
        try {
            auto ddf = find_ddf_problem(b.valuation);
            if (ddf) {
                ok = false;
                out << "INVALID DDF violation: " << *ddf << "\n";
                continue;
            }
            out << "ok (GS, DDF on grid)\n";
        } catch (const GridTooLarge&) {
            out << "ok (GS on grid; DDF scan skipped, grid too large)\n";
        }
    }
    out << (ok ? "all agents valid\n" : "validation failed\n");
    return ok ? kExitOk : kExitValidation;
}

inline int cmd_solve(const std::string& file, const std::string& csv, std::ostream& out) {
    ScenarioConfig s = load_scenario(file);
    Equilibrium eq = solve_walrasian(s.market);
    out << "scenario " << s.scenario_id << "\n";
    out << "minimal walrasian prices: " << to_string(eq.prices) << "\n";
    for (int t = 0; t < s.market.g; ++t)
        out << "type " << t << ": price " << eq.prices[t].to_string() << ", k = " << eq.per_type_volume[std::size_t(t)]
            << ", gain " << eq.gain_per_type[std::size_t(t)].to_string() << "\n";
    out << "optimal gain: " << eq.gain.to_string() << "\n";
    if (!csv.empty()) {
        std::ofstream f(csv, std::ios::binary);
        if (!f) throw ParseError(csv + ": cannot write");
        f << "type,price_num,price_den,k,gain_num,gain_den\n";
        for (int t = 0; t < s.market.g; ++t)
            f << t << ',' << eq.prices[t].numerator() << ',' << eq.prices[t].denominator() << ','
              << eq.per_type_volume[std::size_t(t)] << ',' << eq.gain_per_type[std::size_t(t)].numerator() << ','
              << eq.gain_per_type[std::size_t(t)].denominator() << '\n';
    }
    return kExitOk;
}

inline void print_diagnostics(const Market& market, const TradeOutcome& o, const Equilibrium& opt, std::ostream& out) {
    MarketParameters mp = market_parameters(market, opt);
    out << "diagnostics:\n";
    out << "  m = " << mp.m << ", k_min = " << mp.k_min << ", k_max = " << mp.k_max
        << ", c = " << (mp.c ? mp.c->to_string() : "undefined") << ", h = " << (mp.h ? mp.h->to_string() : "undefined") << "\n";
    out << "  sampling error e_x = m*sqrt(k ln k):";
    for (double e : mp.e) out << ' ' << to_decimal(e, 6);
    out << "\n";
    for (Half h : {Half::R, Half::L}) {
        const PriceVector& own = h == Half::R ? o.prices_R : o.prices_L;
        auto sets = compute_trader_sets(market, opt, own);
        auto clearing = check_clearing_difference(sets, o.halving, h, mp);
        auto ddf = check_ddf_corollary(sets);
        out << "  half " << to_string(h) << " at " << to_string(own) << ":\n";
        for (std::size_t t = 0; t < sets.types.size(); ++t) {
            const auto& ts = sets.types[t];
            out << "    type " << t << ": delta " << ts.delta.to_string() << ", |B-| " << ts.buyers_minus.size() << ", |B+| "
                << ts.buyers_plus.size() << ", |S-| " << ts.sellers_minus.size() << ", |S+| " << ts.sellers_plus.size()
                << ", clearing difference " << clearing[t].difference() << " vs 2e " << to_decimal(clearing[t].bound, 6)
                << (clearing[t].within() ? " (within)" : " (exceeds)") << ", DDF corollary "
                << (ddf[t] ? "holds" : "FAILS") << "\n";
        }
    }
    out << "  loss accounting:\n";
    for (std::size_t t = 0; auto& l : loss_accounting(market, o, opt, mp)) {
        out << "    type " << t++ << ": k " << l.k << ", realized " << l.realized << ", lost " << l.deals_lost << ", bound "
            << to_decimal(l.bound_rhs, 6) << (l.within() ? " (within)" : " (exceeds)") << "\n";
    }
    auto tb = ratio_lower_bound(mp);
    out << "  closed-form ratio bound: via c " << to_decimal(tb.via_c, 6) << ", via h "
        << (tb.via_h ? to_decimal(*tb.via_h, 6) : std::string("undefined")) << ", volume assumption "
        << (tb.volume_assumption ? "holds" : "fails") << "\n";
}

inline int cmd_run(const std::string& file, std::uint64_t seed, bool diagnostics, std::ostream& out) {
    ScenarioConfig s = load_scenario(file);
    const Market& m = s.market;
    TradeOutcome o = run_mida(m, seed, s.mechanism);
    verify_outcome(m, o);
    Equilibrium opt = solve_walrasian(m);
    out << "scenario " << s.scenario_id << ", seed " << seed << ", tie-break " << to_string(s.mechanism.tie_break) << "\n";
    out << "prices computed in R (posted in L): " << to_string(o.prices_R) << (o.degenerate_R ? " [degenerate]" : "") << "\n";
    out << "prices computed in L (posted in R): " << to_string(o.prices_L) << (o.degenerate_L ? " [degenerate]" : "") << "\n";
    out << "degenerate_R " << o.degenerate_R << ", degenerate_L " << o.degenerate_L << "\n";
    for (std::size_t i = 0; i < m.buyers.size(); ++i)
        out << "buyer " << m.buyers[i].id << " [" << to_string(o.halving.buyers[i]) << "]: bundle " << to_string(o.buyer_bundles[i])
            << ", payment " << o.buyer_payments[i].to_string() << "\n";
    for (std::size_t j = 0; j < m.sellers.size(); ++j)
        out << "seller " << m.sellers[j].id << " [" << to_string(o.halving.sellers[j]) << "]: units " << o.seller_units[j]
            << ", payment " << o.seller_payments[j].to_string() << "\n";
    out << "volume R/L per type:";
    for (std::size_t t = 0; t < o.volume_R.size(); ++t) out << ' ' << o.volume_R[t] << '/' << o.volume_L[t];
    out << "\n";
    out << "gain from trade: " << o.gain_total.to_string() << " (optimal " << opt.gain.to_string() << ", ratio "
        << trial_ratio(o.gain_total, opt.gain).to_string() << ")\n";
    if (diagnostics) print_diagnostics(m, o, opt, out);
    return kExitOk;
}

inline int cmd_experiment(const std::string& file, std::optional<std::size_t> trials, std::optional<std::uint64_t> seed,
                          const std::string& csv_path, unsigned threads, std::ostream& out) {
    ScenarioConfig s = load_scenario(file);
    const std::size_t n = trials.value_or(s.experiment.trials);
    const std::uint64_t base = seed.value_or(s.experiment.seed);
    if (n < 1) throw InvalidSpec("trials must be at least 1");
    ExperimentOptions eo;
    eo.mechanism = s.mechanism;
    eo.threads = threads;

    std::vector<std::pair<ExperimentResult, int>> blocks;  // result, g
    if (!s.experiment.k_values.empty()) {
        if (!s.experiment.generator) throw InvalidSpec("k_values need an experiment generator");
        for (int k : s.experiment.k_values) {
            GeneratorSpec spec = *s.experiment.generator;
            spec.calibrated_k.assign(std::size_t(spec.g), k);
            Market market = generate_market(spec, base + std::uint64_t(k));
            blocks.emplace_back(estimate_competitive_ratio(s.scenario_id + "@k=" + std::to_string(k), market, n, base, eo), spec.g);
        }
    } else {
        Market market = s.market;
        if (market.empty() && s.experiment.generator) market = generate_market(*s.experiment.generator, base);
        blocks.emplace_back(estimate_competitive_ratio(s.scenario_id, market, n, base, eo), market.g);
    }

    std::string csv;
    int g = 0;
    for (const auto& b : blocks) g = std::max(g, b.second);
    csv += csv_header(g);
    for (const auto& [r, bg] : blocks) csv += csv_rows(r, g);
    if (csv_path.empty()) {
        out << csv;
    } else {
        std::ofstream f(csv_path, std::ios::binary);
        if (!f) throw ParseError(csv_path + ": cannot write");
        f << csv;
        for (const auto& [r, bg] : blocks)
            out << r.scenario_id << ": trials " << r.trials << ", seeds " << r.seed << ".." << r.seed + r.trials - 1
                << ", mean ratio " << r.mean_ratio.to_string() << " (" << to_decimal(r.mean_ratio.to_double(), 15)
                << "), min ratio " << to_decimal(r.min_ratio.to_double(), 15) << ", failed trials " << r.failed_trials
                << ", DDF corollary failures " << r.ddf_failures << ", clearing-bound violation rate "
                << to_decimal(r.clearing_violation_rate, 6) << "\n";
    }
    return kExitOk;
}

}  // namespace cli

/// Runs the CLI on args (args[0] is the program name).
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"MIDA multi-item double auction toolkit", "mida"};
    app.require_subcommand(1);

    std::string file, csv_out, example;
    std::uint64_t seed = 1;
    bool diagnostics = false;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> exp_seed;
    unsigned threads = worker_count();
    int k = 0, K = -1;
    std::string eps;
    std::size_t random_seeds = 0;

    auto* check = app.add_subcommand("check", "validate agents (DMR sellers, GS and DDF table buyers)");
    check->add_option("scenario", file, "scenario file")->required();
    auto* solve = app.add_subcommand("solve", "minimal Walrasian equilibrium and optimal gain");
    solve->add_option("scenario", file, "scenario file")->required();
    solve->add_option("--csv", csv_out, "also write per-type prices as CSV");
    auto* run = app.add_subcommand("run", "one MIDA run");
    run->add_option("scenario", file, "scenario file")->required();
    run->add_option("--seed", seed, "run seed");
    run->add_flag("--emit-diagnostics", diagnostics, "trader sets, clearing differences and loss accounting");
    auto* experiment = app.add_subcommand("experiment", "Monte Carlo competitive ratio");
    experiment->add_option("scenario", file, "scenario file")->required();
    experiment->add_option("--trials", trials, "number of trials");
    experiment->add_option("--seed", exp_seed, "first seed");
    experiment->add_option("--out", csv_out, "CSV output file (stdout if omitted)");
    experiment->add_option("--threads", threads, "worker threads (default: MIDA_THREADS or all cores)")->check(CLI::PositiveNumber);
    auto* reproduce_cmd = app.add_subcommand("reproduce", "worked example scenarios");
    reproduce_cmd->add_option("example", example, "mcafee-sbb | naive-multiunit | demand-supply-interaction")
        ->required()
        ->check(CLI::IsMember({"mcafee-sbb", "naive-multiunit", "demand-supply-interaction"}));
    reproduce_cmd->add_option("--k", k, "market size parameter");
    reproduce_cmd->add_option("--K", K, "sampling deviation (demand-supply-interaction)");
    reproduce_cmd->add_option("--epsilon", eps, "epsilon as p/q (mcafee-sbb)");
    reproduce_cmd->add_option("--random-seeds", random_seeds, "also report the mean ratio over random halvings");
    reproduce_cmd->add_option("--seed", seed, "lottery seed / first random seed");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        if (*check) return cli::cmd_check(file, out);
        if (*solve) return cli::cmd_solve(file, csv_out, out);
        if (*run) return cli::cmd_run(file, seed, diagnostics, out);
        if (*experiment) return cli::cmd_experiment(file, trials, exp_seed, csv_out, threads, out);
        if (*reproduce_cmd) {
            ReproReport r;
            if (example == "mcafee-sbb")
                r = reproduce_mcafee_sbb(k > 0 ? k : 100, eps.empty() ? Rational(1, 1000) : Rational::parse(eps));
            else if (example == "naive-multiunit")
                r = reproduce_naive_multiunit();
            else
                r = reproduce_demand_supply(k > 0 ? k : 10, K >= 0 ? K : 4, random_seeds, seed);
            out << r.text();
            return r.matches ? kExitOk : kExitValidation;
        }
    } catch (const InvariantViolation& e) {
        err << "invariant violation: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const Unbalanced& e) {
        err << "invariant violation: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const NoEquilibriumFound& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitUsage;
}

}  // namespace mida
