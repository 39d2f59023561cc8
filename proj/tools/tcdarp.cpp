#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "tcdarp/export.hpp"
#include "tcdarp/oracle.hpp"
#include "tcdarp/weekly.hpp"

using namespace tcdarp;

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw IoError("failed writing " + path);
}

PeriodId parse_period(const std::string& s) {
    const auto p = PeriodId::parse(s);
    if (!p) throw ValidationError("--period", "unknown period '" + s + "' (mon-am .. fri-pm)");
    return *p;
}

Cents parse_money(double v, const char* flag) { return parse_scaled_decimal(v, 2, flag); }

// ---- verify-oracle -------------------------------------------------------

struct CheckReport {
    bool all_ok = true;

    void result(bool ok, const std::string& name, const std::string& detail) {
        std::cout << (ok ? "PASS  " : "FAIL  ") << name << ": " << detail << "\n";
        all_ok = all_ok && ok;
    }
    void skip(const std::string& name, const std::string& why) {
        std::cout << "SKIP  " << name << ": " << why << "\n";
    }
};

std::vector<std::vector<Stop>> oracle_sequences(const std::vector<Request>& requests) {
    std::vector<std::vector<Stop>> seqs;
    auto pickup = [&](int r) {
        return Stop{requests[r].pickup_loc, {{StopAction::Kind::Pickup, r}}};
    };
    auto delivery = [&](int r) {
        return Stop{requests[r].delivery_loc, {{StopAction::Kind::Delivery, r}}};
    };
    const int n = (int)requests.size();
    for (int i = 0; i < n; ++i) seqs.push_back({pickup(i), delivery(i)});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            seqs.push_back({pickup(i), pickup(j), delivery(i), delivery(j)});
            seqs.push_back({pickup(i), pickup(j), delivery(j), delivery(i)});
            seqs.push_back({pickup(i), delivery(i), pickup(j), delivery(j)});
        }
    return seqs;
}

int cmd_verify_oracle(const std::string& instance_path, const std::string& period_str,
                      int iterations, std::uint64_t seed) {
    const Instance inst = load_instance(instance_path);
    const PeriodId period = parse_period(period_str);
    const auto requests = expand_requests(inst, period);
    CheckReport report;

    // scheduling: minute-grid search against the kernel on fixed sequences
    {
        int n = 0, bad = 0;
        for (const auto& stops : oracle_sequences(requests))
            for (const auto& vt : inst.vehicle_types) {
                const auto fast = compute_schedule(stops, vt, inst, requests, {});
                const auto slow = schedule_bruteforce(stops, vt, inst, requests, {});
                ++n;
                if (fast.ok() != slow.ok())
                    ++bad;
                else if (fast.ok() &&
                         (fast.schedule->duration() != slow.schedule->duration() ||
                          fast.schedule->depot_departure != slow.schedule->depot_departure))
                    ++bad;
            }
        report.result(bad == 0, "schedule kernel",
                      std::to_string(n) + " sequences, " + std::to_string(bad) + " mismatches");
    }

    // configuration assignment: dynamic program against full enumeration
    {
        int n = 0, bad = 0;
        for (const auto& stops : oracle_sequences(requests))
            for (const auto& vt : inst.vehicle_types) {
                const auto fast = assign_configurations(stops, vt, requests);
                const auto slow = config_bruteforce(stops, vt, requests);
                ++n;
                if (fast.feasible != slow.feasible ||
                    (fast.feasible && fast.n_reconfigs != slow.n_reconfigs))
                    ++bad;
            }
        report.result(bad == 0, "configuration assignment",
                      std::to_string(n) + " sequences, " + std::to_string(bad) + " mismatches");
    }

    // time classes: greedy sweep against partition enumeration
    {
        std::mt19937_64 gen(seed ^ 0x7c3a9d13u);
        int bad = 0;
        const int trials = 100;
        for (int t = 0; t < trials; ++t) {
            const int m = 2 + (int)(gen() % 7);
            std::vector<Minutes> times;
            for (int i = 0; i < m; ++i) times.push_back(480 + (int)(gen() % 540));
            if (time_classes(times, inst.consistency_width).first !=
                classes_bruteforce(times, inst.consistency_width))
                ++bad;
        }
        report.result(bad == 0, "time classes",
                      std::to_string(trials) + " multisets, " + std::to_string(bad) +
                          " mismatches");
    }

    // half-day search: the heuristic can never beat the exhaustive optimum
    LnsParams lns;
    lns.iterations = iterations;
    lns.seed = seed;
    {
        const auto brute = halfday_bruteforce(inst, period);
        const auto search = solve_halfday(inst, period, lns);
        std::vector<std::string> violations;
        for (const auto& r : brute.routes) {
            const auto v = verify_route(r, inst, requests);
            violations.insert(violations.end(), v.begin(), v.end());
        }
        const bool ok = violations.empty() && search.best.total_cost >= brute.total_cost;
        report.result(ok, "half-day search",
                      "optimum " + format_cents(brute.total_cost) + ", search " +
                          format_cents(search.best.total_cost));
    }

    // route selection: branch-and-bound against exhaustive partitions over a
    // pool drawn from every attended period
    {
        RoutePool pool;
        std::array<HalfDaySolution, kPeriodCount> incumbent;
        bool covered = true;
        for (int p = 0; p < kPeriodCount; ++p) {
            LnsParams lp = lns;
            lp.seed = seed + p;
            auto res = solve_halfday(inst, PeriodId{p}, lp);
            covered = covered && res.best.unassigned.empty();
            incumbent[p] = std::move(res.best);
            pool.merge(res.pool);
        }
        if (!covered) {
            report.skip("route selection", "half-day search left requests unassigned");
        } else {
            MasterProblem mp;
            bool have = false;
            for (int subset : {2, 1}) {
                mp = build_master(pool, inst, subset, MasterMode::weighted(100),
                                  inst.consistency_width, &incumbent);
                if ((int)mp.candidates.size() <= kOracleMaxCandidates) {
                    have = true;
                    break;
                }
            }
            if (!have) {
                report.skip("route selection", "candidate set exceeds the oracle limit");
            } else {
                const auto fast = solve_master(mp);
                const auto slow = master_bruteforce(mp);
                const bool ok = fast.feasible == slow.feasible &&
                                (!fast.feasible || fast.objective == slow.objective);
                report.result(ok, "route selection",
                              std::to_string(mp.candidates.size()) + " candidates, objective " +
                                  format_cents(fast.feasible ? fast.objective : 0) + " vs " +
                                  format_cents(slow.feasible ? slow.objective : 0));
            }
        }
    }

    return report.all_ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"weekly planner for reconfigurable dial-a-ride transport"};
    app.require_subcommand(1);
    int rc = 0;

    // generate
    auto* gen = app.add_subcommand("generate", "write a synthetic instance file");
    GeneratorParams gp;
    std::string gen_out;
    gen->add_option("--seed", gp.seed, "random seed")->capture_default_str();
    gen->add_option("--users", gp.n_users, "number of transported users")->capture_default_str();
    gen->add_option("--establishments", gp.n_establishments, "number of establishments")
        ->capture_default_str();
    gen->add_option("--dispersion", gp.dispersion_km, "mean home distance, km")
        ->capture_default_str();
    gen->add_option("--wheelchair-share", gp.wheelchair_share, "wheelchair user share")
        ->capture_default_str();
    gen->add_option("--electric-share", gp.electric_share, "electric wheelchair share")
        ->capture_default_str();
    gen->add_option("--attendance-prob", gp.attendance_prob, "per-day attendance probability")
        ->capture_default_str();
    gen->add_option("--window-width", gp.window_width_min, "pickup window width, minutes")
        ->capture_default_str();
    gen->add_option("--preset", gp.vehicle_catalog_preset, "vehicle catalog: basic|standard|mixed")
        ->capture_default_str();
    gen->add_option("--out", gen_out, "output instance file")->required();
    gen->callback([&] { save_instance(generate_instance(gp), gen_out); });

    // solve-halfday
    auto* shd = app.add_subcommand("solve-halfday", "solve one half-day, write solution + pool stats");
    std::string shd_instance, shd_period = "mon-am", shd_out;
    LnsParams shd_lns;
    double shd_penalty = 0;
    shd->add_option("--instance", shd_instance, "instance file")->required();
    shd->add_option("--period", shd_period, "mon-am .. fri-pm")->capture_default_str();
    shd->add_option("--iterations", shd_lns.iterations, "search iterations")
        ->capture_default_str();
    shd->add_option("--seed", shd_lns.seed, "random seed")->capture_default_str();
    shd->add_option("--penalty", shd_penalty,
                    "cost per unassigned request (0 = 10x dearest single-request route)");
    shd->add_flag("--enrich-pool", shd_lns.enrich_pool_shifts,
                  "also pool +-5/+-10 minute shifted copies of feasible routes");
    shd->add_option("--out", shd_out, "output solution file")->required();
    shd->callback([&] {
        const Instance inst = load_instance(shd_instance);
        shd_lns.unassigned_penalty = parse_money(shd_penalty, "--penalty");
        const auto res = solve_halfday(inst, parse_period(shd_period), shd_lns);
        write_file(shd_out, halfday_to_json(res.best, inst, res.pool.size()));
        std::cerr << "cost " << format_cents(res.best.total_cost) << ", "
                  << res.best.unassigned.size() << " unassigned, pool " << res.pool.size()
                  << " routes\n";
    });

    // solve-week
    auto* swk = app.add_subcommand("solve-week", "run the weekly decision loop, write the plan");
    std::string swk_instance, swk_out;
    WeeklyParams wp;
    double swk_lambda0 = 0;
    int swk_max_classes = 0;
    swk->add_option("--instance", swk_instance, "instance file")->required();
    swk->add_option("--seed", wp.lns.seed, "random seed")->capture_default_str();
    swk->add_option("--iterations", wp.lns.iterations, "half-day search iterations")
        ->capture_default_str();
    swk->add_option("--lambda0", swk_lambda0,
                    "round-1 price per excess class (0 = pure cost, then auto-escalate)")
        ->capture_default_str();
    swk->add_option("--lambda-growth", wp.lambda_growth, "per-round price multiplier")
        ->capture_default_str()
        ->check(CLI::Range(1.0 + 1e-9, 1e6));
    swk->add_option("--max-rounds", wp.max_rounds, "selection rounds after the initial union")
        ->capture_default_str();
    auto* swk_cap = swk->add_option("--max-classes", swk_max_classes,
                                    "target: every user-half within this many classes "
                                    "(default target: zero excess classes)");
    swk->add_option("--window", wp.width, "time class width, minutes")->capture_default_str();
    swk->add_flag_callback("--no-intensify", [&] { wp.intensify = false; },
                           "skip majority-window re-generation");
    swk->add_option("--intensify-iterations", wp.intensify_iterations,
                    "search budget of constrained re-runs")
        ->capture_default_str();
    swk->add_option("--pool-subset-n", wp.pool_subset_n, "cheapest pool routes kept per request")
        ->capture_default_str();
    swk->add_option("--master-time-limit", wp.master_time_limit,
                    "seconds per selection round")
        ->capture_default_str();
    swk->add_option("--threads", wp.threads, "worker threads (0 = TCDARP_THREADS, then cores)")
        ->capture_default_str();
    swk->add_flag("--enrich-pool", wp.lns.enrich_pool_shifts,
                  "also pool +-5/+-10 minute shifted copies of feasible routes");
    swk->add_option("--out", swk_out, "output plan file")->required();
    swk->callback([&] {
        const Instance inst = load_instance(swk_instance);
        wp.lambda0 = parse_money(swk_lambda0, "--lambda0");
        if (swk_cap->count()) {
            if (swk_max_classes < 1)
                throw ValidationError("--max-classes", "must be at least 1");
            wp.max_classes_target = swk_max_classes;
        }
        const WeeklyPlan plan = solve_week(inst, wp);
        save_plan(plan, inst, swk_out);
        for (const auto& t : plan.trace)
            std::cerr << "round " << t.round << ": cost " << format_cents(t.total_cost)
                      << ", " << t.total_classes << " classes\n";
        std::cerr << (plan.target_met ? "target met\n" : "target not met\n");
        if (wp.max_classes_target && !plan.target_met) rc = 1;
    });

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "metrics of a plan file, to stdout");
    std::string ev_instance, ev_plan, ev_format = "json";
    double ev_factor = 0.25;
    bool ev_pooled = false;
    ev->add_option("--instance", ev_instance, "instance file")->required();
    ev->add_option("--plan", ev_plan, "plan file")->required();
    ev->add_option("--emission-factor", ev_factor, "kg CO2 per km")->capture_default_str();
    ev->add_option("--format", ev_format, "csv|json")->capture_default_str()
        ->check(CLI::IsMember({"csv", "json"}));
    ev->add_flag("--pool-halves", ev_pooled, "class AM and PM pickups together");
    ev->callback([&] {
        const Instance inst = load_instance(ev_instance);
        const auto metrics =
            evaluate_plan(inst, load_plan(ev_plan, inst), ev_factor, ev_pooled);
        std::cout << (ev_format == "csv" ? metrics_to_csv(metrics) : metrics_to_json(metrics));
    });

    // export
    auto* ex = app.add_subcommand("export", "map/table views of a plan file");
    std::string ex_instance, ex_plan, ex_format, ex_out;
    ex->add_option("--instance", ex_instance, "instance file (resolves ids in the plan)")
        ->required();
    ex->add_option("--plan", ex_plan, "plan file")->required();
    ex->add_option("--format", ex_format, "geojson|csv")->required()
        ->check(CLI::IsMember({"geojson", "csv"}));
    ex->add_option("--out", ex_out, "output file")->required();
    ex->callback([&] {
        const Instance inst = load_instance(ex_instance);
        const WeeklyPlan plan = load_plan(ex_plan, inst);
        write_file(ex_out, ex_format == "geojson" ? plan_to_geojson(plan, inst)
                                                  : plan_stops_csv(plan, inst));
    });

    // verify-oracle
    auto* vo = app.add_subcommand("verify-oracle",
                                  "replay exhaustive-reference comparisons on a tiny instance");
    std::string vo_instance, vo_period = "mon-am";
    int vo_iterations = 10000;
    std::uint64_t vo_seed = 0;
    vo->add_option("--instance", vo_instance, "instance file (oracle size limits apply)")
        ->required();
    vo->add_option("--period", vo_period, "mon-am .. fri-pm")->capture_default_str();
    vo->add_option("--iterations", vo_iterations, "half-day search iterations")
        ->capture_default_str();
    vo->add_option("--seed", vo_seed, "random seed")->capture_default_str();
    vo->callback([&] { rc = cmd_verify_oracle(vo_instance, vo_period, vo_iterations, vo_seed); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const UncoveredRequestError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}
