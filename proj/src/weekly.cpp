#include "tcdarp/weekly.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include <json.hpp>

namespace tcdarp {

using nlohmann::json;

namespace {

// splitmix64 step: decorrelates the per-period and per-round seeds derived
// from the single user-facing seed
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

int thread_budget(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("TCDARP_THREADS"))
        if (const int v = std::atoi(env); v > 0) return v;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? (int)hw : 1;
}

// Fixed job list over a small worker pool; results land in pre-sized slots,
// so the outcome does not depend on scheduling.
void run_parallel(int n_jobs, int threads, const std::function<void(int)>& fn) {
    threads = std::min(threads, n_jobs);
    if (threads <= 1) {
        for (int i = 0; i < n_jobs; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex mu;
    std::vector<std::thread> workers;
    workers.reserve(threads);
    for (int t = 0; t < threads; ++t)
        workers.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n_jobs) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    for (auto& w : workers) w.join();
    if (first_error) std::rethrow_exception(first_error);
}

// Adoption key for the decision loop, compared lexicographically: serving
// everyone outranks regularity, regularity outranks cost.
struct PlanState {
    int missing = 0;
    int metric = 0; // total excess classes, or excess over K under a K target
    Cents cost = 0;
    int total_classes = 0;

    auto key() const { return std::tie(missing, metric, cost); }
};

PlanState assess(const Instance& inst, const std::array<HalfDaySolution, kPeriodCount>& periods,
                 Minutes width, const std::optional<int>& cap) {
    PlanState st;
    const PickupTimes pt = extract_pickup_times(inst, periods);
    st.missing = (int)pt.missing.size();
    const ConsistencyReport rep = consistency_from_times(inst, pt.times, width, false);
    st.total_classes = rep.total_classes;
    if (!cap)
        st.metric = rep.total_excess;
    else
        for (const auto& u : rep.users)
            st.metric += std::max(0, u.am_classes - *cap) + std::max(0, u.pm_classes - *cap);
    for (const auto& h : periods) st.cost += h.total_cost;
    return st;
}

Cents lambda_for_round(int round, const WeeklyParams& params, Cents round0_cost) {
    if (round <= 1) return params.lambda0;
    // with the pure-cost default the ladder seeds itself from the solution
    // scale, so the price eventually dominates any single route swap
    const Cents base =
        params.lambda0 > 0 ? params.lambda0 : std::max<Cents>(1, round0_cost / 100);
    return (Cents)std::llround((double)base * std::pow(params.lambda_growth, round - 1));
}

std::array<HalfDaySolution, kPeriodCount> periods_from_selection(const MasterProblem& mp,
                                                                 const MasterSolution& ms,
                                                                 const RoutePool& pool) {
    std::array<HalfDaySolution, kPeriodCount> out;
    for (int p = 0; p < kPeriodCount; ++p) out[p].period = PeriodId{p};
    for (int c : ms.selected) {
        const MasterCandidate& cand = mp.candidates[c];
        out[cand.period].routes.push_back(pool.routes[cand.pool_id].route);
        out[cand.period].total_cost += cand.cost;
    }
    return out;
}

// Majority-window re-generation: each user-half with several classes gets its
// most-used window; periods whose time falls outside re-run the half-day
// search with that user's pickup window narrowed to the majority window.
void intensify(const Instance& inst, const WeeklyParams& params, const WeeklyPlan& plan,
               RoutePool& pool, int round, int threads) {
    const PickupTimes pt = extract_pickup_times(inst, plan.periods);
    std::array<std::map<int, TimeWindow>, kPeriodCount> narrowed;
    for (size_t u = 0; u < inst.users.size(); ++u)
        for (int half = 0; half < 2; ++half) { // 0 = AM periods, 1 = PM periods
            std::vector<std::pair<int, Minutes>> present;
            std::vector<Minutes> times;
            for (int p = half; p < kPeriodCount; p += 2)
                if (pt.times[u][p]) {
                    present.emplace_back(p, *pt.times[u][p]);
                    times.push_back(*pt.times[u][p]);
                }
            if (times.size() < 2) continue;
            auto [count, windows] = time_classes(times, params.width);
            if (count <= 1) continue;
            const TimeWindow* majority = nullptr;
            int covered = -1; // ties: windows ascend, so the earliest wins
            for (const auto& w : windows) {
                int c = 0;
                for (Minutes t : times) c += t >= w.earliest && t <= w.latest;
                if (c > covered) {
                    covered = c;
                    majority = &w;
                }
            }
            const TimeWindow& orig =
                half == 0 ? inst.users[u].pickup_am : inst.users[u].pickup_pm;
            const TimeWindow target{std::max(majority->earliest, orig.earliest),
                                    std::min(majority->latest, orig.latest)};
            if (target.earliest > target.latest) continue;
            for (const auto& [p, t] : present)
                if (t < majority->earliest || t > majority->latest) narrowed[p][(int)u] = target;
        }

    std::vector<int> jobs;
    for (int p = 0; p < kPeriodCount; ++p)
        if (!narrowed[p].empty()) jobs.push_back(p);
    if (jobs.empty()) return;
    std::vector<RoutePool> pools(jobs.size());
    run_parallel((int)jobs.size(), threads, [&](int j) {
        const int p = jobs[j];
        LnsParams lp = params.lns;
        lp.iterations = params.intensify_iterations;
        lp.seed = mix_seed(params.lns.seed, 1000 + (std::uint64_t)round * kPeriodCount + p);
        pools[j] = solve_halfday_constrained(inst, PeriodId{p}, lp, narrowed[p]).pool;
    });
    for (auto& extra : pools) pool.merge(extra);
}

} // namespace

WeeklyPlan solve_week(const Instance& inst, const WeeklyParams& params) {
    const int threads = thread_budget(params.threads);
    WeeklyPlan plan;
    RoutePool pool;
    {
        std::array<HalfDayResult, kPeriodCount> results;
        run_parallel(kPeriodCount, threads, [&](int p) {
            LnsParams lp = params.lns;
            lp.seed = mix_seed(params.lns.seed, (std::uint64_t)p);
            results[p] = solve_halfday(inst, PeriodId{p}, lp);
        });
        for (int p = 0; p < kPeriodCount; ++p) {
            plan.periods[p] = std::move(results[p].best);
            pool.merge(results[p].pool);
        }
    }

    PlanState cur = assess(inst, plan.periods, params.width, params.max_classes_target);
    const Cents round0_cost = cur.cost;
    plan.trace.push_back({0, cur.cost, cur.total_classes});
    plan.target_met = cur.missing == 0 && cur.metric == 0;

    for (int round = 1; round <= params.max_rounds && !plan.target_met; ++round) {
        const Cents lambda = lambda_for_round(round, params, round0_cost);
        bool have_master = true;
        MasterProblem mp;
        try {
            mp = build_master(pool, inst, params.pool_subset_n, MasterMode::weighted(lambda),
                              params.width, &plan.periods);
        } catch (const UncoveredRequestError&) {
            have_master = false; // pool can't serve everyone yet; keep generating
        }
        if (have_master) {
            const MasterSolution ms = solve_master(mp, params.master_time_limit);
            if (ms.feasible) {
                auto candidate = periods_from_selection(mp, ms, pool);
                const PlanState cs =
                    assess(inst, candidate, params.width, params.max_classes_target);
                if (cs.key() < cur.key()) {
                    plan.periods = std::move(candidate);
                    cur = cs;
                }
            }
        }
        plan.trace.push_back({round, cur.cost, cur.total_classes});
        plan.target_met = cur.missing == 0 && cur.metric == 0;
        if (plan.target_met || round == params.max_rounds) break;
        if (params.intensify) intensify(inst, params, plan, pool, round, threads);
    }

    plan.total_cost = cur.cost;
    const PickupTimes pt = extract_pickup_times(inst, plan.periods);
    plan.report = consistency_from_times(inst, pt.times, params.width, false);
    return plan;
}

namespace {

Cents div_half_up(Cents numerator, Cents denominator) {
    return (numerator + denominator / 2) / denominator;
}

} // namespace

PlanMetrics evaluate_plan(const Instance& inst, const WeeklyPlan& plan, double kg_co2_per_km,
                          bool pooled) {
    PlanMetrics m;
    std::vector<Minutes> rides;
    for (int p = 0; p < kPeriodCount; ++p) {
        const PeriodId period{p};
        const auto requests = expand_requests(inst, period);
        const HalfDaySolution& half = plan.periods[p];
        const std::string where = "periods[" + period.name() + "]";
        if (half.period != period) throw ValidationError(where, "period id mismatch");
        std::vector<int> served(requests.size(), 0);
        Cents period_cost = 0;
        for (size_t i = 0; i < half.routes.size(); ++i) {
            const Route& r = half.routes[i];
            const std::string rwhere = where + ".routes[" + std::to_string(i) + "]";
            if (r.period != period) throw ValidationError(rwhere, "route period mismatch");
            if (const auto bad = verify_route(r, inst, requests); !bad.empty())
                throw ValidationError(rwhere, bad.front());
            if (r.stops.empty()) continue;
            const VehicleType& vt = inst.vehicle_types[r.vehicle_type];
            ++m.vehicles_used[p];
            period_cost += r.cost;
            m.total_cost += r.cost;
            m.cost_fixed += vt.fixed_cost;
            const Minutes dur = r.schedule.duration();
            m.total_vehicle_minutes += dur;
            const Meters meters = route_meters(r, inst);
            m.total_meters += meters;
            m.cost_hourly += div_half_up(vt.cost_per_hour * dur, 60);
            m.cost_km += div_half_up(vt.cost_per_km * meters, 1000);
            std::vector<Minutes> picked_dep(requests.size(), -1);
            for (size_t s = 0; s < r.stops.size(); ++s)
                for (const auto& a : r.stops[s].actions) {
                    if (a.kind == StopAction::Kind::Pickup) {
                        picked_dep[a.request] = r.schedule.stops[s].departure;
                        ++served[a.request];
                    } else if (picked_dep[a.request] >= 0) {
                        rides.push_back(r.schedule.stops[s].service_start -
                                        picked_dep[a.request]);
                    }
                }
        }
        for (int idx : half.unassigned) {
            if (idx < 0 || idx >= (int)requests.size())
                throw ValidationError(where, "unassigned entry out of range");
            if (served[idx] > 0)
                throw ValidationError(where, "unassigned entry is actually served");
        }
        for (size_t ri = 0; ri < requests.size(); ++ri) {
            if (served[ri] == 0)
                throw MissingServiceError(inst.users[requests[ri].user].id, period.name());
            if (served[ri] > 1)
                throw ValidationError(where, "user " + inst.users[requests[ri].user].id +
                                                 " served more than once");
        }
        if (period_cost != half.total_cost)
            throw ValidationError(where, "stored total_cost disagrees with the routes");
    }
    if (!rides.empty()) {
        std::int64_t sum = 0;
        for (Minutes r : rides) {
            sum += r;
            m.max_ride_min = std::max(m.max_ride_min, r);
        }
        m.mean_ride_min = (double)sum / (double)rides.size();
    }
    m.kg_co2 = (double)m.total_meters / 1000.0 * kg_co2_per_km;
    const PickupTimes pt = extract_pickup_times(inst, plan.periods);
    m.report = consistency_from_times(inst, pt.times, inst.consistency_width, pooled);
    return m;
}

// ---- serialization -------------------------------------------------------

namespace {

json report_to_json(const ConsistencyReport& rep) {
    json jr;
    jr["max_user_classes"] = rep.max_user_classes;
    jr["pooled"] = rep.pooled;
    jr["total_classes"] = rep.total_classes;
    jr["total_excess"] = rep.total_excess;
    jr["width"] = rep.width;
    json users = json::array();
    for (const auto& u : rep.users) {
        json ju;
        ju["am_classes"] = u.am_classes;
        ju["pm_classes"] = u.pm_classes;
        json aw = json::array(), pw = json::array();
        for (const auto& w : u.am_windows) aw.push_back(json::array({w.earliest, w.latest}));
        for (const auto& w : u.pm_windows) pw.push_back(json::array({w.earliest, w.latest}));
        ju["am_windows"] = aw;
        ju["pm_windows"] = pw;
        json times = json::array();
        for (int p = 0; p < kPeriodCount; ++p)
            times.push_back(u.times[p] ? json(*u.times[p]) : json(nullptr));
        ju["times"] = times;
        ju["user"] = u.user_id;
        users.push_back(ju);
    }
    jr["users"] = users;
    return jr;
}

json route_to_json(const Route& r, const Instance& inst, const std::vector<Request>& requests) {
    json jr;
    jr["cost"] = scaled_to_double(r.cost, 2);
    jr["depot_arrival"] = r.schedule.depot_arrival;
    jr["depot_departure"] = r.schedule.depot_departure;
    jr["leg_configs"] = r.leg_configs;
    jr["n_reconfigs"] = r.n_reconfigs;
    json stops = json::array();
    for (size_t s = 0; s < r.stops.size(); ++s) {
        json js;
        json actions = json::array();
        for (const auto& a : r.stops[s].actions) {
            json ja;
            ja["kind"] = a.kind == StopAction::Kind::Pickup ? "pickup" : "delivery";
            ja["user"] = inst.users[requests[a.request].user].id;
            actions.push_back(ja);
        }
        js["actions"] = actions;
        js["arrival"] = r.schedule.stops[s].arrival;
        js["departure"] = r.schedule.stops[s].departure;
        js["location"] = inst.locations[r.stops[s].location].id;
        js["service_start"] = r.schedule.stops[s].service_start;
        stops.push_back(js);
    }
    jr["stops"] = stops;
    jr["vehicle_type"] = inst.vehicle_types[r.vehicle_type].id;
    return jr;
}

} // namespace

std::string halfday_to_json(const HalfDaySolution& half, const Instance& inst, size_t pool_size) {
    const auto requests = expand_requests(inst, half.period);
    json doc;
    doc["period"] = half.period.name();
    doc["pool_size"] = pool_size;
    json routes = json::array();
    for (const auto& r : half.routes) routes.push_back(route_to_json(r, inst, requests));
    doc["routes"] = routes;
    doc["total_cost"] = scaled_to_double(half.total_cost, 2);
    json un = json::array();
    for (int idx : half.unassigned) un.push_back(inst.users[requests[idx].user].id);
    doc["unassigned"] = un;
    return doc.dump(2) + "\n";
}

std::string plan_to_json(const WeeklyPlan& plan, const Instance& inst) {
    json doc;
    json periods = json::array();
    for (int p = 0; p < kPeriodCount; ++p) {
        const PeriodId period{p};
        const auto requests = expand_requests(inst, period);
        const HalfDaySolution& half = plan.periods[p];
        json jp;
        jp["period"] = period.name();
        json routes = json::array();
        for (const auto& r : half.routes) routes.push_back(route_to_json(r, inst, requests));
        jp["routes"] = routes;
        jp["total_cost"] = scaled_to_double(half.total_cost, 2);
        json un = json::array();
        for (int idx : half.unassigned) un.push_back(inst.users[requests[idx].user].id);
        jp["unassigned"] = un;
        periods.push_back(jp);
    }
    doc["periods"] = periods;
    doc["report"] = report_to_json(plan.report);
    doc["target_met"] = plan.target_met;
    doc["total_cost"] = scaled_to_double(plan.total_cost, 2);
    json trace = json::array();
    for (const auto& t : plan.trace) {
        json jt;
        jt["round"] = t.round;
        jt["total_classes"] = t.total_classes;
        jt["total_cost"] = scaled_to_double(t.total_cost, 2);
        trace.push_back(jt);
    }
    doc["trace"] = trace;
    return doc.dump(2) + "\n";
}

WeeklyPlan plan_from_json(const std::string& text, const Instance& inst) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("plan: ") + e.what());
    }
    WeeklyPlan plan;
    try {
        const json& periods = doc.at("periods");
        if (!periods.is_array() || periods.size() != kPeriodCount)
            throw ParseError("plan.periods: expected an array of the 10 half-days");
        for (int p = 0; p < kPeriodCount; ++p) {
            const PeriodId period{p};
            const json& jp = periods[p];
            const std::string where = "periods[" + std::to_string(p) + "]";
            if (jp.at("period").get<std::string>() != period.name())
                throw ParseError(where + ": expected period " + period.name());
            const auto requests = expand_requests(inst, period);
            std::map<int, int> request_of_user;
            for (size_t i = 0; i < requests.size(); ++i)
                request_of_user[requests[i].user] = (int)i;
            auto request_of = [&](const std::string& id, const std::string& ctx) {
                auto uit = inst.user_index.find(id);
                if (uit == inst.user_index.end())
                    throw ParseError(ctx + ": unknown user " + id);
                auto rit = request_of_user.find(uit->second);
                if (rit == request_of_user.end())
                    throw ParseError(ctx + ": user " + id + " does not travel in " +
                                     period.name());
                return rit->second;
            };
            HalfDaySolution& half = plan.periods[p];
            half.period = period;
            for (const json& jr : jp.at("routes")) {
                Route r;
                r.period = period;
                const std::string vt_id = jr.at("vehicle_type").get<std::string>();
                auto vit = inst.vehicle_type_index.find(vt_id);
                if (vit == inst.vehicle_type_index.end())
                    throw ParseError(where + ": unknown vehicle type " + vt_id);
                r.vehicle_type = vit->second;
                for (const json& js : jr.at("stops")) {
                    Stop stop;
                    const std::string loc_id = js.at("location").get<std::string>();
                    auto lit = inst.location_index.find(loc_id);
                    if (lit == inst.location_index.end())
                        throw ParseError(where + ": unknown location " + loc_id);
                    stop.location = lit->second;
                    for (const json& ja : js.at("actions")) {
                        const std::string kind = ja.at("kind").get<std::string>();
                        if (kind != "pickup" && kind != "delivery")
                            throw ParseError(where + ": action kind must be pickup or delivery");
                        stop.actions.push_back(
                            {kind == "pickup" ? StopAction::Kind::Pickup
                                              : StopAction::Kind::Delivery,
                             request_of(ja.at("user").get<std::string>(), where)});
                    }
                    r.stops.push_back(std::move(stop));
                    r.schedule.stops.push_back({js.at("arrival").get<Minutes>(),
                                                js.at("service_start").get<Minutes>(),
                                                js.at("departure").get<Minutes>()});
                }
                r.schedule.depot_departure = jr.at("depot_departure").get<Minutes>();
                r.schedule.depot_arrival = jr.at("depot_arrival").get<Minutes>();
                r.leg_configs = jr.at("leg_configs").get<std::vector<int>>();
                r.n_reconfigs = jr.at("n_reconfigs").get<int>();
                r.cost = parse_scaled_decimal(jr.at("cost").get<double>(), 2, where + ".cost");
                half.routes.push_back(std::move(r));
            }
            for (const json& ju : jp.at("unassigned"))
                half.unassigned.push_back(request_of(ju.get<std::string>(), where));
            std::sort(half.unassigned.begin(), half.unassigned.end());
            half.total_cost = parse_scaled_decimal(jp.at("total_cost").get<double>(), 2,
                                                   where + ".total_cost");
        }
        plan.target_met = doc.at("target_met").get<bool>();
        for (const json& jt : doc.at("trace"))
            plan.trace.push_back({jt.at("round").get<int>(),
                                  parse_scaled_decimal(jt.at("total_cost").get<double>(), 2,
                                                       "trace.total_cost"),
                                  jt.at("total_classes").get<int>()});
        // report and totals are derived data: recompute rather than trust
        Minutes width = inst.consistency_width;
        if (doc.contains("report") && doc["report"].contains("width"))
            width = doc["report"]["width"].get<Minutes>();
        const PickupTimes pt = extract_pickup_times(inst, plan.periods);
        plan.report = consistency_from_times(inst, pt.times, width, false);
        for (const auto& h : plan.periods) plan.total_cost += h.total_cost;
    } catch (const json::exception& e) {
        throw ParseError(std::string("plan: ") + e.what());
    }
    return plan;
}

WeeklyPlan load_plan(const std::string& path, const Instance& inst) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return plan_from_json(text, inst);
}

void save_plan(const WeeklyPlan& plan, const Instance& inst, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << plan_to_json(plan, inst);
    if (!out) throw IoError("failed writing " + path);
}

// ---- metrics output ------------------------------------------------------

std::string metrics_to_json(const PlanMetrics& m) {
    json doc;
    json breakdown;
    breakdown["fixed"] = scaled_to_double(m.cost_fixed, 2);
    breakdown["hourly"] = scaled_to_double(m.cost_hourly, 2);
    breakdown["km"] = scaled_to_double(m.cost_km, 2);
    doc["cost_breakdown"] = breakdown;
    json cons;
    cons["max_user_classes"] = m.report.max_user_classes;
    cons["pooled"] = m.report.pooled;
    cons["total_classes"] = m.report.total_classes;
    cons["total_excess"] = m.report.total_excess;
    cons["width"] = m.report.width;
    doc["consistency"] = cons;
    doc["kg_co2"] = m.kg_co2;
    doc["max_ride_min"] = m.max_ride_min;
    doc["mean_ride_min"] = m.mean_ride_min;
    doc["total_cost"] = scaled_to_double(m.total_cost, 2);
    doc["total_km"] = scaled_to_double(m.total_meters, 3);
    doc["total_vehicle_hours"] = m.total_vehicle_minutes / 60.0;
    json used = json::array();
    for (int p = 0; p < kPeriodCount; ++p) used.push_back(m.vehicles_used[p]);
    doc["vehicles_used"] = used;
    return doc.dump(2) + "\n";
}

std::string metrics_to_csv(const PlanMetrics& m) {
    char buf[64];
    std::string out = "metric,value\n";
    auto fixed3 = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.3f", v);
        return std::string(buf);
    };
    out += "total_cost," + format_cents(m.total_cost) + "\n";
    out += "cost_fixed," + format_cents(m.cost_fixed) + "\n";
    out += "cost_hourly," + format_cents(m.cost_hourly) + "\n";
    out += "cost_km," + format_cents(m.cost_km) + "\n";
    out += "total_km," + fixed3((double)m.total_meters / 1000.0) + "\n";
    out += "total_vehicle_hours," + fixed3(m.total_vehicle_minutes / 60.0) + "\n";
    for (int p = 0; p < kPeriodCount; ++p)
        out += "vehicles_" + PeriodId{p}.name() + "," + std::to_string(m.vehicles_used[p]) + "\n";
    out += "mean_ride_min," + fixed3(m.mean_ride_min) + "\n";
    out += "max_ride_min," + std::to_string(m.max_ride_min) + "\n";
    out += "kg_co2," + fixed3(m.kg_co2) + "\n";
    out += "total_classes," + std::to_string(m.report.total_classes) + "\n";
    out += "total_excess," + std::to_string(m.report.total_excess) + "\n";
    out += "max_user_classes," + std::to_string(m.report.max_user_classes) + "\n";
    return out;
}

} // namespace tcdarp
