#include "tcdarp/lns.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace tcdarp {

std::string route_signature(const Route& route, const Instance& inst,
                            const std::vector<Request>& requests) {
    std::ostringstream sig;
    sig << route.period.name() << '|' << inst.vehicle_types[route.vehicle_type].id << '|';
    for (const auto& stop : route.stops)
        for (const auto& a : stop.actions)
            sig << (a.kind == StopAction::Kind::Pickup ? 'P' : 'D')
                << inst.users[requests[a.request].user].id << ' ';
    sig << '|' << route.schedule.depot_departure;
    for (const auto& st : route.schedule.stops) sig << ' ' << st.service_start;
    return sig.str();
}

PoolRoute make_pool_route(const Route& route, const Instance& inst,
                          const std::vector<Request>& requests) {
    PoolRoute pr;
    pr.period = route.period;
    pr.route = route;
    pr.cost = route.cost;
    for (size_t i = 0; i < route.stops.size(); ++i)
        for (const auto& a : route.stops[i].actions)
            if (a.kind == StopAction::Kind::Pickup) {
                pr.served.push_back(requests[a.request].user);
                pr.pickup_times.emplace_back(requests[a.request].user,
                                             route.schedule.stops[i].service_start);
            }
    std::sort(pr.served.begin(), pr.served.end());
    std::sort(pr.pickup_times.begin(), pr.pickup_times.end());
    pr.signature = route_signature(route, inst, requests);
    return pr;
}

int RoutePool::add(PoolRoute r) {
    auto it = by_signature.find(r.signature);
    if (it != by_signature.end()) {
        if (r.cost < routes[it->second].cost) {
            r.id = it->second;
            routes[it->second] = std::move(r);
        }
        return it->second;
    }
    r.id = (int)routes.size();
    by_signature[r.signature] = r.id;
    routes.push_back(std::move(r));
    return routes.size() - 1;
}

void RoutePool::merge(const RoutePool& other) {
    for (const auto& r : other.routes) add(r);
}

Cents default_unassigned_penalty(const Instance& inst, const std::vector<Request>& requests) {
    Cents dearest = 0;
    for (int r = 0; r < (int)requests.size(); ++r) {
        Cents best = -1;
        for (int t = 0; t < (int)inst.vehicle_types.size(); ++t) {
            std::vector<Stop> stops{
                Stop{requests[r].pickup_loc, {{StopAction::Kind::Pickup, r}}},
                Stop{requests[r].delivery_loc, {{StopAction::Kind::Delivery, r}}}};
            auto route = build_route(inst, requests[r].period, t, std::move(stops), requests);
            if (route && (best < 0 || route->cost < best)) best = route->cost;
        }
        dearest = std::max(dearest, best);
    }
    return 10 * dearest;
}

namespace {

// Deterministic uniform draws; <random> distributions are not portable.
struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    double uniform() { return (double)(gen() >> 11) * 0x1.0p-53; }
    int pick(int n) { return std::min(n - 1, (int)(uniform() * n)); }
};

struct State {
    std::vector<Route> routes;
    std::vector<int> unassigned;
    Cents cost = 0;
};

Cents state_cost(const State& s, Cents penalty) {
    Cents c = penalty * (Cents)s.unassigned.size();
    for (const auto& r : s.routes) c += r.cost;
    return c;
}

struct Engine {
    const Instance& inst;
    PeriodId period;
    const std::vector<Request>& requests;          // effective (maybe narrowed)
    const std::vector<Request>& original_requests; // pooling checks
    Cents penalty;
    Rng rng;

    Engine(const Instance& inst, PeriodId period, const std::vector<Request>& requests,
           const std::vector<Request>& original, Cents penalty, std::uint64_t seed)
        : inst(inst), period(period), requests(requests), original_requests(original),
          penalty(penalty), rng(seed) {}

    std::vector<int> assigned_of(const State& s) const {
        std::vector<int> a;
        for (const auto& route : s.routes)
            for (const auto& stop : route.stops)
                for (const auto& act : stop.actions)
                    if (act.kind == StopAction::Kind::Pickup) a.push_back(act.request);
        std::sort(a.begin(), a.end());
        return a;
    }

    int vehicles_used(const State& s, int vt) const {
        int n = 0;
        for (const auto& r : s.routes) n += r.vehicle_type == vt;
        return n;
    }

    // Drops one request from its route, rebuilding the route (always feasible:
    // removing stops only relaxes the schedule). Empty routes disappear.
    void remove_request(State& s, int r) {
        for (size_t i = 0; i < s.routes.size(); ++i) {
            bool here = false;
            std::vector<Stop> rest;
            for (const auto& stop : s.routes[i].stops) {
                bool mine = false;
                for (const auto& a : stop.actions) mine = mine || a.request == r;
                if (mine)
                    here = true;
                else
                    rest.push_back(stop);
            }
            if (!here) continue;
            if (rest.empty()) {
                s.routes.erase(s.routes.begin() + i);
            } else {
                s.routes[i] = *build_route(inst, period, s.routes[i].vehicle_type,
                                           std::move(rest), requests);
            }
            return;
        }
    }

    // ---- destroy operators ----------------------------------------------

    void destroy_random(State& s, std::vector<int>& bank, int q) {
        for (int it = 0; it < q; ++it) {
            auto assigned = assigned_of(s);
            if (assigned.empty()) return;
            const int r = assigned[rng.pick((int)assigned.size())];
            remove_request(s, r);
            bank.push_back(r);
        }
    }

    void destroy_worst(State& s, std::vector<int>& bank, int q) {
        for (int it = 0; it < q; ++it) {
            int worst = -1;
            Cents worst_saving = -1;
            for (size_t i = 0; i < s.routes.size(); ++i) {
                const Route& route = s.routes[i];
                for (const auto& stop : route.stops)
                    for (const auto& a : stop.actions) {
                        if (a.kind != StopAction::Kind::Pickup) continue;
                        std::vector<Stop> rest;
                        for (const auto& st : route.stops) {
                            bool mine = false;
                            for (const auto& act : st.actions) mine = mine || act.request == a.request;
                            if (!mine) rest.push_back(st);
                        }
                        Cents reduced = 0;
                        if (!rest.empty())
                            reduced = build_route(inst, period, route.vehicle_type, std::move(rest),
                                                  requests)
                                          ->cost;
                        const Cents saving = route.cost - reduced;
                        if (saving > worst_saving ||
                            (saving == worst_saving && a.request < worst)) {
                            worst_saving = saving;
                            worst = a.request;
                        }
                    }
            }
            if (worst < 0) return;
            remove_request(s, worst);
            bank.push_back(worst);
        }
    }

    // relatedness = pickup distance / max pickup distance + |pickup time
    // difference| / 480; times and positions snapshotted before removal
    void destroy_related(State& s, std::vector<int>& bank, int q) {
        auto assigned = assigned_of(s);
        if (assigned.empty()) return;
        std::vector<Minutes> time_of(requests.size(), 0);
        for (const auto& route : s.routes)
            for (size_t i = 0; i < route.stops.size(); ++i)
                for (const auto& a : route.stops[i].actions)
                    if (a.kind == StopAction::Kind::Pickup)
                        time_of[a.request] = route.schedule.stops[i].service_start;
        Meters dmax = 1;
        for (int a : assigned)
            for (int b : assigned)
                dmax = std::max(dmax, inst.matrix.distance(requests[a].pickup_loc,
                                                           requests[b].pickup_loc));
        std::vector<int> removed;
        const int seed = assigned[rng.pick((int)assigned.size())];
        removed.push_back(seed);
        remove_request(s, seed);
        bank.push_back(seed);
        while ((int)removed.size() < q) {
            assigned = assigned_of(s);
            if (assigned.empty()) break;
            const int ref = removed[rng.pick((int)removed.size())];
            int pick = -1;
            double best = 0;
            for (int r : assigned) {
                const double rel =
                    (double)inst.matrix.distance(requests[ref].pickup_loc, requests[r].pickup_loc) /
                        (double)dmax +
                    std::abs(time_of[ref] - time_of[r]) / 480.0;
                if (pick < 0 || rel < best || (rel == best && r < pick)) {
                    best = rel;
                    pick = r;
                }
            }
            removed.push_back(pick);
            remove_request(s, pick);
            bank.push_back(pick);
        }
    }

    // ---- repair operators -----------------------------------------------

    struct Option {
        bool found = false;
        Cents delta = 0;
        int route = -1; // -1: open new vehicle of type new_vt
        int new_vt = -1;
        Route result;
    };

    // Feasible placements of r: best position in each route, plus one fresh
    // route per vehicle type with remaining availability.
    std::vector<Option> options_of(const State& s, int r) {
        std::vector<Option> opts;
        for (size_t i = 0; i < s.routes.size(); ++i) {
            auto ins = evaluate_insertion(s.routes[i], r, inst, requests);
            if (!ins) continue;
            opts.push_back(Option{true, ins->cost_delta, (int)i, -1, std::move(ins->route)});
        }
        for (int t = 0; t < (int)inst.vehicle_types.size(); ++t) {
            const VehicleType& vt = inst.vehicle_types[t];
            if (!vt.unlimited() && vehicles_used(s, t) >= vt.available) continue;
            std::vector<Stop> stops{
                Stop{requests[r].pickup_loc, {{StopAction::Kind::Pickup, r}}},
                Stop{requests[r].delivery_loc, {{StopAction::Kind::Delivery, r}}}};
            auto route = build_route(inst, period, t, std::move(stops), requests);
            if (!route) continue;
            opts.push_back(Option{true, route->cost, -1, t, std::move(*route)});
        }
        return opts;
    }

    void apply(State& s, Option&& opt) {
        if (opt.route >= 0)
            s.routes[opt.route] = std::move(opt.result);
        else
            s.routes.push_back(std::move(opt.result));
    }

    // insert the globally cheapest (request, position) first, repeatedly
    void repair_best(State& s, std::vector<int>& bank) {
        while (!bank.empty()) {
            int best_r = -1;
            size_t best_pos = 0;
            Option best;
            for (size_t bi = 0; bi < bank.size(); ++bi) {
                auto opts = options_of(s, bank[bi]);
                for (auto& o : opts)
                    if (o.found && (best_r < 0 || o.delta < best.delta)) {
                        best = std::move(o);
                        best_r = bank[bi];
                        best_pos = bi;
                    }
            }
            if (best_r < 0) break; // nothing fits anywhere
            apply(s, std::move(best));
            bank.erase(bank.begin() + best_pos);
        }
        for (int r : bank) s.unassigned.push_back(r);
        bank.clear();
    }

    // insert the request that would regret skipping its best slot the most:
    // regret = second-best delta - best delta, infinite when only one option
    void repair_regret(State& s, std::vector<int>& bank) {
        while (!bank.empty()) {
            int pick = -1;
            size_t pick_pos = 0;
            double pick_regret = -1;
            Option pick_opt;
            for (size_t bi = 0; bi < bank.size(); ++bi) {
                auto opts = options_of(s, bank[bi]);
                if (opts.empty()) continue;
                size_t b1 = 0;
                for (size_t i = 1; i < opts.size(); ++i)
                    if (opts[i].delta < opts[b1].delta) b1 = i;
                double regret = std::numeric_limits<double>::infinity();
                if (opts.size() >= 2) {
                    Cents second = -1;
                    for (size_t i = 0; i < opts.size(); ++i)
                        if (i != b1 && (second < 0 || opts[i].delta < second)) second = opts[i].delta;
                    regret = (double)(second - opts[b1].delta);
                }
                if (regret > pick_regret) { // ties keep the smallest request index
                    pick_regret = regret;
                    pick = bank[bi];
                    pick_pos = bi;
                    pick_opt = std::move(opts[b1]);
                }
            }
            if (pick < 0) break;
            apply(s, std::move(pick_opt));
            bank.erase(bank.begin() + pick_pos);
        }
        for (int r : bank) s.unassigned.push_back(r);
        bank.clear();
    }

    // ---- pooling ---------------------------------------------------------

    void pool_state(const State& s, RoutePool& pool, bool enrich) {
        for (const auto& route : s.routes) {
            if (!verify_route(route, inst, original_requests).empty())
                continue; // narrowed-window runs must still satisfy the originals
            pool.add(make_pool_route(route, inst, original_requests));
            if (!enrich) continue;
            for (Minutes shift : {-10, -5, 5, 10}) {
                bool fits = true;
                for (size_t i = 0; i < route.stops.size() && fits; ++i) {
                    const Minutes t = route.schedule.stops[i].service_start + shift;
                    for (const auto& a : route.stops[i].actions) {
                        const Request& rq = original_requests[a.request];
                        const TimeWindow& w =
                            a.kind == StopAction::Kind::Pickup ? rq.pickup_window : rq.delivery_window;
                        if (t < w.earliest || t > w.latest) fits = false;
                    }
                }
                if (!fits) continue;
                Route shifted = route;
                shifted.schedule.depot_departure += shift;
                shifted.schedule.depot_arrival += shift;
                for (auto& st : shifted.schedule.stops) {
                    st.arrival += shift;
                    st.service_start += shift;
                    st.departure += shift;
                }
                pool.add(make_pool_route(shifted, inst, original_requests));
            }
        }
    }

    // ---- main loop -------------------------------------------------------

    HalfDayResult run(const LnsParams& params) {
        HalfDayResult out;
        State cur;
        {
            HalfDaySolution init = initial_solution(inst, period, requests, penalty);
            cur.routes = std::move(init.routes);
            cur.unassigned = std::move(init.unassigned);
        }
        cur.cost = state_cost(cur, penalty);
        pool_state(cur, out.pool, params.enrich_pool_shifts);
        State best = cur;

        const int n = (int)requests.size();
        double temp = params.sa_start_factor * (double)cur.cost;
        if (temp <= 0) temp = 1;
        for (int it = 0; it < params.iterations && n > 0; ++it) {
            // draw order is fixed: destroy op, fraction, (operator draws),
            // repair op, acceptance — identical runs replay identically
            const int dop = rng.pick(3);
            const double frac =
                params.removal_min + (params.removal_max - params.removal_min) * rng.uniform();
            const int q = (int)std::ceil(frac * n);
            State cand = cur;
            std::vector<int> bank;
            std::swap(bank, cand.unassigned);
            if (dop == 0)
                destroy_random(cand, bank, q);
            else if (dop == 1)
                destroy_worst(cand, bank, q);
            else
                destroy_related(cand, bank, q);
            std::sort(bank.begin(), bank.end());
            if (rng.pick(2) == 0)
                repair_best(cand, bank);
            else
                repair_regret(cand, bank);
            std::sort(cand.unassigned.begin(), cand.unassigned.end());
            cand.cost = state_cost(cand, penalty);

            const Cents delta = cand.cost - cur.cost;
            bool accept = delta < 0;
            if (!accept && temp > 0)
                accept = rng.uniform() < std::exp(-(double)delta / temp);
            if (accept) {
                cur = std::move(cand);
                pool_state(cur, out.pool, params.enrich_pool_shifts);
                if (cur.cost < best.cost) best = cur;
            }
            temp *= params.sa_cooling;
            out.best_cost_after_iteration.push_back(best.cost);
        }

        out.best.period = period;
        out.best.routes = std::move(best.routes);
        out.best.unassigned = std::move(best.unassigned);
        out.best.total_cost = best.cost;
        return out;
    }
};

} // namespace

HalfDaySolution initial_solution(const Instance& inst, PeriodId period,
                                 const std::vector<Request>& requests, Cents penalty) {
    HalfDaySolution sol;
    sol.period = period;
    std::vector<int> order(requests.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = (int)i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return requests[a].pickup_window.earliest < requests[b].pickup_window.earliest;
    });

    auto used = [&](int vt) {
        int n = 0;
        for (const auto& r : sol.routes) n += r.vehicle_type == vt;
        return n;
    };
    for (int r : order) {
        int best_route = -1;
        std::optional<Insertion> best;
        for (size_t i = 0; i < sol.routes.size(); ++i) {
            auto ins = evaluate_insertion(sol.routes[i], r, inst, requests);
            if (ins && (!best || ins->cost_delta < best->cost_delta)) {
                best = std::move(ins);
                best_route = (int)i;
            }
        }
        if (best) {
            sol.routes[best_route] = std::move(best->route);
            continue;
        }
        int best_vt = -1;
        std::optional<Route> fresh;
        for (int t = 0; t < (int)inst.vehicle_types.size(); ++t) {
            const VehicleType& vt = inst.vehicle_types[t];
            if (!vt.unlimited() && used(t) >= vt.available) continue;
            std::vector<Stop> stops{
                Stop{requests[r].pickup_loc, {{StopAction::Kind::Pickup, r}}},
                Stop{requests[r].delivery_loc, {{StopAction::Kind::Delivery, r}}}};
            auto route = build_route(inst, period, t, std::move(stops), requests);
            if (route && (!fresh || route->cost < fresh->cost)) {
                fresh = std::move(route);
                best_vt = t;
            }
        }
        if (best_vt >= 0)
            sol.routes.push_back(std::move(*fresh));
        else
            sol.unassigned.push_back(r);
    }
    std::sort(sol.unassigned.begin(), sol.unassigned.end());
    sol.total_cost = penalty * (Cents)sol.unassigned.size();
    for (const auto& route : sol.routes) sol.total_cost += route.cost;
    return sol;
}

HalfDayResult solve_halfday(const Instance& inst, PeriodId period, const LnsParams& params) {
    const auto requests = expand_requests(inst, period);
    const Cents penalty = params.unassigned_penalty > 0
                              ? params.unassigned_penalty
                              : default_unassigned_penalty(inst, requests);
    Engine engine(inst, period, requests, requests, penalty, params.seed);
    return engine.run(params);
}

HalfDayResult solve_halfday_constrained(const Instance& inst, PeriodId period,
                                        const LnsParams& params,
                                        const std::map<int, TimeWindow>& narrowed_pickup) {
    const auto original = expand_requests(inst, period);
    std::vector<Request> narrowed = original;
    for (auto& r : narrowed) {
        auto it = narrowed_pickup.find(r.user);
        if (it != narrowed_pickup.end()) r.pickup_window = it->second;
    }
    const Cents penalty = params.unassigned_penalty > 0
                              ? params.unassigned_penalty
                              : default_unassigned_penalty(inst, original);
    Engine engine(inst, period, narrowed, original, penalty, params.seed);
    return engine.run(params);
}

} // namespace tcdarp
