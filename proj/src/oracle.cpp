#include "tcdarp/oracle.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <map>

namespace tcdarp {

namespace {

constexpr Minutes kFar = std::numeric_limits<Minutes>::max() / 4;

// Shared per-sequence data for the minute-grid schedule search.
struct GridProblem {
    int k = 0;
    std::vector<Minutes> serv, travel, E, L;
    std::vector<std::vector<int>> pickups, deliveries; // request lists per stop
    std::vector<int> delivery_stop;                    // -1 when absent
    std::vector<int> ride;                             // max ride per request

    // memo key: stop, departure from the previous stop, then (request,
    // deadline) pairs for every picked-up-not-yet-delivered request
    std::map<std::vector<int>, Minutes> memo;

    Minutes deadline_cap(int r) const {
        // beyond L[delivery]+1 a ride deadline can never bind before the
        // delivery window does; capping collapses equivalent states
        return (Minutes)std::min<std::int64_t>((std::int64_t)L[delivery_stop[r]] + 1, kFar);
    }

    // Minimum achievable departure from the last stop, given the departure
    // time from stop i-1 and the open ride deadlines.
    Minutes solve(int i, Minutes dep_prev, std::map<int, Minutes>& open) {
        if (i == k) return dep_prev;
        std::vector<int> key{i, dep_prev};
        for (const auto& [r, d] : open) {
            key.push_back(r);
            key.push_back(d);
        }
        if (auto it = memo.find(key); it != memo.end()) return it->second;

        const Minutes arrival = dep_prev + travel[i];
        Minutes lo = std::max(E[i], arrival);
        Minutes hi = L[i];
        for (int r : deliveries[i])
            if (auto it = open.find(r); it != open.end()) hi = std::min(hi, it->second);

        Minutes best = kFar;
        if (lo <= hi) {
            // without pickups a later service start relaxes nothing; with
            // pickups, starts beyond every deadline cap are interchangeable
            Minutes top = lo;
            if (!pickups[i].empty()) {
                Minutes useful = lo;
                for (int r : pickups[i])
                    useful = std::max(useful, deadline_cap(r) - serv[i] - ride[r]);
                top = std::min(hi, std::max(lo, useful));
            }
            for (Minutes s = lo; s <= top; ++s) {
                std::map<int, Minutes> next = open;
                for (int r : deliveries[i]) next.erase(r);
                for (int r : pickups[i])
                    if (delivery_stop[r] > i)
                        next[r] = std::min(s + serv[i] + ride[r], deadline_cap(r));
                best = std::min(best, solve(i + 1, s + serv[i], next));
            }
        }
        memo[key] = best;
        return best;
    }

    // Retraces the first (smallest service start) choice achieving `target`.
    void rebuild(int i, Minutes dep_prev, std::map<int, Minutes> open, Minutes target,
                 std::vector<Minutes>& starts) {
        if (i == k) return;
        const Minutes arrival = dep_prev + travel[i];
        Minutes lo = std::max(E[i], arrival);
        Minutes hi = L[i];
        for (int r : deliveries[i])
            if (auto it = open.find(r); it != open.end()) hi = std::min(hi, it->second);
        Minutes top = lo;
        if (!pickups[i].empty()) {
            Minutes useful = lo;
            for (int r : pickups[i])
                useful = std::max(useful, deadline_cap(r) - serv[i] - ride[r]);
            top = std::min(hi, std::max(lo, useful));
        }
        for (Minutes s = lo; s <= top; ++s) {
            std::map<int, Minutes> next = open;
            for (int r : deliveries[i]) next.erase(r);
            for (int r : pickups[i])
                if (delivery_stop[r] > i)
                    next[r] = std::min(s + serv[i] + ride[r], deadline_cap(r));
            if (solve(i + 1, s + serv[i], next) == target) {
                starts.push_back(s);
                rebuild(i + 1, s + serv[i], std::move(next), target, starts);
                return;
            }
        }
    }
};

} // namespace

ScheduleResult schedule_bruteforce(const std::vector<Stop>& stops, const VehicleType& vt,
                                   const Instance& inst, const std::vector<Request>& requests,
                                   const std::vector<int>& reconfig_legs) {
    const int k = (int)stops.size();
    if (k > kOracleMaxStops)
        throw SizeLimitError("schedule_bruteforce: " + std::to_string(k) + " stops, limit " +
                             std::to_string(kOracleMaxStops));
    ScheduleResult res;
    if (k == 0) {
        res.schedule = Schedule{};
        return res;
    }

    GridProblem g;
    g.k = k;
    g.serv.resize(k);
    for (int i = 0; i < k; ++i) g.serv[i] = inst.locations[stops[i].location].service;
    for (int l : reconfig_legs)
        if (l >= 1 && l <= k) g.serv[l - 1] += vt.reconfig_duration;
    g.travel.resize(k + 1);
    g.travel[0] = inst.matrix.time(vt.depot, stops[0].location);
    for (int i = 1; i < k; ++i)
        g.travel[i] = inst.matrix.time(stops[i - 1].location, stops[i].location);
    g.travel[k] = inst.matrix.time(stops[k - 1].location, vt.depot);

    g.E.resize(k);
    g.L.resize(k);
    g.pickups.resize(k);
    g.deliveries.resize(k);
    g.delivery_stop.assign(requests.size(), -1);
    g.ride.resize(requests.size());
    for (size_t r = 0; r < requests.size(); ++r) g.ride[r] = requests[r].max_ride;
    for (int i = 0; i < k; ++i) {
        Minutes e = 0, l = kFar;
        for (const auto& a : stops[i].actions) {
            const Request& r = requests[a.request];
            const TimeWindow& w =
                a.kind == StopAction::Kind::Pickup ? r.pickup_window : r.delivery_window;
            e = std::max(e, w.earliest);
            l = std::min(l, w.latest);
            if (a.kind == StopAction::Kind::Pickup)
                g.pickups[i].push_back(a.request);
            else {
                g.deliveries[i].push_back(a.request);
                g.delivery_stop[a.request] = i;
            }
        }
        g.E[i] = e;
        g.L[i] = l;
        if (e > l) {
            res.reason = ScheduleResult::Reason::WindowViolation;
            res.stop = i;
            return res;
        }
    }
    // drop ride caps of unpaired pairs (delivery without pickup in sequence)
    for (size_t r = 0; r < requests.size(); ++r) {
        bool picked = false;
        for (int i = 0; i < k && !picked; ++i)
            for (int p : g.pickups[i]) picked = picked || p == (int)r;
        if (!picked) g.delivery_stop[r] = -1;
    }

    const Minutes hi_dep = g.L[0] - g.travel[0];
    const Minutes lo_dep = g.E[0] - g.travel[0];
    Minutes best_dur = kFar, best_dep = 0, best_final = 0;
    for (Minutes dep = hi_dep; dep >= lo_dep; --dep) {
        std::map<int, Minutes> open;
        const Minutes final_dep = g.solve(0, dep, open);
        if (final_dep == kFar) continue;
        const Minutes dur = final_dep + g.travel[k] - dep;
        if (dur < best_dur) {
            best_dur = dur;
            best_dep = dep;
            best_final = final_dep;
        }
    }

    if (best_dur == kFar) {
        // best-effort attribution, feasibility is the oracle's contract
        Minutes t = g.E[0];
        res.reason = ScheduleResult::Reason::WindowViolation;
        res.stop = 0;
        for (int i = 1; i < k; ++i) {
            t = std::max(g.E[i], t + g.serv[i - 1] + g.travel[i]);
            if (t > g.L[i]) {
                res.stop = i;
                return res;
            }
        }
        res.reason = ScheduleResult::Reason::RideTimeViolation;
        res.stop = -1;
        for (int i = 0; i < k && res.stop < 0; ++i)
            if (!g.deliveries[i].empty()) res.stop = i;
        return res;
    }

    std::vector<Minutes> starts;
    g.rebuild(0, best_dep, {}, best_final, starts);
    Schedule s;
    s.depot_departure = best_dep;
    s.stops.resize(k);
    Minutes prev = best_dep;
    for (int i = 0; i < k; ++i) {
        s.stops[i].arrival = prev + g.travel[i];
        s.stops[i].service_start = starts[i];
        s.stops[i].departure = starts[i] + g.serv[i];
        prev = s.stops[i].departure;
    }
    s.depot_arrival = prev + g.travel[k];
    res.schedule = std::move(s);
    return res;
}

ConfigResult config_bruteforce(const std::vector<Stop>& stops, const VehicleType& vt,
                               const std::vector<Request>& requests) {
    const int k = (int)stops.size();
    const int m = (int)vt.configurations.size();
    if (k > kOracleMaxConfigStops)
        throw SizeLimitError("config_bruteforce: " + std::to_string(k) + " stops, limit " +
                             std::to_string(kOracleMaxConfigStops));
    if (m > kOracleMaxConfigs)
        throw SizeLimitError("config_bruteforce: " + std::to_string(m) +
                             " configurations, limit " + std::to_string(kOracleMaxConfigs));
    ConfigResult res;
    if (k == 0) {
        res.feasible = true;
        return res;
    }
    const auto loads = leg_loads(stops, requests);
    for (int l = 0; l <= k; ++l) {
        bool any = false;
        for (int c = 0; c < m; ++c) any = any || vt.configurations[c].covers(loads[l]);
        if (!any) {
            res.leg = l;
            res.load = loads[l];
            return res;
        }
    }

    // odometer over all m^(k+1) assignments, lexicographic; the first strict
    // minimum is the lexicographically smallest minimum-change sequence
    std::vector<int> seq(k + 1, 0);
    int best = k + 2;
    for (;;) {
        bool ok = true;
        for (int l = 0; l <= k && ok; ++l) ok = vt.configurations[seq[l]].covers(loads[l]);
        if (ok) {
            int changes = 0;
            for (int l = 1; l <= k; ++l) changes += seq[l] != seq[l - 1];
            if (changes < best) {
                best = changes;
                res.leg_configs = seq;
            }
        }
        int pos = k;
        while (pos >= 0 && seq[pos] == m - 1) seq[pos--] = 0;
        if (pos < 0) break;
        ++seq[pos];
    }
    res.feasible = true;
    res.n_reconfigs = best;
    return res;
}

namespace {

// With times sorted, a block's spread constraint reduces to "member minus
// block minimum <= width", so a partial partition is fully described by its
// block minima; joining one admissible block or another makes no difference
// downstream, leaving two branches per time: join some block, or open one.
void classes_rec(const std::vector<Minutes>& times, size_t i, std::vector<Minutes>& block_min,
                 Minutes width, int& best) {
    if ((int)block_min.size() >= best) return; // block count only grows
    if (i == times.size()) {
        best = (int)block_min.size();
        return;
    }
    bool joinable = false;
    for (Minutes m : block_min) joinable = joinable || times[i] - m <= width;
    if (joinable) classes_rec(times, i + 1, block_min, width, best);
    block_min.push_back(times[i]);
    classes_rec(times, i + 1, block_min, width, best);
    block_min.pop_back();
}

} // namespace

int classes_bruteforce(const std::vector<Minutes>& times, Minutes width) {
    if ((int)times.size() > kOracleMaxTimes)
        throw SizeLimitError("classes_bruteforce: " + std::to_string(times.size()) +
                             " times, limit " + std::to_string(kOracleMaxTimes));
    if (times.empty()) return 0;
    std::vector<Minutes> sorted = times;
    std::sort(sorted.begin(), sorted.end());
    int best = (int)sorted.size() + 1;
    std::vector<Minutes> block_min;
    classes_rec(sorted, 0, block_min, width, best);
    return best;
}


namespace {

// Enumerates every pickup/delivery interleaving of one request subset on one
// vehicle type, pricing each complete sequence over all reconfiguration
// patterns; keeps the cheapest feasible route.
struct RouteSearch {
    const Instance& inst;
    PeriodId period;
    const std::vector<Request>& requests;
    int vt_index;
    const VehicleType& vt;
    std::optional<Route> best;

    void sequences(std::vector<Stop>& stops, std::vector<int>& state, Minutes t) {
        bool complete = true;
        for (size_t r = 0; r < state.size(); ++r) {
            if (state[r] == 2) continue; // delivered or outside the subset
            complete = false;
            const Request& q = requests[r];
            const bool pick = state[r] == 0;
            const int loc = pick ? q.pickup_loc : q.delivery_loc;
            const TimeWindow& w = pick ? q.pickup_window : q.delivery_window;
            // forward earliest times lower-bound any schedule, so a window
            // bust on the prefix rules out every completion
            const Minutes arr =
                stops.empty() ? 0 : t + inst.matrix.time(stops.back().location, loc);
            const Minutes s = std::max({0, w.earliest, arr});
            if (s > w.latest) continue;
            stops.push_back({loc, {{pick ? StopAction::Kind::Pickup : StopAction::Kind::Delivery,
                                    (int)r}}});
            state[r] = pick ? 1 : 2;
            sequences(stops, state, s + inst.locations[loc].service);
            state[r] = pick ? 0 : 1;
            stops.pop_back();
        }
        if (complete && !stops.empty()) consider(stops);
    }

    void consider(const std::vector<Stop>& stops) {
        const int k = (int)stops.size();
        const int m = (int)vt.configurations.size();
        const auto loads = leg_loads(stops, requests);
        std::vector<unsigned> cover(k + 1, 0);
        for (int l = 0; l <= k; ++l) {
            for (int c = 0; c < m; ++c)
                if (vt.configurations[c].covers(loads[l])) cover[l] |= 1u << c;
            if (cover[l] == 0) return;
        }

        auto eval_with = [&](const std::vector<int>& leg_configs) {
            std::vector<int> changes;
            for (int l = 1; l <= k; ++l)
                if (leg_configs[l] != leg_configs[l - 1]) changes.push_back(l);
            auto sr = schedule_bruteforce(stops, vt, inst, requests, changes);
            if (!sr.ok()) return;
            Route route{vt_index, period, stops, *sr.schedule, leg_configs,
                        (int)changes.size(), 0};
            route.cost = route_cost(route, inst);
            if (!best || route.cost < best->cost) best = std::move(route);
        };

        if (m == 1 || vt.reconfig_duration == 0) {
            // pattern cannot influence the schedule; any covering choice works
            std::vector<int> cfg(k + 1);
            for (int l = 0; l <= k; ++l) cfg[l] = std::countr_zero(cover[l]);
            eval_with(cfg);
            return;
        }

        // all change-position sets, small first; a superset of a workable set
        // only adds reconfiguration delay, so it is skipped
        std::vector<unsigned> sets;
        for (unsigned s = 0; s < 1u << k; ++s) sets.push_back(s);
        std::stable_sort(sets.begin(), sets.end(), [](unsigned a, unsigned b) {
            return std::popcount(a) < std::popcount(b);
        });
        std::vector<unsigned> workable;
        for (unsigned set : sets) { // bit l-1 = change entering leg l
            bool redundant = false;
            for (unsigned w : workable) redundant = redundant || (set & w) == w;
            if (redundant) continue;
            std::vector<int> cfg(k + 1);
            bool ok = true;
            int a = 0;
            for (int l = 1; l <= k + 1 && ok; ++l) {
                if (l <= k && !(set & (1u << (l - 1)))) continue;
                unsigned common = ~0u; // configs covering the whole segment [a, l-1]
                for (int j = a; j < l; ++j) common &= cover[j];
                if (common == 0)
                    ok = false;
                else
                    for (int j = a; j < l; ++j) cfg[j] = std::countr_zero(common);
                a = l;
            }
            if (!ok) continue;
            workable.push_back(set);
            eval_with(cfg);
        }
    }
};

} // namespace

HalfDaySolution halfday_bruteforce(const Instance& inst, PeriodId period, Cents penalty) {
    const auto requests = expand_requests(inst, period);
    const int n = (int)requests.size();
    if (n > kOracleMaxRequests)
        throw SizeLimitError("halfday_bruteforce: " + std::to_string(n) + " requests, limit " +
                             std::to_string(kOracleMaxRequests));
    if ((int)inst.vehicle_types.size() > kOracleMaxTypes)
        throw SizeLimitError("halfday_bruteforce: " + std::to_string(inst.vehicle_types.size()) +
                             " vehicle types, limit " + std::to_string(kOracleMaxTypes));
    if (penalty == 0) penalty = default_unassigned_penalty(inst, requests);

    HalfDaySolution sol;
    sol.period = period;
    if (n == 0) return sol;

    const int n_vt = (int)inst.vehicle_types.size();
    std::vector<std::vector<std::optional<Route>>> best_route(
        1u << n, std::vector<std::optional<Route>>(n_vt));
    for (unsigned mask = 1; mask < 1u << n; ++mask)
        for (int t = 0; t < n_vt; ++t) {
            RouteSearch rs{inst, period, requests, t, inst.vehicle_types[t], std::nullopt};
            std::vector<Stop> stops;
            std::vector<int> state(n);
            for (int r = 0; r < n; ++r) state[r] = mask & (1u << r) ? 0 : 2;
            rs.sequences(stops, state, 0);
            best_route[mask][t] = std::move(rs.best);
        }

    std::vector<int> label(n), vts, best_label, best_vts;
    std::vector<unsigned> block_mask;
    std::vector<int> counts(n_vt);
    Cents best_cost = -1;

    auto assign_types = [&](auto&& self, int b, Cents cost) -> void {
        if (best_cost >= 0 && cost >= best_cost) return; // remaining blocks only add cost
        if (b == (int)block_mask.size()) {
            best_cost = cost;
            best_label = label;
            best_vts = vts;
            return;
        }
        for (int t = 0; t < n_vt; ++t) {
            const VehicleType& vt = inst.vehicle_types[t];
            if (!vt.unlimited() && counts[t] >= vt.available) continue;
            const auto& route = best_route[block_mask[b]][t];
            if (!route) continue;
            vts[b] = t;
            ++counts[t];
            self(self, b + 1, cost + route->cost);
            --counts[t];
        }
    };

    auto partitions = [&](auto&& self, int i, int blocks) -> void {
        if (i == n) {
            block_mask.assign(blocks, 0);
            int unassigned = 0;
            for (int r = 0; r < n; ++r)
                if (label[r] < 0)
                    ++unassigned;
                else
                    block_mask[label[r]] |= 1u << r;
            vts.assign(blocks, -1);
            std::fill(counts.begin(), counts.end(), 0);
            assign_types(assign_types, 0, penalty * unassigned);
            return;
        }
        label[i] = -1; // unassigned, pays the penalty
        self(self, i + 1, blocks);
        for (int b = 0; b <= blocks; ++b) { // restricted growth keeps blocks canonical
            label[i] = b;
            self(self, i + 1, std::max(blocks, b + 1));
        }
    };
    partitions(partitions, 0, 0);

    block_mask.assign(best_vts.size(), 0);
    for (int r = 0; r < n; ++r)
        if (best_label[r] < 0)
            sol.unassigned.push_back(r);
        else
            block_mask[best_label[r]] |= 1u << r;
    for (size_t b = 0; b < best_vts.size(); ++b)
        sol.routes.push_back(*best_route[block_mask[b]][best_vts[b]]);
    sol.total_cost = best_cost;
    return sol;
}

MasterSolution master_bruteforce(const MasterProblem& problem) {
    if ((int)problem.candidates.size() > kOracleMaxCandidates)
        throw SizeLimitError("master_bruteforce: " + std::to_string(problem.candidates.size()) +
                             " candidates, limit " + std::to_string(kOracleMaxCandidates));
    const int n_req = (int)problem.requests.size();
    const int n_vt = (int)std::max<size_t>(1, problem.instance->vehicle_types.size());
    const bool hardcap = problem.mode.kind == MasterMode::Kind::HardCap;

    std::vector<char> covered(n_req, 0);
    std::vector<int> used(kPeriodCount * n_vt, 0);
    std::vector<int> chosen;
    bool have = false;
    Cents best_obj = 0;
    std::vector<int> best_sel;

    auto leaf = [&] {
        Cents cost = 0;
        std::vector<std::vector<Minutes>> half(problem.instance->users.size() * 2);
        for (int c : chosen) {
            cost += problem.candidates[c].cost;
            for (const auto& [h, t] : problem.candidates[c].times) half[h].push_back(t);
        }
        int excess = 0;
        for (const auto& times : half) {
            if (times.empty()) continue;
            const int count = classes_bruteforce(times, problem.width);
            if (hardcap && count > problem.mode.max_classes) return;
            excess += std::max(0, count - 1);
        }
        const Cents obj = hardcap ? cost : cost + problem.mode.lambda * excess;
        if (!have || obj < best_obj) {
            have = true;
            best_obj = obj;
            best_sel = chosen;
        }
    };

    auto rec = [&](auto&& self, int from) -> void {
        int r = from;
        while (r < n_req && covered[r]) ++r;
        if (r == n_req) {
            leaf();
            return;
        }
        for (int c : problem.covering[r]) {
            const MasterCandidate& cand = problem.candidates[c];
            bool overlap = false;
            for (int rr : cand.covers) overlap = overlap || (covered[rr] && rr != r);
            if (overlap) continue;
            const VehicleType& vt = problem.instance->vehicle_types[cand.vehicle_type];
            const int slot = cand.period * n_vt + cand.vehicle_type;
            if (!vt.unlimited() && used[slot] >= vt.available) continue;
            for (int rr : cand.covers) covered[rr] = 1;
            ++used[slot];
            chosen.push_back(c);
            self(self, r + 1);
            chosen.pop_back();
            --used[slot];
            for (int rr : cand.covers) covered[rr] = 0;
        }
    };
    rec(rec, 0);

    MasterSolution sol;
    sol.proved = true;
    sol.feasible = have;
    if (!have) {
        if (n_req > 0) sol.certificate = problem.instance->users[problem.requests[0].second].id;
        return sol;
    }
    sol.selected = best_sel;
    std::sort(sol.selected.begin(), sol.selected.end());
    std::vector<std::vector<Minutes>> times(problem.instance->users.size() * 2);
    for (int c : sol.selected) {
        sol.selected_pool_ids.push_back(problem.candidates[c].pool_id);
        sol.cost += problem.candidates[c].cost;
        for (const auto& [h, t] : problem.candidates[c].times) times[h].push_back(t);
    }
    for (size_t h = 0; h < times.size(); ++h) {
        if (times[h].empty()) continue;
        sol.excess_classes += std::max(0, classes_bruteforce(times[h], problem.width) - 1);
        auto [count, windows] = time_classes(times[h], problem.width);
        sol.windows.emplace_back((int)h, std::move(windows));
    }
    sol.objective =
        hardcap ? sol.cost : sol.cost + problem.mode.lambda * sol.excess_classes;
    return sol;
}


} // namespace tcdarp
