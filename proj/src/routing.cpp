#include "tcdarp/routing.hpp"

#include <algorithm>
#include <limits>

namespace tcdarp {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

struct Edge {
    int from, to;
    std::int64_t w; // constraint B[to] - B[from] <= w
};

// Bellman-Ford from src; dist[v] = shortest path weight (kInf unreachable).
// Returns false when a negative cycle keeps relaxing after n passes.
bool shortest_paths(int n, const std::vector<Edge>& edges, int src,
                    std::vector<std::int64_t>& dist) {
    dist.assign(n, kInf);
    dist[src] = 0;
    for (int pass = 0; pass < n; ++pass) {
        bool changed = false;
        for (const auto& e : edges) {
            if (dist[e.from] == kInf) continue;
            if (dist[e.from] + e.w < dist[e.to]) {
                dist[e.to] = dist[e.from] + e.w;
                changed = true;
            }
        }
        if (!changed) return true;
    }
    return false;
}

const TimeWindow& action_window(const StopAction& a, const Request& r) {
    return a.kind == StopAction::Kind::Pickup ? r.pickup_window : r.delivery_window;
}

} // namespace

// The schedule is the solution of a difference-constraint system over the
// service-start times B_i plus depot departure/arrival variables:
//   chain      B_{i+1} >= B_i + serv_i + travel
//   windows    E_i <= B_i <= L_i   (E,L = intersection over the stop's actions)
//   ride caps  B_delivery <= B_pickup + serv_pickup + max_ride
// Minimum duration D falls out of a shortest path (arrival -> departure);
// pinning arrival - departure = D and taking per-node shortest paths from the
// window reference node yields the componentwise-latest feasible schedule,
// which in particular departs the depot as late as possible.
ScheduleResult compute_schedule(const std::vector<Stop>& stops, const VehicleType& vt,
                                const Instance& inst, const std::vector<Request>& requests,
                                const std::vector<int>& reconfig_legs) {
    ScheduleResult res;
    const int k = (int)stops.size();
    if (k == 0) {
        res.schedule = Schedule{};
        return res;
    }

    std::vector<Minutes> serv(k);
    for (int i = 0; i < k; ++i) serv[i] = inst.locations[stops[i].location].service;
    for (int l : reconfig_legs)
        if (l >= 1 && l <= k) serv[l - 1] += vt.reconfig_duration;

    std::vector<Minutes> travel(k + 1); // leg l: node l-1 -> node l, depot at both ends
    travel[0] = inst.matrix.time(vt.depot, stops[0].location);
    for (int i = 1; i < k; ++i) travel[i] = inst.matrix.time(stops[i - 1].location, stops[i].location);
    travel[k] = inst.matrix.time(stops[k - 1].location, vt.depot);

    std::vector<Minutes> E(k), L(k);
    for (int i = 0; i < k; ++i) {
        Minutes e = 0, l = std::numeric_limits<Minutes>::max() / 2;
        for (const auto& a : stops[i].actions) {
            const TimeWindow& w = action_window(a, requests[a.request]);
            e = std::max(e, w.earliest);
            l = std::min(l, w.latest);
        }
        E[i] = e;
        L[i] = l;
        if (e > l) {
            res.reason = ScheduleResult::Reason::WindowViolation;
            res.stop = i;
            return res;
        }
    }

    const int dep = k, arr = k + 1, zero = k + 2, n_nodes = k + 3;
    std::vector<Edge> edges;
    for (int i = 1; i < k; ++i) edges.push_back({i, i - 1, -(std::int64_t)(serv[i - 1] + travel[i])});
    edges.push_back({0, dep, -(std::int64_t)travel[0]});
    edges.push_back({arr, k - 1, -(std::int64_t)(serv[k - 1] + travel[k])});
    for (int i = 0; i < k; ++i) {
        edges.push_back({zero, i, L[i]});
        edges.push_back({i, zero, -(std::int64_t)E[i]});
    }
    const size_t n_base = edges.size();

    std::vector<std::pair<int, int>> pair_of(requests.size(), {-1, -1}); // request -> (pickup, delivery) stop
    for (int i = 0; i < k; ++i)
        for (const auto& a : stops[i].actions) {
            if (a.kind == StopAction::Kind::Pickup)
                pair_of[a.request].first = i;
            else
                pair_of[a.request].second = i;
        }
    for (size_t r = 0; r < requests.size(); ++r) {
        const auto [p, d] = pair_of[r];
        if (p >= 0 && d >= 0)
            edges.push_back({p, d, (std::int64_t)(requests[r].max_ride + serv[p])});
    }

    std::vector<std::int64_t> dist;
    if (!shortest_paths(n_nodes, edges, zero, dist)) {
        // Infeasible. Attribute: a failing forward earliest-time pass pins a
        // window violation exactly; otherwise some ride cap is to blame.
        Minutes t = E[0];
        for (int i = 1; i < k; ++i) {
            t = std::max(E[i], t + serv[i - 1] + travel[i]);
            if (t > L[i]) {
                res.reason = ScheduleResult::Reason::WindowViolation;
                res.stop = i;
                return res;
            }
        }
        res.reason = ScheduleResult::Reason::RideTimeViolation;
        res.stop = -1;
        std::vector<Edge> sub(edges.begin(), edges.begin() + n_base);
        for (size_t r = 0; r < requests.size() && res.stop < 0; ++r) {
            const auto [p, d] = pair_of[r];
            if (p < 0 || d < 0) continue;
            sub.push_back({p, d, (std::int64_t)(requests[r].max_ride + serv[p])});
            if (!shortest_paths(n_nodes, sub, zero, dist)) res.stop = d;
            sub.pop_back();
        }
        if (res.stop < 0) // caps only jointly infeasible: report the first delivery
            for (int i = 0; i < k && res.stop < 0; ++i)
                for (const auto& a : stops[i].actions)
                    if (a.kind == StopAction::Kind::Delivery) {
                        res.stop = i;
                        break;
                    }
        return res;
    }

    shortest_paths(n_nodes, edges, arr, dist);
    const std::int64_t duration = -dist[dep];
    edges.push_back({dep, arr, duration});
    edges.push_back({arr, dep, -duration});
    shortest_paths(n_nodes, edges, zero, dist);

    Schedule s;
    s.depot_departure = (Minutes)dist[dep];
    s.depot_arrival = (Minutes)dist[arr];
    s.stops.resize(k);
    Minutes prev_dep = s.depot_departure;
    for (int i = 0; i < k; ++i) {
        s.stops[i].arrival = prev_dep + travel[i];
        s.stops[i].service_start = (Minutes)dist[i];
        s.stops[i].departure = s.stops[i].service_start + serv[i];
        prev_dep = s.stops[i].departure;
    }
    res.schedule = std::move(s);
    return res;
}

std::vector<std::array<int, kPassengerTypeCount>> leg_loads(const std::vector<Stop>& stops,
                                                            const std::vector<Request>& requests) {
    const int k = (int)stops.size();
    std::vector<std::array<int, kPassengerTypeCount>> loads(k == 0 ? 0 : k + 1);
    for (int l = 1; l <= k; ++l) {
        loads[l] = loads[l - 1];
        for (const auto& a : stops[l - 1].actions) {
            const int t = (int)requests[a.request].type;
            loads[l][t] += a.kind == StopAction::Kind::Pickup ? 1 : -1;
        }
    }
    return loads;
}

ConfigResult assign_configurations(const std::vector<Stop>& stops, const VehicleType& vt,
                                   const std::vector<Request>& requests) {
    ConfigResult res;
    const int k = (int)stops.size();
    if (k == 0) {
        res.feasible = true;
        return res;
    }
    const auto loads = leg_loads(stops, requests);
    const int m = (int)vt.configurations.size();

    std::vector<std::vector<char>> covers(k + 1, std::vector<char>(m));
    for (int l = 0; l <= k; ++l) {
        bool any = false;
        for (int c = 0; c < m; ++c) {
            covers[l][c] = vt.configurations[c].covers(loads[l]);
            any = any || covers[l][c];
        }
        if (!any) {
            res.leg = l;
            res.load = loads[l];
            return res;
        }
    }

    // f[l][c] = changes needed on legs l..k when leg l runs configuration c
    const int big = k + 2;
    std::vector<std::vector<int>> f(k + 1, std::vector<int>(m, big));
    for (int c = 0; c < m; ++c)
        if (covers[k][c]) f[k][c] = 0;
    for (int l = k - 1; l >= 0; --l)
        for (int c = 0; c < m; ++c) {
            if (!covers[l][c]) continue;
            for (int c2 = 0; c2 < m; ++c2)
                if (f[l + 1][c2] < big)
                    f[l][c] = std::min(f[l][c], (c != c2 ? 1 : 0) + f[l + 1][c2]);
        }

    // smallest-index tie-break at every step gives the lexicographically
    // smallest minimum-change sequence
    res.leg_configs.resize(k + 1);
    int best = 0;
    for (int c = 1; c < m; ++c)
        if (f[0][c] < f[0][best]) best = c;
    res.leg_configs[0] = best;
    for (int l = 0; l < k; ++l) {
        const int c = res.leg_configs[l];
        int pick = -1;
        for (int c2 = 0; c2 < m; ++c2)
            if (f[l + 1][c2] < big && (c != c2 ? 1 : 0) + f[l + 1][c2] == f[l][c]) {
                pick = c2;
                break;
            }
        res.leg_configs[l + 1] = pick;
        if (pick != c) ++res.n_reconfigs;
    }
    res.feasible = true;
    return res;
}

Meters route_meters(const Route& route, const Instance& inst) {
    if (route.stops.empty()) return 0;
    const int depot = inst.vehicle_types[route.vehicle_type].depot;
    Meters total = inst.matrix.distance(depot, route.stops.front().location);
    for (size_t i = 1; i < route.stops.size(); ++i)
        total += inst.matrix.distance(route.stops[i - 1].location, route.stops[i].location);
    total += inst.matrix.distance(route.stops.back().location, depot);
    return total;
}

Cents route_cost(const Route& route, const Instance& inst) {
    if (route.stops.empty()) return 0;
    const VehicleType& vt = inst.vehicle_types[route.vehicle_type];
    // cents/h x minutes / 60 + cents/km x meters / 1000, one half-up rounding
    const std::int64_t num = vt.cost_per_hour * (std::int64_t)route.schedule.duration() * 1000 +
                             vt.cost_per_km * route_meters(route, inst) * 60;
    const std::int64_t den = 60000;
    return vt.fixed_cost + (2 * num + den) / (2 * den);
}

std::optional<Route> build_route(const Instance& inst, PeriodId period, int vehicle_type,
                                 std::vector<Stop> stops, const std::vector<Request>& requests) {
    Route r;
    r.vehicle_type = vehicle_type;
    r.period = period;
    r.stops = std::move(stops);
    const VehicleType& vt = inst.vehicle_types[vehicle_type];

    auto cfg = assign_configurations(r.stops, vt, requests);
    if (!cfg.feasible) return std::nullopt;
    r.leg_configs = std::move(cfg.leg_configs);
    r.n_reconfigs = cfg.n_reconfigs;

    std::vector<int> reconfig_legs;
    for (size_t l = 1; l < r.leg_configs.size(); ++l)
        if (r.leg_configs[l] != r.leg_configs[l - 1]) reconfig_legs.push_back((int)l);

    auto sched = compute_schedule(r.stops, vt, inst, requests, reconfig_legs);
    if (!sched.ok()) return std::nullopt;
    r.schedule = std::move(*sched.schedule);
    r.cost = route_cost(r, inst);
    return r;
}

std::optional<Insertion> evaluate_insertion(const Route& route, int request, const Instance& inst,
                                            const std::vector<Request>& requests) {
    const Request& req = requests[request];
    const int k = (int)route.stops.size();
    std::optional<Insertion> best;
    for (int i = 0; i <= k; ++i) {
        for (int j = i; j <= k; ++j) {
            std::vector<Stop> stops;
            stops.reserve(k + 2);
            stops.insert(stops.end(), route.stops.begin(), route.stops.begin() + i);
            stops.push_back(Stop{req.pickup_loc, {{StopAction::Kind::Pickup, request}}});
            stops.insert(stops.end(), route.stops.begin() + i, route.stops.begin() + j);
            stops.push_back(Stop{req.delivery_loc, {{StopAction::Kind::Delivery, request}}});
            stops.insert(stops.end(), route.stops.begin() + j, route.stops.end());
            auto cand = build_route(inst, route.period, route.vehicle_type, std::move(stops), requests);
            if (!cand) continue;
            const Cents delta = cand->cost - route.cost;
            if (!best || delta < best->cost_delta) {
                best = Insertion{i, j + 1, delta, std::move(*cand)};
            }
        }
    }
    return best;
}

std::vector<std::string> verify_route(const Route& route, const Instance& inst,
                                      const std::vector<Request>& requests) {
    std::vector<std::string> bad;
    auto fail = [&](const std::string& msg) { bad.push_back(msg); };
    const int k = (int)route.stops.size();

    if (route.vehicle_type < 0 || route.vehicle_type >= (int)inst.vehicle_types.size()) {
        fail("vehicle_type index out of range");
        return bad;
    }
    const VehicleType& vt = inst.vehicle_types[route.vehicle_type];

    if (k == 0) {
        if (!route.leg_configs.empty()) fail("empty route with leg configurations");
        if (route.cost != 0) fail("empty route must cost 0");
        return bad;
    }
    if ((int)route.schedule.stops.size() != k) {
        fail("schedule length does not match stop count");
        return bad;
    }
    if ((int)route.leg_configs.size() != k + 1) {
        fail("expected one configuration per leg");
        return bad;
    }
    for (int c : route.leg_configs)
        if (c < 0 || c >= (int)vt.configurations.size()) {
            fail("configuration index out of range");
            return bad;
        }

    // pickup/delivery pairing, in order, once per request
    std::vector<std::pair<int, int>> pair_of(requests.size(), {-1, -1});
    for (int i = 0; i < k; ++i) {
        if (route.stops[i].location < 0 || route.stops[i].location >= (int)inst.locations.size()) {
            fail("stop " + std::to_string(i) + ": location index out of range");
            return bad;
        }
        if (route.stops[i].actions.empty()) fail("stop " + std::to_string(i) + ": no action");
        for (const auto& a : route.stops[i].actions) {
            if (a.request < 0 || a.request >= (int)requests.size()) {
                fail("stop " + std::to_string(i) + ": request index out of range");
                return bad;
            }
            const Request& r = requests[a.request];
            if (!(r.period == route.period))
                fail("stop " + std::to_string(i) + ": request from another period");
            auto& pd = pair_of[a.request];
            const int expect = a.kind == StopAction::Kind::Pickup ? r.pickup_loc : r.delivery_loc;
            if (route.stops[i].location != expect)
                fail("stop " + std::to_string(i) + ": wrong location for its action");
            int& slot = a.kind == StopAction::Kind::Pickup ? pd.first : pd.second;
            if (slot >= 0)
                fail("stop " + std::to_string(i) + ": duplicate action for one request");
            slot = i;
        }
    }
    for (size_t r = 0; r < requests.size(); ++r) {
        const auto [p, d] = pair_of[r];
        if ((p >= 0) != (d >= 0)) fail("request " + std::to_string(r) + ": unpaired action");
        if (p >= 0 && d >= 0 && p >= d) fail("request " + std::to_string(r) + ": delivery not after pickup");
    }

    // loads vs leg configurations
    const auto loads = leg_loads(route.stops, requests);
    for (int l = 0; l <= k; ++l)
        if (!vt.configurations[route.leg_configs[l]].covers(loads[l]))
            fail("leg " + std::to_string(l) + ": load exceeds configuration capacity");

    int changes = 0;
    std::vector<Minutes> extra(k, 0);
    for (int l = 1; l <= k; ++l)
        if (route.leg_configs[l] != route.leg_configs[l - 1]) {
            ++changes;
            extra[l - 1] += vt.reconfig_duration;
        }
    if (changes != route.n_reconfigs) fail("reconfiguration count mismatch");

    // schedule arithmetic, windows, ride times
    Minutes prev_dep = route.schedule.depot_departure;
    int prev_loc = vt.depot;
    for (int i = 0; i < k; ++i) {
        const auto& st = route.schedule.stops[i];
        const auto& stop = route.stops[i];
        if (st.arrival != prev_dep + inst.matrix.time(prev_loc, stop.location))
            fail("stop " + std::to_string(i) + ": arrival is not previous departure plus travel");
        if (st.service_start < st.arrival)
            fail("stop " + std::to_string(i) + ": service starts before arrival");
        if (st.departure != st.service_start + inst.locations[stop.location].service + extra[i])
            fail("stop " + std::to_string(i) + ": departure is not service start plus service time");
        for (const auto& a : stop.actions) {
            const TimeWindow& w = a.kind == StopAction::Kind::Pickup
                                      ? requests[a.request].pickup_window
                                      : requests[a.request].delivery_window;
            if (st.service_start < w.earliest || st.service_start > w.latest)
                fail("stop " + std::to_string(i) + ": service start outside time window");
        }
        prev_dep = st.departure;
        prev_loc = stop.location;
    }
    if (route.schedule.depot_arrival != prev_dep + inst.matrix.time(prev_loc, vt.depot))
        fail("depot arrival is not last departure plus travel");
    for (size_t r = 0; r < requests.size(); ++r) {
        const auto [p, d] = pair_of[r];
        if (p < 0 || d < 0 || p >= d) continue;
        const Minutes ride = route.schedule.stops[d].service_start - route.schedule.stops[p].departure;
        if (ride > requests[r].max_ride)
            fail("request " + std::to_string(r) + ": ride time " + std::to_string(ride) +
                 " exceeds cap " + std::to_string(requests[r].max_ride));
    }

    if (route.cost != route_cost(route, inst)) fail("stored cost does not match route cost");
    return bad;
}

} // namespace tcdarp
