#pragma once

#include <map>

#include "tcdarp/routing.hpp"

namespace tcdarp {

// Large Neighborhood Search for one half-day: destroy/repair with simulated
// annealing acceptance, feeding every accepted solution's routes into a
// deduplicated route pool.

struct LnsParams {
    int iterations = 10000;
    double removal_min = 0.1; // fraction of requests removed per iteration,
    double removal_max = 0.4; // drawn uniformly from [removal_min, removal_max]
    double sa_start_factor = 0.05; // start temperature = factor x initial cost
    double sa_cooling = 0.9997;
    Cents unassigned_penalty = 0; // 0 = 10x the dearest single-request route
    std::uint64_t seed = 0;
    bool enrich_pool_shifts = false; // pool feasible +-5/+-10 min copies too
};

struct HalfDaySolution {
    PeriodId period;
    std::vector<Route> routes;
    std::vector<int> unassigned; // request indices, sorted
    Cents total_cost = 0;        // sum of route costs + penalty x |unassigned|
};

// One pooled route with the bookkeeping the master problem needs.
struct PoolRoute {
    int id = -1; // position in the pool after merging
    PeriodId period;
    Route route;
    Cents cost = 0;
    std::vector<int> served;                          // user indices, sorted
    std::vector<std::pair<int, Minutes>> pickup_times; // user index -> pickup service start
    std::string signature; // (period, vehicle type, action list, service starts)
};

std::string route_signature(const Route& route, const Instance& inst,
                            const std::vector<Request>& requests);

// Routes keyed by signature; first-added order is stable, so ids are
// reproducible. Merging pools in a fixed order is deterministic.
struct RoutePool {
    std::vector<PoolRoute> routes;
    std::map<std::string, int> by_signature;

    // Deduplicates by signature (keeps the cheaper route). Returns the id.
    int add(PoolRoute r);
    void merge(const RoutePool& other);
    size_t size() const { return routes.size(); }
};

PoolRoute make_pool_route(const Route& route, const Instance& inst,
                          const std::vector<Request>& requests);

// 10x the dearest single-request route over all requests of the period.
Cents default_unassigned_penalty(const Instance& inst, const std::vector<Request>& requests);

// Greedy best-insertion start: requests by earliest pickup window, opening the
// cheapest feasible new vehicle when nothing else fits. Never fails — requests
// that fit nowhere stay unassigned and carry the penalty.
HalfDaySolution initial_solution(const Instance& inst, PeriodId period,
                                 const std::vector<Request>& requests, Cents penalty);

struct HalfDayResult {
    HalfDaySolution best;
    RoutePool pool;
    std::vector<Cents> best_cost_after_iteration; // monotone, for monitoring
};

HalfDayResult solve_halfday(const Instance& inst, PeriodId period, const LnsParams& params);

// Same search with some users' pickup windows replaced by narrowed
// sub-intervals. Pooled routes keep their narrowed-window schedules but are
// re-verified against the original windows (narrow implies original, so this
// is an assertion, not a filter).
HalfDayResult solve_halfday_constrained(const Instance& inst, PeriodId period,
                                        const LnsParams& params,
                                        const std::map<int, TimeWindow>& narrowed_pickup);

} // namespace tcdarp
