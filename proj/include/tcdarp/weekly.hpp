#pragma once

#include "tcdarp/consistency.hpp"
#include "tcdarp/master.hpp"

namespace tcdarp {

// Weekly decision loop: independent half-day searches seed a shared route
// pool; rounds of route selection under a growing regularity price, plus
// targeted re-generation around each irregular user's majority window, trade
// cost for weekly time-class regularity.

struct WeeklyParams {
    LnsParams lns;
    Cents lambda0 = 0;          // round-1 price per excess class (0 = pure cost)
    double lambda_growth = 2.0; // per-round multiplier, > 1
    int max_rounds = 10;
    // absent: target is zero excess classes; K: every user-half needs <= K
    std::optional<int> max_classes_target;
    bool intensify = true;
    int intensify_iterations = 2000; // LNS budget of constrained re-runs
    Minutes width = 15;
    int pool_subset_n = 50; // cheapest pool routes kept per request
    double master_time_limit = 10.0;
    int threads = 0; // 0: TCDARP_THREADS env, then hardware concurrency
};

struct TraceEntry {
    int round = 0;
    Cents total_cost = 0;
    int total_classes = 0;

    bool operator==(const TraceEntry&) const = default;
};

struct WeeklyPlan {
    std::array<HalfDaySolution, kPeriodCount> periods;
    ConsistencyReport report; // unserved requests simply contribute no time
    Cents total_cost = 0;     // sum of period costs (incl. unassigned penalties)
    std::vector<TraceEntry> trace;
    bool target_met = false;
};

// Deterministic for a fixed seed, also across thread counts: per-period seeds
// are derived, and merges happen in period order.
WeeklyPlan solve_week(const Instance& inst, const WeeklyParams& params);

struct PlanMetrics {
    Cents total_cost = 0;
    // informational per-route half-up rounded parts; the exact total_cost is
    // rounded once per route, so parts may be off by a cent against it
    Cents cost_fixed = 0, cost_hourly = 0, cost_km = 0;
    Meters total_meters = 0;
    Minutes total_vehicle_minutes = 0;
    std::array<int, kPeriodCount> vehicles_used{};
    double mean_ride_min = 0.0;
    Minutes max_ride_min = 0;
    double kg_co2 = 0.0;
    ConsistencyReport report;
};

// Treats the plan as untrusted: re-verifies every route, exactly-once service
// per request, and the stored cost totals. Throws ValidationError on a broken
// invariant and MissingServiceError on an unserved request.
PlanMetrics evaluate_plan(const Instance& inst, const WeeklyPlan& plan,
                          double kg_co2_per_km = 0.25, bool pooled = false);

std::string metrics_to_json(const PlanMetrics& m);
std::string metrics_to_csv(const PlanMetrics& m);

// ---- plan files ----------------------------------------------------------

// Canonical JSON: object keys sorted, fixed 10-period array, 2-space indent,
// trailing newline; equal plans serialize byte-identically. Loading needs the
// instance to resolve ids; the report and cost totals are recomputed, only
// trace and target_met are taken verbatim.
std::string plan_to_json(const WeeklyPlan& plan, const Instance& inst);
// Single half-day solution with its pool size, same conventions as the plan.
std::string halfday_to_json(const HalfDaySolution& half, const Instance& inst, size_t pool_size);
WeeklyPlan plan_from_json(const std::string& text, const Instance& inst);
WeeklyPlan load_plan(const std::string& path, const Instance& inst);
void save_plan(const WeeklyPlan& plan, const Instance& inst, const std::string& path);

} // namespace tcdarp
