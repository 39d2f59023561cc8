#pragma once

#include <optional>

#include "tcdarp/model.hpp"

namespace tcdarp {

// Feasibility kernel for a single vehicle route: minimum-duration scheduling,
// capacity/configuration assignment, exact cost, and insertion evaluation.
// Requests are always referenced by index into the period's canonical
// expand_requests() order.

struct StopAction {
    enum class Kind : std::uint8_t { Pickup, Delivery };
    Kind kind = Kind::Pickup;
    int request = -1;

    bool operator==(const StopAction&) const = default;
};

// One physical halt of the vehicle. Depot endpoints are implicit: a route
// always starts and ends at its vehicle type's depot.
struct Stop {
    int location = -1; // index into Instance::locations
    std::vector<StopAction> actions;

    bool operator==(const Stop&) const = default;
};

struct StopTimes {
    Minutes arrival = 0;
    Minutes service_start = 0; // >= arrival, waiting allowed
    Minutes departure = 0;     // service_start + service time (+ reconfiguration)

    bool operator==(const StopTimes&) const = default;
};

struct Schedule {
    Minutes depot_departure = 0;
    Minutes depot_arrival = 0;
    std::vector<StopTimes> stops;

    Minutes duration() const { return depot_arrival - depot_departure; }
    bool operator==(const Schedule&) const = default;
};

struct Route {
    int vehicle_type = -1; // index into Instance::vehicle_types
    PeriodId period;
    std::vector<Stop> stops;
    Schedule schedule;
    // Configuration index per leg; legs are depot->stop0, stop0->stop1, ...,
    // last->depot, so stops.size()+1 entries (empty for an empty route).
    std::vector<int> leg_configs;
    int n_reconfigs = 0;
    Cents cost = 0;

    bool operator==(const Route&) const = default;
};

// ---- scheduling ----------------------------------------------------------

struct ScheduleResult {
    enum class Reason : std::uint8_t { WindowViolation, RideTimeViolation };

    std::optional<Schedule> schedule;
    Reason reason = Reason::WindowViolation;
    int stop = -1; // first violating stop when infeasible

    bool ok() const { return schedule.has_value(); }
};

// Minimum-duration schedule for a fixed stop sequence; among minimum-duration
// schedules the depot departure (and in fact every service start) is the
// latest possible. `reconfig_legs` lists leg indices l >= 1 whose
// configuration differs from leg l-1; each adds vt.reconfig_duration to the
// service time of stop l-1. Depot departure may be negative when windows
// force it; no lower clamp is applied.
ScheduleResult compute_schedule(const std::vector<Stop>& stops, const VehicleType& vt,
                                const Instance& inst, const std::vector<Request>& requests,
                                const std::vector<int>& reconfig_legs);

// ---- configuration assignment -------------------------------------------

struct ConfigResult {
    bool feasible = false;
    std::vector<int> leg_configs;
    int n_reconfigs = 0;
    // set when infeasible: first leg whose load no configuration covers
    int leg = -1;
    std::array<int, kPassengerTypeCount> load{};
};

// Onboard load per leg (stops.size()+1 entries; leg 0 and the last leg are
// always empty by pickup/delivery pairing).
std::vector<std::array<int, kPassengerTypeCount>> leg_loads(const std::vector<Stop>& stops,
                                                            const std::vector<Request>& requests);

// Chooses one configuration per leg covering that leg's load, minimizing the
// number of changes; among minimum-change assignments the configuration index
// sequence is lexicographically smallest. Dynamic program over
// (leg, configuration) states.
ConfigResult assign_configurations(const std::vector<Stop>& stops, const VehicleType& vt,
                                   const std::vector<Request>& requests);

// ---- cost ----------------------------------------------------------------

Meters route_meters(const Route& route, const Instance& inst);

// fixed + hourly x duration + per-km x distance, exact integer arithmetic,
// single half-up rounding to cents. Empty route costs 0 (vehicle unused).
Cents route_cost(const Route& route, const Instance& inst);

// ---- route construction --------------------------------------------------

// Full pipeline for a stop sequence: assign configurations, schedule with the
// resulting reconfiguration delays, price. nullopt when infeasible.
std::optional<Route> build_route(const Instance& inst, PeriodId period, int vehicle_type,
                                 std::vector<Stop> stops, const std::vector<Request>& requests);

struct Insertion {
    int pickup_pos = -1;   // stop index of the new pickup in the new route
    int delivery_pos = -1; // stop index of the new delivery in the new route
    Cents cost_delta = 0;
    Route route;
};

// Best feasible placement of `request`'s pickup/delivery pair into the route,
// scanning all position pairs; ties broken by smallest (pickup, delivery)
// position. nullopt when no pair is feasible.
std::optional<Insertion> evaluate_insertion(const Route& route, int request, const Instance& inst,
                                            const std::vector<Request>& requests);

// ---- independent verification -------------------------------------------

// Re-checks every route invariant from scratch (pairing, windows, ride times,
// loads vs leg configurations, schedule arithmetic, reconfiguration delays,
// cost). Returns human-readable violations; empty means the route is valid.
std::vector<std::string> verify_route(const Route& route, const Instance& inst,
                                      const std::vector<Request>& requests);

} // namespace tcdarp
