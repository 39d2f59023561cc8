#pragma once

// Hand-built miniature instances shared by the unit suites. Locations sit on
// a line ("depot" at 0, then "l-1", "l-2", ...) so travel times and distances
// can be read straight off the index gap; every test pins its own windows.

#include <algorithm>
#include <initializer_list>
#include <string>
#include <vector>

#include "tcdarp/model.hpp"
#include "tcdarp/routing.hpp"

namespace fix {

using namespace tcdarp;

inline TimeWindow wide() { return {0, 1440}; }

// depot + n_points further locations, travel |i-j| * min_per_gap minutes and
// |i-j| * m_per_gap metres in both directions, zero service everywhere.
inline Instance line_instance(int n_points, Minutes min_per_gap = 10, Meters m_per_gap = 5000) {
    Instance inst;
    inst.locations.push_back({"depot", 0, 0, 0});
    for (int i = 1; i <= n_points; ++i) {
        std::string id = "l-" + std::to_string(i);
        if (i < 10) id = "l-0" + std::to_string(i);
        inst.locations.push_back({id, (Meters)i * m_per_gap, 0, 0});
    }
    const int n = n_points + 1;
    std::vector<Minutes> t(n * n, 0);
    std::vector<Meters> d(n * n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int gap = i > j ? i - j : j - i;
            t[i * n + j] = gap * min_per_gap;
            d[i * n + j] = (Meters)gap * m_per_gap;
        }
    inst.matrix = TravelMatrix(n, std::move(t), std::move(d));
    return inst;
}

// One config carrying everything; 100.00 fixed, 20.00/h, 0.50/km.
inline VehicleType van(const std::string& id = "van") {
    VehicleType vt;
    vt.id = id;
    vt.depot = 0;
    vt.configurations = {Configuration{{8, 1, 1}}};
    vt.fixed_cost = 10000;
    vt.cost_per_km = 50;
    vt.cost_per_hour = 2000;
    vt.reconfig_duration = 0;
    vt.available = kUnlimited;
    return vt;
}

// Wide windows, generous ride cap, attends the given periods (default Mon-AM).
inline User basic_user(const std::string& id, int home, int est,
                       std::initializer_list<int> periods = {0}) {
    User u;
    u.id = id;
    u.type = PassengerType::Seated;
    u.home = home;
    u.establishment = est;
    u.max_ride = 600;
    for (int p : periods) u.attendance[p] = true;
    u.pickup_am = u.delivery_am = u.pickup_pm = u.delivery_pm = wide();
    return u;
}

// Sorts by id, rebuilds the lookup maps, and runs full validation so broken
// fixtures fail loudly at construction, not deep inside an algorithm.
inline void finalize(Instance& inst) {
    std::sort(inst.users.begin(), inst.users.end(),
              [](const User& a, const User& b) { return a.id < b.id; });
    std::sort(inst.vehicle_types.begin(), inst.vehicle_types.end(),
              [](const VehicleType& a, const VehicleType& b) { return a.id < b.id; });
    inst.rebuild_index();
    validate_instance(inst);
}

inline Stop P(int loc, int req) { return Stop{loc, {{StopAction::Kind::Pickup, req}}}; }
inline Stop D(int loc, int req) { return Stop{loc, {{StopAction::Kind::Delivery, req}}}; }

} // namespace fix
