#include "tcdarp/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace tcdarp {

const char* to_string(PassengerType t) {
    switch (t) {
        case PassengerType::Seated: return "seated";
        case PassengerType::Wheelchair: return "wheelchair";
        case PassengerType::ElectricWheelchair: return "electric";
    }
    return "?";
}

std::optional<PassengerType> passenger_type_from_string(std::string_view s) {
    if (s == "seated") return PassengerType::Seated;
    if (s == "wheelchair") return PassengerType::Wheelchair;
    if (s == "electric") return PassengerType::ElectricWheelchair;
    return std::nullopt;
}

static const char* kDayNames[5] = {"mon", "tue", "wed", "thu", "fri"};

std::string PeriodId::name() const {
    return std::string(kDayNames[day()]) + (is_am() ? "-am" : "-pm");
}

std::optional<PeriodId> PeriodId::parse(std::string_view s) {
    for (int d = 0; d < 5; ++d) {
        for (int h = 0; h < 2; ++h) {
            PeriodId p{d * 2 + h};
            if (p.name() == s) return p;
        }
    }
    return std::nullopt;
}

void Instance::rebuild_index() {
    location_index.clear();
    user_index.clear();
    vehicle_type_index.clear();
    for (int i = 0; i < (int)locations.size(); ++i) location_index[locations[i].id] = i;
    for (int i = 0; i < (int)users.size(); ++i) user_index[users[i].id] = i;
    for (int i = 0; i < (int)vehicle_types.size(); ++i) vehicle_type_index[vehicle_types[i].id] = i;
}

bool direct_trip_feasible(const Request& r, const Instance& inst) {
    const Minutes tau = inst.matrix.time(r.pickup_loc, r.delivery_loc);
    const Minutes s = inst.locations[r.pickup_loc].service;
    if (tau > r.max_ride) return false;
    // exists B_p in pickup window with B_p >= e_d - s - R and B_p <= l_d - s - tau
    const Minutes lo = std::max(r.pickup_window.earliest, r.delivery_window.earliest - s - r.max_ride);
    const Minutes hi = std::min(r.pickup_window.latest, r.delivery_window.latest - s - tau);
    return lo <= hi;
}

static void check_window(const TimeWindow& w, const std::string& path) {
    if (w.earliest > w.latest)
        throw ValidationError(path, "window earliest exceeds latest");
    if (w.earliest < 0)
        throw ValidationError(path, "window start negative");
}

void validate_instance(const Instance& inst) {
    const int n = (int)inst.locations.size();
    if (inst.consistency_width <= 0)
        throw ValidationError("consistency_width", "must be positive");

    for (int i = 1; i < n; ++i)
        if (inst.locations[i].id == inst.locations[i - 1].id)
            throw ValidationError("locations[" + inst.locations[i].id + "]", "duplicate id");
    for (int i = 0; i < n; ++i)
        if (inst.locations[i].service < 0)
            throw ValidationError("locations[" + inst.locations[i].id + "].service_min", "negative");

    if (inst.matrix.size() != n)
        throw ValidationError("matrix", "not square over all locations");
    for (int i = 0; i < n; ++i) {
        if (inst.matrix.time(i, i) != 0 || inst.matrix.distance(i, i) != 0)
            throw ValidationError("matrix", "nonzero diagonal at " + inst.locations[i].id);
        for (int j = 0; j < n; ++j) {
            if (inst.matrix.time(i, j) < 0 || inst.matrix.distance(i, j) < 0)
                throw ValidationError("matrix", "negative entry at (" + inst.locations[i].id + "," + inst.locations[j].id + ")");
        }
    }

    if (inst.vehicle_types.empty())
        throw ValidationError("vehicle_types", "at least one vehicle type required");
    for (const auto& vt : inst.vehicle_types) {
        const std::string base = "vehicle_types[" + vt.id + "]";
        if (vt.depot < 0 || vt.depot >= n)
            throw ValidationError(base + ".depot", "unknown location");
        if (vt.configurations.empty())
            throw ValidationError(base + ".configurations", "non-empty list required");
        for (size_t a = 0; a < vt.configurations.size(); ++a) {
            bool any = false;
            for (int c : vt.configurations[a].capacity) {
                if (c < 0) throw ValidationError(base + ".configurations", "negative capacity");
                any = any || c > 0;
            }
            if (!any) throw ValidationError(base + ".configurations", "configuration with no positive entry");
            for (size_t b = a + 1; b < vt.configurations.size(); ++b)
                if (vt.configurations[a] == vt.configurations[b])
                    throw ValidationError(base + ".configurations", "duplicate configuration");
        }
        if (vt.fixed_cost < 0 || vt.cost_per_km < 0 || vt.cost_per_hour < 0)
            throw ValidationError(base, "negative cost");
        if (vt.reconfig_duration < 0)
            throw ValidationError(base + ".reconfig_min", "negative");
        if (vt.available != kUnlimited && vt.available <= 0)
            throw ValidationError(base + ".available", "must be positive or unlimited");
    }

    for (const auto& u : inst.users) {
        const std::string base = "users[" + u.id + "]";
        if (u.home < 0 || u.home >= n) throw ValidationError(base + ".home", "unknown location");
        if (u.establishment < 0 || u.establishment >= n)
            throw ValidationError(base + ".establishment", "unknown location");
        if (u.home == u.establishment)
            throw ValidationError(base, "home equals establishment");
        if (u.max_ride <= 0) throw ValidationError(base + ".max_ride_min", "must be positive");
        bool attends_any = false;
        for (bool a : u.attendance) attends_any = attends_any || a;
        if (!attends_any) throw ValidationError(base + ".attendance", "empty");
        check_window(u.pickup_am, base + ".pickup_am");
        check_window(u.delivery_am, base + ".delivery_am");
        check_window(u.pickup_pm, base + ".pickup_pm");
        check_window(u.delivery_pm, base + ".delivery_pm");
    }

    // every request individually serviceable by some configuration of some type
    for (int ui = 0; ui < (int)inst.users.size(); ++ui) {
        const User& u = inst.users[ui];
        bool cap_ok = false;
        for (const auto& vt : inst.vehicle_types)
            for (const auto& cfg : vt.configurations)
                cap_ok = cap_ok || cfg.cap(u.type) >= 1;
        if (!cap_ok)
            throw ValidationError("users[" + u.id + "].type", "no vehicle configuration can carry this passenger type");
        for (int p = 0; p < kPeriodCount; ++p) {
            if (!u.attendance[p]) continue;
            Request r;
            r.user = ui;
            r.period = PeriodId{p};
            r.type = u.type;
            r.max_ride = u.max_ride;
            if (r.period.is_am()) {
                r.pickup_loc = u.home;
                r.delivery_loc = u.establishment;
                r.pickup_window = u.pickup_am;
                r.delivery_window = u.delivery_am;
            } else {
                r.pickup_loc = u.establishment;
                r.delivery_loc = u.home;
                r.pickup_window = u.pickup_pm;
                r.delivery_window = u.delivery_pm;
            }
            if (!direct_trip_feasible(r, inst))
                throw ValidationError("users[" + u.id + "]",
                                      "request in " + r.period.name() + " not serviceable by a direct trip");
        }
    }
}

std::vector<Request> expand_requests(const Instance& inst, PeriodId period) {
    std::vector<Request> out;
    for (int ui = 0; ui < (int)inst.users.size(); ++ui) {
        const User& u = inst.users[ui];
        if (!u.attends(period)) continue;
        Request r;
        r.user = ui;
        r.period = period;
        r.type = u.type;
        r.max_ride = u.max_ride;
        if (period.is_am()) {
            r.pickup_loc = u.home;
            r.delivery_loc = u.establishment;
            r.pickup_window = u.pickup_am;
            r.delivery_window = u.delivery_am;
        } else {
            r.pickup_loc = u.establishment;
            r.delivery_loc = u.home;
            r.pickup_window = u.pickup_pm;
            r.delivery_window = u.delivery_pm;
        }
        out.push_back(r);
    }
    // users are stored sorted by id, so this order is already by user id
    return out;
}

Cents parse_scaled_decimal(double value, int scale_digits, const std::string& path) {
    double scale = std::pow(10.0, scale_digits);
    if (!std::isfinite(value) || std::abs(value) > 9e12)
        throw ValidationError(path, "value out of range");
    double scaled = value * scale;
    Cents r = (Cents)std::llround(scaled);
    if (std::abs(scaled - (double)r) > 1e-6)
        throw ValidationError(path, "more than " + std::to_string(scale_digits) + " decimal places");
    return r;
}

double scaled_to_double(std::int64_t scaled, int scale_digits) {
    return (double)scaled / std::pow(10.0, scale_digits);
}

std::string format_cents(Cents c) {
    char buf[40];
    const char* sign = c < 0 ? "-" : "";
    Cents a = c < 0 ? -c : c;
    std::snprintf(buf, sizeof(buf), "%s%lld.%02lld", sign, (long long)(a / 100), (long long)(a % 100));
    return buf;
}

} // namespace tcdarp
