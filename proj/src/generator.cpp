#include <algorithm>
#include <cmath>
#include <random>

#include "tcdarp/model.hpp"

namespace tcdarp {

namespace {

constexpr double kPi = 3.14159265358979323846;

// All random draws go through this helper in a fixed, documented order so that
// a seed produces the same instance on every platform.  Distribution classes
// from <random> are avoided on purpose: their output is not pinned by the
// standard.
struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    double uniform() { return (double)(gen() >> 11) * 0x1.0p-53; } // [0, 1)
    double exponential(double mean) { return -mean * std::log1p(-uniform()); }
    int pick(int n) { return std::min(n - 1, (int)(uniform() * n)); }
};

std::string padded(const char* prefix, int value, int width) {
    std::string digits = std::to_string(value);
    while ((int)digits.size() < width) digits.insert(digits.begin(), '0');
    return std::string(prefix) + digits;
}

Meters to_meters(double km) { return (Meters)std::llround(km * 1000.0); }

} // namespace

Instance generate_instance(const GeneratorParams& params) {
    if (params.n_users < 1) throw ValidationError("n_users", "must be positive");
    if (params.n_establishments < 1) throw ValidationError("n_establishments", "must be positive");
    if (params.dispersion_km <= 0) throw ValidationError("dispersion_km", "must be positive");
    if (params.window_width_min < 5) throw ValidationError("window_width_min", "must be at least 5");
    if (params.wheelchair_share < 0 || params.electric_share < 0 ||
        params.wheelchair_share + params.electric_share > 1.0)
        throw ValidationError("wheelchair_share", "shares must be non-negative and sum to at most 1");
    if (params.attendance_prob < 0 || params.attendance_prob > 1)
        throw ValidationError("attendance_prob", "must be in [0, 1]");

    Rng rng(params.seed);
    Instance inst;
    inst.consistency_width = 15;

    const int ew = std::max(2, (int)std::to_string(params.n_establishments).size());
    const int hw = std::max(3, (int)std::to_string(params.n_users).size());

    // Depot at the origin; establishments uniform in a small central disc.
    inst.locations.push_back(Location{"depot", 0, 0, 0});
    const double estab_radius = std::max(2.0, params.dispersion_km / 5.0);
    std::vector<std::pair<double, double>> coords{{0.0, 0.0}};
    for (int e = 0; e < params.n_establishments; ++e) {
        const double angle = rng.uniform() * 2.0 * kPi;
        const double radius = estab_radius * std::sqrt(rng.uniform());
        const double x = radius * std::cos(angle), y = radius * std::sin(angle);
        inst.locations.push_back(Location{padded("e-", e + 1, ew), to_meters(x), to_meters(y), 3});
        coords.emplace_back(x, y);
    }

    // Per user, in order: establishment pick, home distance (exponential with
    // mean dispersion_km), home angle, passenger type, five attendance draws,
    // one fallback-day draw (consumed even when unused).
    struct Draft {
        int estab = 0;
        PassengerType type = PassengerType::Seated;
        std::array<bool, 5> days{};
    };
    std::vector<Draft> drafts;
    for (int u = 0; u < params.n_users; ++u) {
        Draft d;
        d.estab = rng.pick(params.n_establishments);
        const double dist = rng.exponential(params.dispersion_km);
        const double angle = rng.uniform() * 2.0 * kPi;
        const auto [ex, ey] = coords[1 + d.estab];
        const double x = ex + dist * std::cos(angle), y = ey + dist * std::sin(angle);
        inst.locations.push_back(Location{padded("h-", u + 1, hw), to_meters(x), to_meters(y), 2});
        coords.emplace_back(x, y);

        const double t = rng.uniform();
        if (t < params.electric_share)
            d.type = PassengerType::ElectricWheelchair;
        else if (t < params.electric_share + params.wheelchair_share)
            d.type = PassengerType::Wheelchair;
        for (int day = 0; day < 5; ++day) d.days[day] = rng.uniform() < params.attendance_prob;
        const int fallback = rng.pick(5);
        if (std::none_of(d.days.begin(), d.days.end(), [](bool b) { return b; }))
            d.days[fallback] = true;
        drafts.push_back(d);
    }

    std::sort(inst.locations.begin(), inst.locations.end(),
              [](const Location& a, const Location& b) { return a.id < b.id; });
    inst.rebuild_index();

    // Euclidean distances rounded to the metre; times assume 30 km/h, rounded
    // up to whole minutes so the triangle inequality survives rounding... it
    // does not in general after ceil, and nothing downstream assumes it.
    const int n = (int)inst.locations.size();
    std::vector<Minutes> tmat(n * n, 0);
    std::vector<Meters> dmat(n * n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double dx = (double)(inst.locations[i].x_m - inst.locations[j].x_m);
            const double dy = (double)(inst.locations[i].y_m - inst.locations[j].y_m);
            const Meters m = (Meters)std::llround(std::hypot(dx, dy));
            dmat[i * n + j] = m;
            tmat[i * n + j] = (Minutes)((m + 499) / 500);
        }
    inst.matrix = TravelMatrix(n, std::move(tmat), std::move(dmat));

    const Minutes w = params.window_width_min;
    for (int u = 0; u < params.n_users; ++u) {
        const Draft& d = drafts[u];
        User user;
        user.id = padded("u-", u + 1, hw);
        user.type = d.type;
        user.home = inst.location_index.at(padded("h-", u + 1, hw));
        user.establishment = inst.location_index.at(padded("e-", d.estab + 1, ew));
        const Minutes tau = inst.matrix.time(user.home, user.establishment);
        const Minutes s = inst.locations[user.home].service;
        user.max_ride = std::max(45, 2 * tau + 15);
        // Morning: arrive by 09:00, leave home early enough for a direct run.
        user.delivery_am = TimeWindow{540 - w, 540};
        user.pickup_am = TimeWindow{std::min(540 - w - 180, 540 - w - tau - s - 15), 540};
        // Afternoon: leave the establishment from 16:30.
        user.pickup_pm = TimeWindow{990, 990 + w};
        user.delivery_pm = TimeWindow{990, 990 + w + std::max(180, tau + s + 15)};
        for (int day = 0; day < 5; ++day) {
            user.attendance[2 * day] = d.days[day];
            user.attendance[2 * day + 1] = d.days[day];
        }
        inst.users.push_back(user);
    }

    const int depot = inst.location_index.at("depot");
    auto add_type = [&](std::string id, std::vector<Configuration> cfgs, Cents fixed, Cents per_km,
                        Cents per_hour, Minutes reconfig) {
        VehicleType vt;
        vt.id = std::move(id);
        vt.depot = depot;
        vt.configurations = std::move(cfgs);
        vt.fixed_cost = fixed;
        vt.cost_per_km = per_km;
        vt.cost_per_hour = per_hour;
        vt.reconfig_duration = reconfig;
        vt.available = kUnlimited;
        inst.vehicle_types.push_back(vt);
    };
    if (params.vehicle_catalog_preset == "basic") {
        add_type("van", {Configuration{{8, 1, 1}}}, 6000, 40, 1600, 0);
    } else if (params.vehicle_catalog_preset == "standard") {
        add_type("van",
                 {Configuration{{8, 0, 0}}, Configuration{{5, 1, 1}}, Configuration{{2, 2, 2}}},
                 8000, 45, 1800, 5);
    } else if (params.vehicle_catalog_preset == "mixed") {
        add_type("van",
                 {Configuration{{8, 0, 0}}, Configuration{{5, 1, 1}}, Configuration{{2, 2, 2}}},
                 8000, 45, 1800, 5);
        add_type("car", {Configuration{{4, 0, 0}}, Configuration{{2, 1, 0}}}, 4500, 32, 1500, 4);
    } else {
        throw ValidationError("vehicle_catalog_preset",
                              "unknown preset '" + params.vehicle_catalog_preset + "'");
    }
    std::sort(inst.vehicle_types.begin(), inst.vehicle_types.end(),
              [](const VehicleType& a, const VehicleType& b) { return a.id < b.id; });

    inst.rebuild_index();
    validate_instance(inst);
    return inst;
}

} // namespace tcdarp
