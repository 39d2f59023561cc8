#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tcdarp/model.hpp"

namespace tcdarp {

using nlohmann::json;

// Scaled integers are emitted through double; values kept to <= 3 decimals
// round-trip exactly through the shortest-representation printer.

static json window_to_json(const TimeWindow& w) { return json::array({w.earliest, w.latest}); }

static Minutes get_minutes(const json& j, const std::string& path) {
    if (!j.is_number_integer())
        throw ValidationError(path, "expected integer minutes");
    return (Minutes)j.get<std::int64_t>();
}

static TimeWindow window_from_json(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2)
        throw ParseError(path + ": expected [earliest, latest]");
    return TimeWindow{get_minutes(j[0], path), get_minutes(j[1], path)};
}

std::string instance_to_json(const Instance& inst) {
    json doc;
    doc["consistency_width"] = inst.consistency_width;

    json locs = json::array();
    for (const auto& l : inst.locations) {
        json jl;
        jl["id"] = l.id;
        jl["service_min"] = l.service;
        jl["x_km"] = scaled_to_double(l.x_m, 3);
        jl["y_km"] = scaled_to_double(l.y_m, 3);
        locs.push_back(jl);
    }
    doc["locations"] = locs;

    json ids = json::array();
    for (const auto& l : inst.locations) ids.push_back(l.id);
    json tmat = json::array(), dmat = json::array();
    const int n = inst.matrix.size();
    for (int i = 0; i < n; ++i) {
        json trow = json::array(), drow = json::array();
        for (int j = 0; j < n; ++j) {
            trow.push_back(inst.matrix.time(i, j));
            drow.push_back(scaled_to_double(inst.matrix.distance(i, j), 3));
        }
        tmat.push_back(trow);
        dmat.push_back(drow);
    }
    doc["matrix"] = json{{"distance_km", dmat}, {"ids", ids}, {"time_min", tmat}};

    json users = json::array();
    for (const auto& u : inst.users) {
        json ju;
        ju["id"] = u.id;
        ju["type"] = to_string(u.type);
        ju["home"] = inst.locations[u.home].id;
        ju["establishment"] = inst.locations[u.establishment].id;
        ju["max_ride_min"] = u.max_ride;
        json att = json::array();
        for (int p = 0; p < kPeriodCount; ++p)
            if (u.attendance[p]) att.push_back(PeriodId{p}.name());
        ju["attendance"] = att;
        ju["pickup_am"] = window_to_json(u.pickup_am);
        ju["delivery_am"] = window_to_json(u.delivery_am);
        ju["pickup_pm"] = window_to_json(u.pickup_pm);
        ju["delivery_pm"] = window_to_json(u.delivery_pm);
        users.push_back(ju);
    }
    doc["users"] = users;

    json vts = json::array();
    for (const auto& vt : inst.vehicle_types) {
        json jv;
        jv["id"] = vt.id;
        jv["depot"] = inst.locations[vt.depot].id;
        json cfgs = json::array();
        for (const auto& c : vt.configurations)
            cfgs.push_back(json{{"electric", c.capacity[2]}, {"seated", c.capacity[0]}, {"wheelchair", c.capacity[1]}});
        jv["configurations"] = cfgs;
        jv["fixed_cost"] = scaled_to_double(vt.fixed_cost, 2);
        jv["cost_per_km"] = scaled_to_double(vt.cost_per_km, 2);
        jv["cost_per_hour"] = scaled_to_double(vt.cost_per_hour, 2);
        jv["reconfig_min"] = vt.reconfig_duration;
        if (vt.unlimited())
            jv["available"] = "unlimited";
        else
            jv["available"] = vt.available;
        vts.push_back(jv);
    }
    doc["vehicle_types"] = vts;

    return doc.dump(2) + "\n";
}

Instance instance_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("top level must be an object");

    auto require = [&](const char* key) -> const json& {
        auto it = doc.find(key);
        if (it == doc.end()) throw ParseError(std::string("missing key: ") + key);
        return *it;
    };

    Instance inst;
    inst.consistency_width = doc.value("consistency_width", 15);

    for (const auto& jl : require("locations")) {
        Location l;
        l.id = jl.at("id").get<std::string>();
        l.service = get_minutes(jl.at("service_min"), "locations[" + l.id + "].service_min");
        l.x_m = parse_scaled_decimal(jl.at("x_km").get<double>(), 3, "locations[" + l.id + "].x_km");
        l.y_m = parse_scaled_decimal(jl.at("y_km").get<double>(), 3, "locations[" + l.id + "].y_km");
        inst.locations.push_back(l);
    }
    std::sort(inst.locations.begin(), inst.locations.end(),
              [](const Location& a, const Location& b) { return a.id < b.id; });
    inst.rebuild_index();

    auto loc_idx = [&](const std::string& id, const std::string& path) {
        auto it = inst.location_index.find(id);
        if (it == inst.location_index.end())
            throw ValidationError(path, "unknown location id '" + id + "'");
        return it->second;
    };

    const json& jm = require("matrix");
    const int n = (int)inst.locations.size();
    const auto& mids = jm.at("ids");
    if ((int)mids.size() != n) throw ValidationError("matrix.ids", "must list every location exactly once");
    std::vector<int> perm(n); // matrix row order -> sorted location order
    for (int i = 0; i < n; ++i) perm[i] = loc_idx(mids[i].get<std::string>(), "matrix.ids");
    std::vector<char> seen(n, 0);
    for (int p : perm) {
        if (seen[p]) throw ValidationError("matrix.ids", "duplicate id");
        seen[p] = 1;
    }
    const auto& jt = jm.at("time_min");
    const auto& jd = jm.at("distance_km");
    if ((int)jt.size() != n || (int)jd.size() != n)
        throw ValidationError("matrix", "not square over all locations");
    std::vector<Minutes> tm(n * n, 0);
    std::vector<Meters> dm(n * n, 0);
    for (int i = 0; i < n; ++i) {
        if ((int)jt[i].size() != n || (int)jd[i].size() != n)
            throw ValidationError("matrix", "not square over all locations");
        for (int j = 0; j < n; ++j) {
            tm[perm[i] * n + perm[j]] = get_minutes(jt[i][j], "matrix.time_min");
            dm[perm[i] * n + perm[j]] = parse_scaled_decimal(jd[i][j].get<double>(), 3, "matrix.distance_km");
        }
    }
    inst.matrix = TravelMatrix(n, std::move(tm), std::move(dm));

    for (const auto& ju : require("users")) {
        User u;
        u.id = ju.at("id").get<std::string>();
        const std::string base = "users[" + u.id + "]";
        auto t = passenger_type_from_string(ju.at("type").get<std::string>());
        if (!t) throw ValidationError(base + ".type", "unknown passenger type");
        u.type = *t;
        u.home = loc_idx(ju.at("home").get<std::string>(), base + ".home");
        u.establishment = loc_idx(ju.at("establishment").get<std::string>(), base + ".establishment");
        u.max_ride = get_minutes(ju.at("max_ride_min"), base + ".max_ride_min");
        for (const auto& ja : ju.at("attendance")) {
            auto p = PeriodId::parse(ja.get<std::string>());
            if (!p) throw ValidationError(base + ".attendance", "unknown period '" + ja.get<std::string>() + "'");
            u.attendance[p->index] = true;
        }
        u.pickup_am = window_from_json(ju.at("pickup_am"), base + ".pickup_am");
        u.delivery_am = window_from_json(ju.at("delivery_am"), base + ".delivery_am");
        u.pickup_pm = window_from_json(ju.at("pickup_pm"), base + ".pickup_pm");
        u.delivery_pm = window_from_json(ju.at("delivery_pm"), base + ".delivery_pm");
        inst.users.push_back(u);
    }
    std::sort(inst.users.begin(), inst.users.end(),
              [](const User& a, const User& b) { return a.id < b.id; });
    for (size_t i = 1; i < inst.users.size(); ++i)
        if (inst.users[i].id == inst.users[i - 1].id)
            throw ValidationError("users[" + inst.users[i].id + "]", "duplicate id");

    for (const auto& jv : require("vehicle_types")) {
        VehicleType vt;
        vt.id = jv.at("id").get<std::string>();
        const std::string base = "vehicle_types[" + vt.id + "]";
        vt.depot = loc_idx(jv.at("depot").get<std::string>(), base + ".depot");
        for (const auto& jc : jv.at("configurations")) {
            Configuration c;
            c.capacity[0] = jc.at("seated").get<int>();
            c.capacity[1] = jc.at("wheelchair").get<int>();
            c.capacity[2] = jc.at("electric").get<int>();
            vt.configurations.push_back(c);
        }
        vt.fixed_cost = parse_scaled_decimal(jv.at("fixed_cost").get<double>(), 2, base + ".fixed_cost");
        vt.cost_per_km = parse_scaled_decimal(jv.at("cost_per_km").get<double>(), 2, base + ".cost_per_km");
        vt.cost_per_hour = parse_scaled_decimal(jv.at("cost_per_hour").get<double>(), 2, base + ".cost_per_hour");
        vt.reconfig_duration = get_minutes(jv.at("reconfig_min"), base + ".reconfig_min");
        const auto& av = jv.at("available");
        if (av.is_string() && av.get<std::string>() == "unlimited")
            vt.available = kUnlimited;
        else if (av.is_number_integer())
            vt.available = av.get<int>();
        else
            throw ValidationError(base + ".available", "expected integer or \"unlimited\"");
        inst.vehicle_types.push_back(vt);
    }
    std::sort(inst.vehicle_types.begin(), inst.vehicle_types.end(),
              [](const VehicleType& a, const VehicleType& b) { return a.id < b.id; });
    for (size_t i = 1; i < inst.vehicle_types.size(); ++i)
        if (inst.vehicle_types[i].id == inst.vehicle_types[i - 1].id)
            throw ValidationError("vehicle_types[" + inst.vehicle_types[i].id + "]", "duplicate id");

    inst.rebuild_index();
    validate_instance(inst);
    return inst;
}

Instance load_instance(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return instance_from_json(ss.str());
    } catch (ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void save_instance(const Instance& inst, const std::string& path) {
    std::string text = instance_to_json(inst);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

} // namespace tcdarp
