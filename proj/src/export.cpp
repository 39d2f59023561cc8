#include "tcdarp/export.hpp"

#include <json.hpp>

namespace tcdarp {

using nlohmann::json;

namespace {

json coord(const Location& l) {
    return json::array({scaled_to_double(l.x_m, 3), scaled_to_double(l.y_m, 3)});
}

std::string action_text(const StopAction& a, const Instance& inst,
                        const std::vector<Request>& requests) {
    return std::string(a.kind == StopAction::Kind::Pickup ? "pickup " : "delivery ") +
           inst.users[requests[a.request].user].id;
}

} // namespace

std::string plan_to_geojson(const WeeklyPlan& plan, const Instance& inst) {
    json features = json::array();
    for (int p = 0; p < kPeriodCount; ++p) {
        const PeriodId period{p};
        const auto requests = expand_requests(inst, period);
        const auto& routes = plan.periods[p].routes;
        for (size_t ri = 0; ri < routes.size(); ++ri) {
            const Route& r = routes[ri];
            if (r.stops.empty()) continue;
            const Location& depot = inst.locations[inst.vehicle_types[r.vehicle_type].depot];

            json line;
            line["type"] = "Feature";
            json coords = json::array();
            coords.push_back(coord(depot));
            for (const auto& s : r.stops) coords.push_back(coord(inst.locations[s.location]));
            coords.push_back(coord(depot));
            line["geometry"] = json{{"coordinates", coords}, {"type", "LineString"}};
            json lp;
            lp["cost"] = scaled_to_double(r.cost, 2);
            lp["depot_arrival"] = r.schedule.depot_arrival;
            lp["depot_departure"] = r.schedule.depot_departure;
            lp["n_reconfigs"] = r.n_reconfigs;
            lp["period"] = period.name();
            lp["route"] = (int)ri;
            lp["vehicle_type"] = inst.vehicle_types[r.vehicle_type].id;
            line["properties"] = lp;
            features.push_back(line);

            for (size_t si = 0; si < r.stops.size(); ++si) {
                json point;
                point["type"] = "Feature";
                point["geometry"] =
                    json{{"coordinates", coord(inst.locations[r.stops[si].location])},
                         {"type", "Point"}};
                json pp;
                json actions = json::array();
                for (const auto& a : r.stops[si].actions)
                    actions.push_back(action_text(a, inst, requests));
                pp["actions"] = actions;
                pp["arrival"] = r.schedule.stops[si].arrival;
                pp["departure"] = r.schedule.stops[si].departure;
                pp["location"] = inst.locations[r.stops[si].location].id;
                pp["period"] = period.name();
                pp["route"] = (int)ri;
                pp["service_start"] = r.schedule.stops[si].service_start;
                pp["stop"] = (int)si;
                point["properties"] = pp;
                features.push_back(point);
            }
        }
    }
    json doc;
    doc["features"] = features;
    doc["type"] = "FeatureCollection";
    return doc.dump(2) + "\n";
}

std::string plan_stops_csv(const WeeklyPlan& plan, const Instance& inst) {
    std::string out =
        "period,route,stop,location,x_km,y_km,actions,arrival,service_start,departure,"
        "vehicle_type\n";
    char buf[32];
    auto km = [&](Meters m) {
        std::snprintf(buf, sizeof buf, "%.3f", (double)m / 1000.0);
        return std::string(buf);
    };
    for (int p = 0; p < kPeriodCount; ++p) {
        const PeriodId period{p};
        const auto requests = expand_requests(inst, period);
        const auto& routes = plan.periods[p].routes;
        for (size_t ri = 0; ri < routes.size(); ++ri) {
            const Route& r = routes[ri];
            for (size_t si = 0; si < r.stops.size(); ++si) {
                const Location& loc = inst.locations[r.stops[si].location];
                std::string actions;
                for (const auto& a : r.stops[si].actions) {
                    if (!actions.empty()) actions += "; ";
                    actions += action_text(a, inst, requests);
                }
                out += period.name() + "," + std::to_string(ri) + "," + std::to_string(si) +
                       "," + loc.id + "," + km(loc.x_m) + "," + km(loc.y_m) + "," + actions +
                       "," + std::to_string(r.schedule.stops[si].arrival) + "," +
                       std::to_string(r.schedule.stops[si].service_start) + "," +
                       std::to_string(r.schedule.stops[si].departure) + "," +
                       inst.vehicle_types[r.vehicle_type].id + "\n";
            }
        }
    }
    return out;
}

} // namespace tcdarp
