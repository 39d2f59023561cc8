#pragma once

#include "tcdarp/weekly.hpp"

namespace tcdarp {

// Map/export views of a weekly plan. Coordinates are the instance's planar
// x/y kilometres, not longitude/latitude — viewers that assume WGS84 will
// still draw correct shapes near the origin.

// One LineString feature per route (depot -> stops -> depot) carrying period,
// vehicle type and cost; one Point feature per stop carrying its times and
// actions. Canonical key order, 2-space indent.
std::string plan_to_geojson(const WeeklyPlan& plan, const Instance& inst);

// Flat CSV, one row per stop:
// period,route,stop,location,x_km,y_km,actions,arrival,service_start,departure,vehicle_type
std::string plan_stops_csv(const WeeklyPlan& plan, const Instance& inst);

} // namespace tcdarp
