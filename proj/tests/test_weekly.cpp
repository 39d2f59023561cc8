#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "fixtures.hpp"
#include "tcdarp/export.hpp"
#include "tcdarp/weekly.hpp"

using namespace tcdarp;

namespace {

// Generated users restricted to the given periods; everything else empty.
Instance week_instance(std::uint64_t seed, int users, std::vector<int> periods) {
    GeneratorParams p;
    p.seed = seed;
    p.n_users = users;
    p.attendance_prob = 1.0;
    p.vehicle_catalog_preset = "basic";
    Instance inst = generate_instance(p);
    for (auto& u : inst.users) {
        u.attendance = {};
        for (int pd : periods) u.attendance[pd] = true;
    }
    validate_instance(inst);
    return inst;
}

WeeklyParams quick_params(std::uint64_t seed, int iterations, int rounds) {
    WeeklyParams wp;
    wp.lns.iterations = iterations;
    wp.lns.seed = seed;
    wp.max_rounds = rounds;
    wp.intensify_iterations = std::max(200, iterations / 2);
    return wp;
}

void require_fully_served(const WeeklyPlan& plan) {
    for (const auto& half : plan.periods) REQUIRE(half.unassigned.empty());
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("one travel day per user is regular from the start") {
    Instance inst = week_instance(21, 3, {1});
    auto plan = solve_week(inst, quick_params(7, 1200, 5));
    require_fully_served(plan);
    CHECK(plan.target_met);
    CHECK(plan.trace.size() == 1); // nothing to improve, no rounds run
    CHECK(plan.trace[0].round == 0);
    CHECK(plan.report.total_excess == 0);
    for (int p : {0, 2, 3, 4, 5, 6, 7, 8, 9}) CHECK(plan.periods[p].routes.empty());
}

TEST_CASE("zero rounds returns the plain union of half-day searches") {
    Instance inst = week_instance(22, 3, {1, 3});
    auto params = quick_params(9, 1000, 0);
    auto plan = solve_week(inst, params);
    CHECK(plan.trace.size() == 1);

    Cents sum = 0;
    for (const auto& half : plan.periods) sum += half.total_cost;
    CHECK(plan.total_cost == sum);
    CHECK(plan.trace[0].total_cost == sum);
    CHECK(plan.trace[0].total_classes == plan.report.total_classes);

    // the report matches an independent recompute from the final routes
    auto rep = plan_consistency(inst, plan.periods, params.width);
    CHECK(rep.total_classes == plan.report.total_classes);
    CHECK(rep.total_excess == plan.report.total_excess);

    // rerunning the same configuration reproduces the plan byte for byte
    auto again = solve_week(inst, params);
    CHECK(plan_to_json(plan, inst) == plan_to_json(again, inst));
}

TEST_CASE("the plan is identical whatever the thread budget") {
    Instance inst = week_instance(23, 2, {1, 3});
    auto params = quick_params(3, 700, 2);
    params.threads = 1;
    auto serial = solve_week(inst, params);
    params.threads = 4;
    auto parallel = solve_week(inst, params);
    CHECK(plan_to_json(serial, inst) == plan_to_json(parallel, inst));
}

TEST_CASE("every route of a finished plan survives independent verification") {
    Instance inst = week_instance(24, 4, {1, 3});
    auto plan = solve_week(inst, quick_params(11, 1500, 3));
    for (int p = 0; p < kPeriodCount; ++p) {
        const auto requests = expand_requests(inst, PeriodId{p});
        for (const auto& r : plan.periods[p].routes) {
            const auto bad = verify_route(r, inst, requests);
            for (const auto& msg : bad) FAIL_CHECK(msg);
        }
    }
    // the trace starts at round zero and the class count never worsens
    REQUIRE(!plan.trace.empty());
    CHECK(plan.trace[0].round == 0);
    for (size_t i = 1; i < plan.trace.size(); ++i) {
        CHECK(plan.trace[i].round == (int)i);
        CHECK(plan.trace[i].total_classes <= plan.trace[i - 1].total_classes);
    }
}

TEST_CASE("a harsh price plus regeneration aligns repeated trips") {
    // u-? attends both afternoons, the rest only Monday: the cheap Monday
    // pooling drags the shared user's time away from Tuesday's
    Instance inst = week_instance(25, 3, {1});
    inst.users[0].attendance[3] = true;
    validate_instance(inst);

    auto params = quick_params(13, 2000, 6);
    params.lambda0 = 10'000'000; // any alignment is worth more than any route
    auto plan = solve_week(inst, params);
    require_fully_served(plan);
    CHECK(plan.target_met);
    CHECK(plan.report.total_excess == 0);
    // the shared user ends with a single afternoon class
    const auto& shared = plan.report.users[0];
    CHECK(shared.pm_classes == 1);
    CHECK(shared.am_classes == 0);
}

TEST_CASE("plan json round-trips byte for byte") {
    Instance inst = week_instance(26, 3, {1, 3});
    auto plan = solve_week(inst, quick_params(17, 1000, 2));
    const std::string text = plan_to_json(plan, inst);
    WeeklyPlan back = plan_from_json(text, inst);
    CHECK(plan_to_json(back, inst) == text);
    CHECK(back.total_cost == plan.total_cost);
    CHECK(back.target_met == plan.target_met);
    REQUIRE(back.trace.size() == plan.trace.size());
    for (size_t i = 0; i < back.trace.size(); ++i) CHECK(back.trace[i] == plan.trace[i]);
    CHECK(back.report.total_classes == plan.report.total_classes);

    const std::string path = "/tmp/tcdarp_weekly_roundtrip.json";
    save_plan(plan, inst, path);
    CHECK(slurp(path) == text);
    WeeklyPlan loaded = load_plan(path, inst);
    CHECK(plan_to_json(loaded, inst) == text);
    std::remove(path.c_str());
}

TEST_CASE("plan evaluation recomputes what the plan claims") {
    Instance inst = week_instance(27, 3, {1, 3});
    auto plan = solve_week(inst, quick_params(19, 1200, 2));
    require_fully_served(plan);
    auto m = evaluate_plan(inst, plan);

    CHECK(m.total_cost == plan.total_cost); // no penalties, so costs coincide
    Meters meters = 0;
    int used = 0;
    for (int p = 0; p < kPeriodCount; ++p) {
        for (const auto& r : plan.periods[p].routes)
            if (!r.stops.empty()) meters += route_meters(r, inst);
        int nonempty = 0;
        for (const auto& r : plan.periods[p].routes) nonempty += !r.stops.empty();
        CHECK(m.vehicles_used[p] == nonempty);
        used += nonempty;
    }
    CHECK(m.total_meters == meters);
    CHECK(m.kg_co2 == doctest::Approx((double)meters / 1000.0 * 0.25));
    CHECK(evaluate_plan(inst, plan, 0.0).kg_co2 == 0.0);
    // per-part rounding happens once per route, so the breakdown can drift
    // from the exact total by at most a cent per used route
    CHECK(std::llabs(m.cost_fixed + m.cost_hourly + m.cost_km - m.total_cost) <= used);
    CHECK(m.report.total_classes == plan.report.total_classes);
    CHECK(m.max_ride_min >= 0);
    if (m.max_ride_min > 0) CHECK(m.mean_ride_min > 0.0);
}

TEST_CASE("plan evaluation refuses tampered plans") {
    Instance inst = week_instance(28, 2, {1});
    auto plan = solve_week(inst, quick_params(23, 800, 1));
    require_fully_served(plan);
    REQUIRE(!plan.periods[1].routes.empty());
    REQUIRE(evaluate_plan(inst, plan).total_cost == plan.total_cost); // sane baseline

    SUBCASE("a shifted service start breaks the schedule arithmetic") {
        auto bad = plan;
        bad.periods[1].routes[0].schedule.stops[0].service_start -= 1;
        CHECK_THROWS_AS(evaluate_plan(inst, bad), ValidationError);
    }
    SUBCASE("dropping a route leaves someone unserved") {
        auto bad = plan;
        bad.periods[1].routes.pop_back();
        CHECK_THROWS_AS(evaluate_plan(inst, bad), MissingServiceError);
    }
    SUBCASE("a duplicated route serves someone twice") {
        auto bad = plan;
        bad.periods[1].routes.push_back(bad.periods[1].routes[0]);
        CHECK_THROWS_AS(evaluate_plan(inst, bad), ValidationError);
    }
    SUBCASE("a doctored total is caught") {
        auto bad = plan;
        bad.periods[1].total_cost += 1;
        CHECK_THROWS_AS(evaluate_plan(inst, bad), ValidationError);
    }
    SUBCASE("an unassigned entry for a served user is caught") {
        auto bad = plan;
        bad.periods[1].unassigned.push_back(0);
        CHECK_THROWS_AS(evaluate_plan(inst, bad), ValidationError);
    }
    SUBCASE("periods must sit in their own slots") {
        auto bad = plan;
        bad.periods[4].period = PeriodId{5};
        CHECK_THROWS_AS(evaluate_plan(inst, bad), ValidationError);
    }
}

TEST_CASE("metrics serialize with every headline number") {
    Instance inst = week_instance(29, 2, {1});
    auto plan = solve_week(inst, quick_params(29, 600, 1));
    auto m = evaluate_plan(inst, plan);

    auto doc = nlohmann::json::parse(metrics_to_json(m));
    CHECK(doc.at("total_cost").get<double>() == scaled_to_double(m.total_cost, 2));
    CHECK(doc.at("vehicles_used").size() == kPeriodCount);
    CHECK(doc.at("cost_breakdown").contains("fixed"));
    CHECK(doc.at("cost_breakdown").contains("hourly"));
    CHECK(doc.at("cost_breakdown").contains("km"));
    CHECK(doc.at("consistency").at("total_classes").get<int>() == m.report.total_classes);
    CHECK(doc.at("kg_co2").get<double>() == doctest::Approx(m.kg_co2));

    const std::string csv = metrics_to_csv(m);
    CHECK(csv.rfind("metric,value\n", 0) == 0);
    CHECK(csv.find("total_cost," + format_cents(m.total_cost)) != std::string::npos);
    CHECK(csv.find("vehicles_mon-pm,") != std::string::npos);
    CHECK(csv.find("max_user_classes,") != std::string::npos);
}

TEST_CASE("half-day json names users rather than indices") {
    Instance inst = week_instance(30, 2, {1});
    LnsParams lp;
    lp.iterations = 500;
    lp.seed = 31;
    auto res = solve_halfday(inst, PeriodId{1}, lp);
    REQUIRE(res.best.unassigned.empty());

    auto doc = nlohmann::json::parse(halfday_to_json(res.best, inst, res.pool.size()));
    CHECK(doc.at("period").get<std::string>() == "mon-pm");
    CHECK(doc.at("pool_size").get<size_t>() == res.pool.size());
    CHECK(doc.at("unassigned").empty());
    CHECK(doc.at("total_cost").get<double>() == scaled_to_double(res.best.total_cost, 2));
    REQUIRE(!doc.at("routes").empty());
    const auto& stop0 = doc["routes"][0]["stops"][0];
    const std::string uid = stop0["actions"][0]["user"].get<std::string>();
    CHECK(inst.user_index.count(uid) == 1);
    const std::string loc = stop0["location"].get<std::string>();
    CHECK(inst.location_index.count(loc) == 1);
}

TEST_CASE("map exports cover every stop of the plan") {
    Instance inst = week_instance(31, 3, {1});
    auto plan = solve_week(inst, quick_params(37, 800, 1));
    require_fully_served(plan);
    size_t stops = 0, routes = 0;
    for (const auto& half : plan.periods)
        for (const auto& r : half.routes) {
            routes += !r.stops.empty(); // empty routes draw nothing
            stops += r.stops.size();
        }
    REQUIRE(routes > 0);

    auto geo = nlohmann::json::parse(plan_to_geojson(plan, inst));
    CHECK(geo.at("type").get<std::string>() == "FeatureCollection");
    size_t lines = 0, points = 0;
    for (const auto& f : geo.at("features")) {
        const std::string t = f.at("geometry").at("type").get<std::string>();
        if (t == "LineString") {
            ++lines;
            // depot -> stops -> depot
            CHECK(f["geometry"]["coordinates"].size() >= 3);
            CHECK(f["properties"].contains("period"));
            CHECK(f["properties"].contains("cost"));
        } else if (t == "Point") {
            ++points;
        }
    }
    CHECK(lines == routes);
    CHECK(points == stops);

    const std::string csv = plan_stops_csv(plan, inst);
    CHECK(csv.rfind("period,route,stop,location,x_km,y_km,actions,arrival,service_start,"
                    "departure,vehicle_type\n",
                    0) == 0);
    // header plus one row per stop
    CHECK((size_t)std::count(csv.begin(), csv.end(), '\n') == stops + 1);
}
