#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "fixtures.hpp"
#include "tcdarp/lns.hpp"
#include "tcdarp/oracle.hpp"

using namespace tcdarp;

namespace {

// Generated half-day problems use the afternoon: PM pickup windows are narrow,
// which keeps the minute-grid oracle cheap while exercising the same search.
const PeriodId kPm{1};

Instance tiny_instance(std::uint64_t seed, int users) {
    GeneratorParams p;
    p.seed = seed;
    p.n_users = users;
    p.attendance_prob = 1.0;
    p.vehicle_catalog_preset = "basic";
    return generate_instance(p);
}

std::set<std::string> signatures(const RoutePool& pool) {
    std::set<std::string> out;
    for (const auto& r : pool.routes) out.insert(r.signature);
    return out;
}

} // namespace

TEST_CASE("no requests means an empty solution and an empty pool") {
    // the only user attends Mon-AM, so Fri-PM has nothing to plan
    Instance solo = fix::line_instance(2);
    solo.vehicle_types.push_back(fix::van());
    solo.users.push_back(fix::basic_user("u-a", 1, 2, {0}));
    fix::finalize(solo);

    auto requests = expand_requests(solo, PeriodId{9});
    CHECK(requests.empty());
    auto init = initial_solution(solo, PeriodId{9}, requests, 1000);
    CHECK(init.routes.empty());
    CHECK(init.total_cost == 0);

    LnsParams params;
    params.iterations = 50;
    auto res = solve_halfday(solo, PeriodId{9}, params);
    CHECK(res.best.routes.empty());
    CHECK(res.best.total_cost == 0);
    CHECK(res.pool.size() == 0);
}

TEST_CASE("one request rides alone on a direct trip") {
    Instance solo = fix::line_instance(2);
    solo.vehicle_types.push_back(fix::van());
    solo.users.push_back(fix::basic_user("u-a", 1, 2, {0}));
    fix::finalize(solo);
    auto requests = expand_requests(solo, PeriodId{0});

    auto init = initial_solution(solo, PeriodId{0}, requests, 100000);
    REQUIRE(init.routes.size() == 1);
    CHECK(init.unassigned.empty());
    REQUIRE(init.routes[0].stops.size() == 2);
    CHECK(verify_route(init.routes[0], solo, requests).empty());
    CHECK(init.total_cost == init.routes[0].cost);
}

TEST_CASE("the greedy start assigns every request of a small instance") {
    Instance inst = tiny_instance(3, 4);
    auto requests = expand_requests(inst, kPm);
    REQUIRE(requests.size() == 4);
    auto init = initial_solution(inst, kPm, requests,
                                 default_unassigned_penalty(inst, requests));
    CHECK(init.unassigned.empty());
    for (const auto& r : init.routes) CHECK(verify_route(r, inst, requests).empty());
}

TEST_CASE("default penalty is ten times the dearest single-request route") {
    Instance inst = tiny_instance(4, 3);
    auto requests = expand_requests(inst, kPm);
    Cents dearest = 0;
    for (size_t r = 0; r < requests.size(); ++r) {
        std::vector<Stop> stops = {fix::P(requests[r].pickup_loc, (int)r),
                                   fix::D(requests[r].delivery_loc, (int)r)};
        auto route = build_route(inst, kPm, 0, stops, requests);
        REQUIRE(route.has_value());
        dearest = std::max(dearest, route->cost);
    }
    CHECK(default_unassigned_penalty(inst, requests) == 10 * dearest);
}

TEST_CASE("search lands on the brute-force optimum of a 3-request afternoon") {
    Instance inst = tiny_instance(42, 3);
    LnsParams params;
    params.iterations = 10000;
    params.seed = 42;
    auto res = solve_halfday(inst, kPm, params);
    CHECK(res.best.unassigned.empty());

    auto exact = halfday_bruteforce(inst, kPm);
    CHECK(exact.unassigned.empty());
    CHECK(res.best.total_cost == exact.total_cost);
}

TEST_CASE("same seed, same answer; the monitor sequence never rises") {
    Instance inst = tiny_instance(7, 4);
    LnsParams params;
    params.iterations = 2000;
    params.seed = 99;
    auto a = solve_halfday(inst, kPm, params);
    auto b = solve_halfday(inst, kPm, params);

    CHECK(a.best.total_cost == b.best.total_cost);
    CHECK(a.best.routes.size() == b.best.routes.size());
    CHECK(signatures(a.pool) == signatures(b.pool));
    CHECK(a.best_cost_after_iteration == b.best_cost_after_iteration);

    for (size_t i = 1; i < a.best_cost_after_iteration.size(); ++i)
        CHECK(a.best_cost_after_iteration[i] <= a.best_cost_after_iteration[i - 1]);
}

TEST_CASE("every pooled route is valid and the pool deduplicates by signature") {
    Instance inst = tiny_instance(12, 4);
    auto requests = expand_requests(inst, kPm);
    LnsParams params;
    params.iterations = 1500;
    params.seed = 3;
    auto res = solve_halfday(inst, kPm, params);

    CHECK(res.pool.size() >= res.best.routes.size());
    std::set<std::string> seen;
    for (const auto& pr : res.pool.routes) {
        CHECK(verify_route(pr.route, inst, requests).empty());
        CHECK(pr.cost == pr.route.cost);
        CHECK(seen.insert(pr.signature).second); // unique
        CHECK(route_signature(pr.route, inst, requests) == pr.signature);
        CHECK(res.pool.by_signature.at(pr.signature) == pr.id);
        // served users and pickup times line up with the route's actions
        CHECK(pr.served.size() == pr.pickup_times.size());
    }
}

TEST_CASE("pool merging keeps the cheaper duplicate and is order-insensitive") {
    Instance inst = tiny_instance(5, 3);
    LnsParams pa, pb;
    pa.iterations = pb.iterations = 800;
    pa.seed = 1;
    pb.seed = 2;
    auto a = solve_halfday(inst, kPm, pa);
    auto b = solve_halfday(inst, kPm, pb);

    RoutePool ab = a.pool;
    ab.merge(b.pool);
    RoutePool ba = b.pool;
    ba.merge(a.pool);
    CHECK(signatures(ab) == signatures(ba));
    for (const auto& r : ab.routes) {
        const auto& other = ba.routes[ba.by_signature.at(r.signature)];
        CHECK(r.cost == other.cost);
    }
}

TEST_CASE("iterating longer never shrinks the pool") {
    Instance inst = tiny_instance(6, 3);
    LnsParams short_run, long_run;
    short_run.iterations = 200;
    long_run.iterations = 1000;
    short_run.seed = long_run.seed = 5;
    auto small = solve_halfday(inst, kPm, short_run);
    auto large = solve_halfday(inst, kPm, long_run);
    CHECK(large.pool.size() >= small.pool.size());
}

TEST_CASE("quality holds across seeds on brute-force-solvable afternoons") {
    int exact_hits = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Instance inst = tiny_instance(seed, 4);
        LnsParams params;
        params.iterations = 4000;
        params.seed = seed;
        auto res = solve_halfday(inst, kPm, params);
        auto exact = halfday_bruteforce(inst, kPm);
        REQUIRE(res.best.total_cost >= exact.total_cost); // the oracle is a true bound
        if (res.best.total_cost == exact.total_cost) ++exact_hits;
        // never worse than 2%
        CHECK((double)res.best.total_cost <= 1.02 * (double)exact.total_cost);
    }
    CHECK(exact_hits >= 4);
}

TEST_CASE("narrowing to the original window changes nothing") {
    Instance inst = tiny_instance(8, 3);
    LnsParams params;
    params.iterations = 1200;
    params.seed = 17;
    auto plain = solve_halfday(inst, kPm, params);

    std::map<int, TimeWindow> same;
    for (size_t u = 0; u < inst.users.size(); ++u)
        same[(int)u] = inst.users[u].pickup_pm;
    auto narrowed = solve_halfday_constrained(inst, kPm, params, same);

    CHECK(narrowed.best.total_cost == plain.best.total_cost);
    CHECK(signatures(narrowed.pool) == signatures(plain.pool));
}

TEST_CASE("an impossible narrowed window leaves that user unassigned") {
    Instance solo = fix::line_instance(2);
    solo.vehicle_types.push_back(fix::van());
    auto u = fix::basic_user("u-a", 1, 2, {0});
    // the instance itself is fine (pickup by 90 reaches the delivery window),
    // but a zero-width pickup pin at 200 makes the delivery unreachable
    u.pickup_am = {0, 300};
    u.delivery_am = {0, 100};
    solo.users.push_back(u);
    fix::finalize(solo);

    std::map<int, TimeWindow> narrowed{{0, TimeWindow{200, 200}}};
    LnsParams params;
    params.iterations = 300;
    params.unassigned_penalty = 5000;
    auto res = solve_halfday_constrained(solo, PeriodId{0}, params, narrowed);
    CHECK(res.best.routes.empty());
    CHECK(res.best.unassigned == std::vector<int>{0});
    CHECK(res.best.total_cost == 5000);
}

TEST_CASE("re-running day two inside day one's windows reproduces its times") {
    // identical demand on Mon and Tue afternoons
    GeneratorParams p;
    p.seed = 21;
    p.n_users = 3;
    p.attendance_prob = 1.0;
    p.vehicle_catalog_preset = "basic";
    Instance inst = generate_instance(p);

    LnsParams params;
    params.iterations = 2500;
    params.seed = 4;
    auto monday = solve_halfday(inst, PeriodId{1}, params);
    REQUIRE(monday.best.unassigned.empty());

    auto mon_requests = expand_requests(inst, PeriodId{1});
    std::map<int, TimeWindow> pins;
    for (const auto& route : monday.best.routes)
        for (size_t s = 0; s < route.stops.size(); ++s)
            for (const auto& a : route.stops[s].actions)
                if (a.kind == StopAction::Kind::Pickup) {
                    const Minutes t = route.schedule.stops[s].service_start;
                    pins[mon_requests[a.request].user] = {t, t};
                }
    REQUIRE(pins.size() == inst.users.size());

    params.seed = 11; // a different search still must hit the pinned minutes
    auto tuesday = solve_halfday_constrained(inst, PeriodId{3}, params, pins);
    REQUIRE(tuesday.best.unassigned.empty());

    auto tue_requests = expand_requests(inst, PeriodId{3});
    for (const auto& route : tuesday.best.routes)
        for (size_t s = 0; s < route.stops.size(); ++s)
            for (const auto& a : route.stops[s].actions)
                if (a.kind == StopAction::Kind::Pickup) {
                    const int user = tue_requests[a.request].user;
                    CHECK(route.schedule.stops[s].service_start == pins.at(user).earliest);
                }
}

TEST_CASE("pool enrichment adds shifted copies that stay valid") {
    Instance inst = tiny_instance(9, 3);
    auto requests = expand_requests(inst, kPm);
    LnsParams plain, enriched;
    plain.iterations = enriched.iterations = 600;
    plain.seed = enriched.seed = 8;
    enriched.enrich_pool_shifts = true;
    auto a = solve_halfday(inst, kPm, plain);
    auto b = solve_halfday(inst, kPm, enriched);
    CHECK(b.pool.size() >= a.pool.size());
    for (const auto& pr : b.pool.routes) CHECK(verify_route(pr.route, inst, requests).empty());
    CHECK(b.best.total_cost == a.best.total_cost); // enrichment only feeds the pool
}
