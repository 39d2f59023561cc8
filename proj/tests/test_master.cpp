#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "fixtures.hpp"
#include "tcdarp/master.hpp"
#include "tcdarp/oracle.hpp"

using namespace tcdarp;

namespace {

// Two afternoons of identical demand: enough periods for a user-half to have
// several classes, few enough that the exhaustive reference stays instant.
Instance two_pm_instance(std::uint64_t seed, int users) {
    GeneratorParams p;
    p.seed = seed;
    p.n_users = users;
    p.attendance_prob = 1.0;
    p.vehicle_catalog_preset = "basic";
    Instance inst = generate_instance(p);
    for (auto& u : inst.users) {
        u.attendance = {};
        u.attendance[1] = u.attendance[3] = true; // Mon-PM, Tue-PM
    }
    validate_instance(inst);
    return inst;
}

struct Staged {
    Instance inst;
    RoutePool pool;
    std::array<HalfDaySolution, kPeriodCount> incumbent;
};

Staged stage(std::uint64_t seed, int users, int iterations) {
    Staged st;
    st.inst = two_pm_instance(seed, users);
    for (int p = 0; p < kPeriodCount; ++p) st.incumbent[p].period = PeriodId{p};
    LnsParams params;
    params.iterations = iterations;
    for (int p : {1, 3}) {
        params.seed = seed * 10 + (std::uint64_t)p;
        auto res = solve_halfday(st.inst, PeriodId{p}, params);
        REQUIRE(res.best.unassigned.empty());
        st.incumbent[p] = res.best;
        st.pool.merge(res.pool);
    }
    return st;
}

// The verifier must come back clean on every solution we accept.
void expect_clean(const MasterProblem& mp, const MasterSolution& sol) {
    const auto problems = verify_master_solution(mp, sol);
    for (const auto& msg : problems) FAIL_CHECK(msg);
    CHECK(problems.empty());
}

} // namespace

TEST_CASE("a pool holding exactly the incumbent gives one candidate per request") {
    Staged st = stage(1, 2, 400);
    RoutePool bare;
    for (int p : {1, 3}) {
        auto requests = expand_requests(st.inst, PeriodId{p});
        for (const auto& r : st.incumbent[p].routes)
            bare.add(make_pool_route(r, st.inst, requests));
    }

    auto mp = build_master(bare, st.inst, 50, MasterMode::weighted(0), 15, &st.incumbent);
    CHECK(mp.requests.size() == 4);
    for (const auto& covering : mp.covering) CHECK(covering.size() == 1);

    auto sol = solve_master(mp);
    REQUIRE(sol.feasible);
    CHECK(sol.proved);
    CHECK((int)sol.selected.size() == (int)mp.candidates.size());
    Cents total = 0;
    for (const auto& c : mp.candidates) total += c.cost;
    CHECK(sol.cost == total);
    CHECK(sol.objective == total); // lambda = 0
    expect_clean(mp, sol);
}

TEST_CASE("subset one keeps the cheapest cover per request plus the incumbent") {
    Staged st = stage(2, 3, 1500);
    REQUIRE(st.pool.size() > 6); // the rule must actually discard something
    auto mp = build_master(st.pool, st.inst, 1, MasterMode::weighted(0), 15, &st.incumbent);

    // recompute what must be kept: per request the (cost, signature)-minimal
    // pool route, plus every incumbent route
    std::set<std::string> allowed;
    for (int p : {1, 3}) {
        auto requests = expand_requests(st.inst, PeriodId{p});
        for (const auto& r : st.incumbent[p].routes)
            allowed.insert(route_signature(r, st.inst, requests));
        for (const auto& rq : requests) {
            const PoolRoute* cheapest = nullptr;
            for (const auto& pr : st.pool.routes) {
                if (pr.period.index != p) continue;
                if (!std::binary_search(pr.served.begin(), pr.served.end(), rq.user)) continue;
                if (!cheapest || pr.cost < cheapest->cost ||
                    (pr.cost == cheapest->cost && pr.signature < cheapest->signature))
                    cheapest = &pr;
            }
            REQUIRE(cheapest != nullptr);
            allowed.insert(cheapest->signature);
        }
    }

    CHECK(mp.candidates.size() == allowed.size());
    for (const auto& c : mp.candidates) CHECK(allowed.count(c.signature) == 1);
}

TEST_CASE("a pool that cannot serve someone is rejected by name") {
    Staged st = stage(3, 2, 400);
    RoutePool partial;
    for (const auto& pr : st.pool.routes)
        if (pr.period.index == 1) partial.add(pr); // Tue-PM coverage dropped
    try {
        build_master(partial, st.inst, 50, MasterMode::weighted(0), 15, nullptr);
        FAIL("expected UncoveredRequestError");
    } catch (const UncoveredRequestError& e) {
        CHECK(e.period == "tue-pm");
        CHECK(!e.user.empty());
    }
}

TEST_CASE("with lambda zero the master is a pure minimum-cost partition") {
    Staged st = stage(4, 2, 1000);
    auto mp = build_master(st.pool, st.inst, 2, MasterMode::weighted(0), 15, &st.incumbent);
    REQUIRE((int)mp.candidates.size() <= kOracleMaxCandidates);

    auto sol = solve_master(mp);
    auto ref = master_bruteforce(mp);
    REQUIRE(sol.feasible);
    CHECK(sol.objective == ref.objective);
    CHECK(sol.cost == ref.cost);
    expect_clean(mp, sol);
}

TEST_CASE("branch and bound equals exhaustive enumeration across modes and seeds") {
    int compared = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Staged st = stage(seed, 2 + (int)(seed % 2), 700);
        std::vector<MasterMode> modes = {MasterMode::weighted(0), MasterMode::weighted(100),
                                         MasterMode::weighted(10000), MasterMode::hard_cap(1),
                                         MasterMode::hard_cap(2)};
        for (const auto& mode : modes) {
            auto mp = build_master(st.pool, st.inst, 2, mode, 15, &st.incumbent);
            if ((int)mp.candidates.size() > kOracleMaxCandidates) continue;
            auto sol = solve_master(mp);
            auto ref = master_bruteforce(mp);
            REQUIRE(sol.feasible == ref.feasible);
            if (sol.feasible) {
                CHECK(sol.objective == ref.objective);
                CHECK(sol.cost == ref.cost);
                CHECK(sol.excess_classes == ref.excess_classes);
                expect_clean(mp, sol);
            }
            ++compared;
        }
    }
    CHECK(compared >= 40);
}

TEST_CASE("a harsh enough price buys every reachable single-window user") {
    Staged st = stage(6, 3, 1200);
    Cents everything = 0;
    for (const auto& pr : st.pool.routes) everything += pr.cost;

    auto capped = build_master(st.pool, st.inst, 2, MasterMode::hard_cap(1), 15, &st.incumbent);
    if ((int)capped.candidates.size() > kOracleMaxCandidates) return;
    auto cap_ref = master_bruteforce(capped);

    auto priced = build_master(st.pool, st.inst, 2, MasterMode::weighted(everything + 1), 15,
                               &st.incumbent);
    auto sol = solve_master(priced);
    REQUIRE(sol.feasible);
    expect_clean(priced, sol);
    if (cap_ref.feasible) {
        // one window per user-half is attainable, so the price forces it and
        // the cost matches the capped optimum
        CHECK(sol.excess_classes == 0);
        CHECK(sol.cost == cap_ref.cost);
    } else {
        CHECK(sol.excess_classes > 0);
    }
}

TEST_CASE("objective grows with lambda, cost falls with a looser cap") {
    Staged st = stage(7, 3, 1000);
    Cents prev_obj = -1;
    for (Cents lambda : {0, 1, 100, 10000}) {
        auto mp = build_master(st.pool, st.inst, 2, MasterMode::weighted(lambda), 15,
                               &st.incumbent);
        auto sol = solve_master(mp);
        REQUIRE(sol.feasible);
        CHECK(sol.objective >= prev_obj);
        prev_obj = sol.objective;
    }

    Cents prev_cost = -1;
    for (int k : {1, 2, 3}) {
        auto mp = build_master(st.pool, st.inst, 2, MasterMode::hard_cap(k), 15, &st.incumbent);
        auto sol = solve_master(mp);
        if (!sol.feasible) {
            CHECK(prev_cost == -1); // infeasible only before the first feasible K
            continue;
        }
        if (prev_cost >= 0) CHECK(sol.cost <= prev_cost);
        prev_cost = sol.cost;
    }
}

TEST_CASE("vehicle scarcity steers the selection to shared routes") {
    Instance inst = fix::line_instance(4);
    VehicleType vt = fix::van();
    vt.available = 1;
    vt.fixed_cost = 0; // hourly cost decides, so pooling is not free
    inst.vehicle_types.push_back(vt);
    inst.users.push_back(fix::basic_user("u-a", 1, 2, {1}));
    inst.users.push_back(fix::basic_user("u-b", 4, 3, {1}));
    // pickups 105 minutes apart: a shared tour buys a long paid wait
    inst.users[0].pickup_pm = {990, 995};
    inst.users[1].pickup_pm = {1100, 1105};
    fix::finalize(inst);
    auto requests = expand_requests(inst, PeriodId{1});
    REQUIRE(requests.size() == 2);

    RoutePool pool;
    auto solo_a = build_route(inst, PeriodId{1}, 0,
                              {fix::P(requests[0].pickup_loc, 0), fix::D(requests[0].delivery_loc, 0)},
                              requests);
    auto solo_b = build_route(inst, PeriodId{1}, 0,
                              {fix::P(requests[1].pickup_loc, 1), fix::D(requests[1].delivery_loc, 1)},
                              requests);
    auto both = build_route(inst, PeriodId{1}, 0,
                            {fix::P(requests[0].pickup_loc, 0), fix::P(requests[1].pickup_loc, 1),
                             fix::D(requests[1].delivery_loc, 1), fix::D(requests[0].delivery_loc, 0)},
                            requests);
    REQUIRE(solo_a);
    REQUIRE(solo_b);
    REQUIRE(both);
    pool.add(make_pool_route(*solo_a, inst, requests));
    pool.add(make_pool_route(*solo_b, inst, requests));
    pool.add(make_pool_route(*both, inst, requests));
    // two solo routes would be the cheaper partition...
    REQUIRE(solo_a->cost + solo_b->cost < both->cost);

    auto mp = build_master(pool, inst, 50, MasterMode::weighted(0), 15, nullptr);
    auto sol = solve_master(mp);
    // ...but only one vehicle exists, so the shared route is the answer
    REQUIRE(sol.feasible);
    REQUIRE(sol.selected.size() == 1);
    CHECK(sol.cost == both->cost);
    expect_clean(mp, sol);

    auto ref = master_bruteforce(mp);
    CHECK(ref.feasible);
    CHECK(ref.objective == sol.objective);
}

TEST_CASE("an unreachable cap reports the user whose options ran out") {
    // two afternoons whose pickup times sit 300 minutes apart: no single
    // 15-minute window can hold both, so a cap of one class is hopeless
    Instance inst = fix::line_instance(4);
    inst.vehicle_types.push_back(fix::van());
    auto u = fix::basic_user("u-a", 1, 2, {1, 3});
    inst.users.push_back(u);
    fix::finalize(inst);

    RoutePool pool;
    for (int p : {1, 3}) {
        auto requests = expand_requests(inst, PeriodId{p});
        REQUIRE(requests.size() == 1);
        auto reqs = requests;
        // pin the pickup minute via the request window: Mon at 600, Tue at 900
        const Minutes t = p == 1 ? 600 : 900;
        reqs[0].pickup_window = {t, t};
        auto route = build_route(inst, PeriodId{p}, 0,
                                 {fix::P(reqs[0].pickup_loc, 0), fix::D(reqs[0].delivery_loc, 0)},
                                 reqs);
        REQUIRE(route);
        pool.add(make_pool_route(*route, inst, requests));
    }

    auto mp = build_master(pool, inst, 50, MasterMode::hard_cap(1), 15, nullptr);
    auto sol = solve_master(mp);
    CHECK(!sol.feasible);
    CHECK(sol.certificate == "u-a");
    auto ref = master_bruteforce(mp);
    CHECK(!ref.feasible);

    // the same selection is fine under a cap of two
    auto loose = build_master(pool, inst, 50, MasterMode::hard_cap(2), 15, nullptr);
    auto ok = solve_master(loose);
    CHECK(ok.feasible);
    expect_clean(loose, ok);
}

TEST_CASE("an empty problem solves to an empty selection") {
    Instance inst = fix::line_instance(2);
    inst.vehicle_types.push_back(fix::van());
    inst.users.push_back(fix::basic_user("u-a", 1, 2, {0}));
    fix::finalize(inst);

    MasterProblem mp;
    mp.instance = &inst;
    auto sol = solve_master(mp);
    CHECK(sol.feasible);
    CHECK(sol.proved);
    CHECK(sol.selected.empty());
    CHECK(sol.objective == 0);
    auto ref = master_bruteforce(mp);
    CHECK(ref.feasible);
    CHECK(ref.objective == 0);
}

TEST_CASE("the exhaustive reference refuses oversized candidate sets") {
    Instance inst = fix::line_instance(2);
    inst.vehicle_types.push_back(fix::van());
    inst.users.push_back(fix::basic_user("u-a", 1, 2, {0}));
    fix::finalize(inst);

    MasterProblem mp;
    mp.instance = &inst;
    mp.candidates.resize(kOracleMaxCandidates + 1);
    CHECK_THROWS_AS(master_bruteforce(mp), SizeLimitError);
}

TEST_CASE("the verifier rejects broken selections") {
    Staged st = stage(9, 2, 500);
    auto mp = build_master(st.pool, st.inst, 2, MasterMode::weighted(10), 15, &st.incumbent);
    auto sol = solve_master(mp);
    REQUIRE(sol.feasible);
    expect_clean(mp, sol);

    MasterSolution missing = sol;
    REQUIRE(!missing.selected.empty());
    missing.selected.pop_back();
    missing.selected_pool_ids.pop_back();
    CHECK(!verify_master_solution(mp, missing).empty());

    MasterSolution wrong_cost = sol;
    wrong_cost.cost += 1;
    CHECK(!verify_master_solution(mp, wrong_cost).empty());

    MasterSolution wrong_obj = sol;
    wrong_obj.objective += 1;
    CHECK(!verify_master_solution(mp, wrong_obj).empty());
}
