#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fixtures.hpp"
#include "tcdarp/consistency.hpp"
#include "tcdarp/oracle.hpp"

using namespace tcdarp;

namespace {

// Instance whose two users attend Mon-Fri; route construction is irrelevant
// here, the consistency functions only read pickup times.
Instance two_user_week() {
    Instance inst = fix::line_instance(4);
    inst.vehicle_types.push_back(fix::van());
    std::initializer_list<int> all = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    inst.users.push_back(fix::basic_user("u-a", 1, 2, all));
    inst.users.push_back(fix::basic_user("u-b", 3, 4, all));
    fix::finalize(inst);
    return inst;
}

using TimesOf = std::array<std::optional<Minutes>, kPeriodCount>;

} // namespace

TEST_CASE("times inside one window form a single class") {
    auto [count, windows] = time_classes({480, 485, 490}, 15);
    CHECK(count == 1);
    REQUIRE(windows.size() == 1);
    CHECK(windows[0].earliest == 480);
    CHECK(windows[0].latest == 495);
}

TEST_CASE("five pickups twenty minutes apart need five classes") {
    auto [count, windows] = time_classes({480, 500, 520, 540, 560}, 15);
    CHECK(count == 5);
    CHECK(windows.size() == 5);
}

TEST_CASE("a 12-minute gap can share a window but 24 minutes cannot") {
    auto [count, windows] = time_classes({480, 492, 504}, 15);
    CHECK(count == 2);
    REQUIRE(windows.size() == 2);
    CHECK(windows[0].earliest == 480); // covers 480 and 492
    CHECK(windows[1].earliest == 504);
    CHECK(classes_bruteforce({480, 492, 504}, 15) == 2);
}

TEST_CASE("the window boundary is inclusive") {
    CHECK(time_classes({100, 115}, 15).first == 1);
    CHECK(time_classes({100, 116}, 15).first == 2);
}

TEST_CASE("empty and singleton inputs") {
    auto [count, windows] = time_classes({}, 15);
    CHECK(count == 0);
    CHECK(windows.empty());
    CHECK(time_classes({777}, 15).first == 1);
    CHECK(classes_bruteforce({}, 15) == 0);
    CHECK(classes_bruteforce({777}, 15) == 1);
}

TEST_CASE("greedy sweep equals the exhaustive partition minimum") {
    std::mt19937_64 gen(987654321);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<Minutes> times(1 + gen() % 8);
        for (auto& t : times) t = (Minutes)(gen() % 601);
        for (Minutes w : {10, 15, 30}) {
            auto [count, windows] = time_classes(times, w);
            CHECK(count == classes_bruteforce(times, w));
            CHECK((int)windows.size() == count);
            // every time lies in some returned window
            for (Minutes t : times) {
                bool covered = false;
                for (const auto& win : windows)
                    covered = covered || (t >= win.earliest && t <= win.latest);
                CHECK(covered);
            }
        }
    }
}

TEST_CASE("class count is invariant under permutation and translation") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Minutes> times(2 + gen() % 6);
        for (auto& t : times) t = (Minutes)(gen() % 500);
        const int base = time_classes(times, 15).first;

        std::shuffle(times.begin(), times.end(), gen);
        CHECK(time_classes(times, 15).first == base);

        std::vector<Minutes> shifted = times;
        for (auto& t : shifted) t += 37;
        CHECK(time_classes(shifted, 15).first == base);
    }
}

TEST_CASE("a wider window never needs more classes") {
    std::mt19937_64 gen(6);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Minutes> times(1 + gen() % 8);
        for (auto& t : times) t = (Minutes)(gen() % 601);
        int prev = (int)times.size() + 1;
        for (Minutes w : {5, 10, 15, 30, 60, 120}) {
            const int count = time_classes(times, w).first;
            CHECK(count <= prev);
            CHECK(count >= 1);
            CHECK(count <= (int)times.size());
            prev = count;
        }
    }
}

TEST_CASE("classes brute force refuses more than eight times") {
    CHECK_THROWS_AS(classes_bruteforce(std::vector<Minutes>(9, 0), 15), SizeLimitError);
}

TEST_CASE("report counts AM and PM separately per user") {
    Instance inst = two_user_week();
    std::vector<TimesOf> times(2);
    // u-a: same minute every AM, PM drifting 20 minutes day over day
    for (int day = 0; day < 5; ++day) {
        times[0][2 * day] = 480;
        times[0][2 * day + 1] = 990 + 20 * day;
    }
    // u-b: AM alternating by 30 minutes, no PM service recorded
    for (int day = 0; day < 5; ++day) times[1][2 * day] = day % 2 ? 510 : 480;

    auto report = consistency_from_times(inst, times, 15, false);
    CHECK(report.users[0].am_classes == 1);
    CHECK(report.users[0].pm_classes == 5);
    CHECK(report.users[1].am_classes == 2);
    CHECK(report.users[1].pm_classes == 0);
    CHECK(report.total_classes == 1 + 5 + 2);
    CHECK(report.max_user_classes == 6);
    CHECK(report.total_excess == 4 + 1);
    CHECK(report.users[0].excess() == 4);
    CHECK(report.users[0].classes() == 6);
}

TEST_CASE("five AM pickups pairwise thirty minutes apart are five classes") {
    Instance inst = two_user_week();
    std::vector<TimesOf> times(2);
    for (int day = 0; day < 5; ++day) times[0][2 * day] = 480 + 30 * day;
    auto report = consistency_from_times(inst, times, 15, false);
    CHECK(report.users[0].am_classes == 5);
    CHECK(report.users[0].am_windows.size() == 5);
}

TEST_CASE("pooling the halves merges overlapping AM and PM times") {
    Instance inst = two_user_week();
    std::vector<TimesOf> times(2);
    times[0][0] = 480; // Mon-AM
    times[0][1] = 487; // Mon-PM, within the same 15-minute window
    auto separate = consistency_from_times(inst, times, 15, false);
    CHECK(separate.users[0].am_classes == 1);
    CHECK(separate.users[0].pm_classes == 1);
    CHECK(separate.total_classes == 2);

    auto pooled = consistency_from_times(inst, times, 15, true);
    CHECK(pooled.pooled);
    CHECK(pooled.users[0].am_classes == 1); // pooled counts land in am_classes
    CHECK(pooled.users[0].pm_classes == 0);
    CHECK(pooled.total_classes == 1);
}

TEST_CASE("plan consistency extracts pickup service starts from the routes") {
    Instance inst = fix::line_instance(2);
    inst.vehicle_types.push_back(fix::van());
    inst.users.push_back(fix::basic_user("u-a", 1, 2, {0, 2})); // Mon-AM, Tue-AM
    fix::finalize(inst);

    std::array<HalfDaySolution, kPeriodCount> periods;
    for (int p = 0; p < kPeriodCount; ++p) periods[p].period = PeriodId{p};
    for (int p : {0, 2}) {
        auto requests = expand_requests(inst, PeriodId{p});
        auto route = build_route(inst, PeriodId{p}, 0, {fix::P(1, 0), fix::D(2, 0)}, requests);
        REQUIRE(route.has_value());
        periods[p].routes.push_back(*route);
        periods[p].total_cost = route->cost;
    }

    auto report = plan_consistency(inst, periods, 15);
    REQUIRE(report.users.size() == 1);
    CHECK(report.users[0].times[0].has_value());
    CHECK(report.users[0].times[2].has_value());
    CHECK(*report.users[0].times[0] == periods[0].routes[0].schedule.stops[0].service_start);
    CHECK(report.users[0].am_classes >= 1);
    CHECK(report.users[0].pm_classes == 0);

    // dropping one day's route leaves an attended request unserved
    periods[2].routes.clear();
    CHECK_THROWS_AS(plan_consistency(inst, periods, 15), MissingServiceError);
    auto extracted = extract_pickup_times(inst, periods);
    REQUIRE(extracted.missing.size() == 1);
    CHECK(extracted.missing[0] == std::pair<int, int>{0, 2});
}

TEST_CASE("report serializes to one CSV row per user") {
    Instance inst = two_user_week();
    std::vector<TimesOf> times(2);
    times[0][0] = 480;
    times[1][0] = 500;
    auto report = consistency_from_times(inst, times, 15, false);
    const std::string csv = consistency_to_csv(report);
    CHECK(csv.find("user_id") != std::string::npos);
    CHECK(csv.find("u-a") != std::string::npos);
    CHECK(csv.find("u-b") != std::string::npos);
    // header plus two user rows, trailing newline
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
