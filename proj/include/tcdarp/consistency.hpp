#pragma once

#include <array>

#include "tcdarp/lns.hpp"

namespace tcdarp {

// The weekly regularity metric: a user's pickup times in one half (AM or PM)
// are grouped into "time classes", windows of width W minutes; a perfectly
// regular plan needs one class per used half.

// Minimal number of width-W windows ([t, t+W], closed membership) covering all
// times, with the windows themselves. Greedy sweep; optimal for interval
// covering: any cover can be rewritten window by window to start at the
// smallest time it covers, which is exactly the greedy choice.
std::pair<int, std::vector<TimeWindow>> time_classes(std::vector<Minutes> times, Minutes width);

struct UserConsistency {
    std::string user_id;
    std::array<std::optional<Minutes>, kPeriodCount> times; // pickup minute per period
    int am_classes = 0;
    int pm_classes = 0;
    std::vector<TimeWindow> am_windows, pm_windows;

    int classes() const { return am_classes + pm_classes; }
    int excess() const { return std::max(0, am_classes - 1) + std::max(0, pm_classes - 1); }
};

struct ConsistencyReport {
    Minutes width = 15;
    bool pooled = false; // AM+PM classed together (counts land in am_classes)
    std::vector<UserConsistency> users; // instance user order
    int total_classes = 0;    // sum over users of am_classes + pm_classes
    int max_user_classes = 0; // worst user
    int total_excess = 0;     // sum of per-half max(0, classes - 1)
};

ConsistencyReport consistency_from_times(
    const Instance& inst,
    const std::vector<std::array<std::optional<Minutes>, kPeriodCount>>& times, Minutes width,
    bool pooled);

struct PickupTimes {
    std::vector<std::array<std::optional<Minutes>, kPeriodCount>> times; // per user
    std::vector<std::pair<int, int>> missing; // (user index, period index) unserved
};

PickupTimes extract_pickup_times(const Instance& inst,
                                 const std::array<HalfDaySolution, kPeriodCount>& periods);

// Extracts each user's pickup service start per period from the half-day
// solutions. AM and PM are classed separately unless `pooled`. Throws
// MissingServiceError when an attended request is served nowhere.
ConsistencyReport plan_consistency(const Instance& inst,
                                   const std::array<HalfDaySolution, kPeriodCount>& periods,
                                   Minutes width, bool pooled = false);

// One row per user: user_id, am_classes, pm_classes, then the per-period
// pickup minutes (blank when the user does not travel).
std::string consistency_to_csv(const ConsistencyReport& report);

} // namespace tcdarp
