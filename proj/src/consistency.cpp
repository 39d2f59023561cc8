#include "tcdarp/consistency.hpp"

#include <algorithm>
#include <sstream>

namespace tcdarp {

std::pair<int, std::vector<TimeWindow>> time_classes(std::vector<Minutes> times, Minutes width) {
    std::sort(times.begin(), times.end());
    std::vector<TimeWindow> windows;
    size_t i = 0;
    while (i < times.size()) {
        const Minutes start = times[i];
        windows.push_back(TimeWindow{start, start + width});
        while (i < times.size() && times[i] <= start + width) ++i;
    }
    return {(int)windows.size(), windows};
}

ConsistencyReport consistency_from_times(
    const Instance& inst,
    const std::vector<std::array<std::optional<Minutes>, kPeriodCount>>& times, Minutes width,
    bool pooled) {
    ConsistencyReport rep;
    rep.width = width;
    rep.pooled = pooled;
    for (size_t u = 0; u < inst.users.size(); ++u) {
        UserConsistency uc;
        uc.user_id = inst.users[u].id;
        uc.times = times[u];
        std::vector<Minutes> am, pm;
        for (int p = 0; p < kPeriodCount; ++p) {
            if (!uc.times[p]) continue;
            (pooled || PeriodId{p}.is_am() ? am : pm).push_back(*uc.times[p]);
        }
        std::tie(uc.am_classes, uc.am_windows) = time_classes(am, width);
        std::tie(uc.pm_classes, uc.pm_windows) = time_classes(pm, width);
        rep.total_classes += uc.classes();
        rep.max_user_classes = std::max(rep.max_user_classes, uc.classes());
        rep.total_excess += uc.excess();
        rep.users.push_back(std::move(uc));
    }
    return rep;
}

// Pickup service starts per user and period; missing lists attended requests
// served by no route.
PickupTimes extract_pickup_times(const Instance& inst,
                                 const std::array<HalfDaySolution, kPeriodCount>& periods) {
    PickupTimes out;
    out.times.resize(inst.users.size());
    for (int p = 0; p < kPeriodCount; ++p) {
        const auto requests = expand_requests(inst, PeriodId{p});
        std::vector<char> seen(requests.size(), 0);
        for (const auto& route : periods[p].routes)
            for (size_t i = 0; i < route.stops.size(); ++i)
                for (const auto& a : route.stops[i].actions)
                    if (a.kind == StopAction::Kind::Pickup && !seen[a.request]) {
                        seen[a.request] = 1;
                        out.times[requests[a.request].user][p] =
                            route.schedule.stops[i].service_start;
                    }
        for (size_t r = 0; r < requests.size(); ++r)
            if (!seen[r]) out.missing.emplace_back(requests[r].user, p);
    }
    return out;
}

ConsistencyReport plan_consistency(const Instance& inst,
                                   const std::array<HalfDaySolution, kPeriodCount>& periods,
                                   Minutes width, bool pooled) {
    PickupTimes pt = extract_pickup_times(inst, periods);
    if (!pt.missing.empty()) {
        const auto [user, period] = pt.missing.front();
        throw MissingServiceError(inst.users[user].id, PeriodId{period}.name());
    }
    return consistency_from_times(inst, pt.times, width, pooled);
}

std::string consistency_to_csv(const ConsistencyReport& report) {
    std::ostringstream out;
    out << "user_id,am_classes,pm_classes";
    for (int p = 0; p < kPeriodCount; ++p) out << "," << PeriodId{p}.name();
    out << "\n";
    for (const auto& u : report.users) {
        out << u.user_id << "," << u.am_classes << "," << u.pm_classes;
        for (int p = 0; p < kPeriodCount; ++p) {
            out << ",";
            if (u.times[p]) out << *u.times[p];
        }
        out << "\n";
    }
    return out.str();
}

} // namespace tcdarp
