#pragma once

#include "tcdarp/master.hpp"

namespace tcdarp {

// Exhaustive desk-scale reference implementations. Each oracle re-derives its
// answer by enumeration, independently of the production search code, and
// refuses inputs above its size limit with SizeLimitError rather than
// truncating. They ship in the library so the CLI can replay the comparisons
// on tiny instances (`tcdarp verify-oracle`).
//
// Search is independent; pricing deliberately reuses route_cost, whose
// arithmetic is pinned by its own worked examples.

inline constexpr int kOracleMaxStops = 10;      // schedule_bruteforce
inline constexpr int kOracleMaxConfigStops = 8; // config_bruteforce
inline constexpr int kOracleMaxConfigs = 4;     // config_bruteforce
inline constexpr int kOracleMaxTimes = 8;       // classes_bruteforce
inline constexpr int kOracleMaxRequests = 4;    // halfday_bruteforce
inline constexpr int kOracleMaxTypes = 2;       // halfday_bruteforce
inline constexpr int kOracleMaxCandidates = 15; // master_bruteforce

// Minute-grid search over depot departures and waiting allocations for a fixed
// stop sequence: minimum duration, then latest depot departure. Service starts
// of a feasible result are valid but not canonical — compare durations and
// depot departures against compute_schedule, not raw service starts.
// Infeasibility attribution is best effort (first stop the forward pass
// rejects). Throws SizeLimitError above kOracleMaxStops.
ScheduleResult schedule_bruteforce(const std::vector<Stop>& stops, const VehicleType& vt,
                                   const Instance& inst, const std::vector<Request>& requests,
                                   const std::vector<int>& reconfig_legs);

// All configurations-per-leg assignments in lexicographic order: minimum
// reconfiguration count, first minimum kept (= lexicographically smallest
// sequence). Throws SizeLimitError above kOracleMaxConfigStops stops or
// kOracleMaxConfigs configurations.
ConfigResult config_bruteforce(const std::vector<Stop>& stops, const VehicleType& vt,
                               const std::vector<Request>& requests);

// Minimum number of blocks over all set partitions with per-block spread
// <= width. Throws SizeLimitError above kOracleMaxTimes.
int classes_bruteforce(const std::vector<Minutes>& times, Minutes width);

// Globally optimal half-day solution: every request-to-vehicle partition
// (including leaving requests unassigned at `penalty` each; 0 = the same
// default the search uses), every stop ordering, every reconfiguration
// pattern, scheduling via schedule_bruteforce. Throws SizeLimitError above
// kOracleMaxRequests requests or kOracleMaxTypes vehicle types.
HalfDaySolution halfday_bruteforce(const Instance& inst, PeriodId period, Cents penalty = 0);

// Exhaustive enumeration of all exact partitions among the problem's
// candidates; class counts via classes_bruteforce. Throws SizeLimitError
// above kOracleMaxCandidates candidates.
MasterSolution master_bruteforce(const MasterProblem& problem);

} // namespace tcdarp
