#pragma once

#include "tcdarp/consistency.hpp"
#include "tcdarp/lns.hpp"

namespace tcdarp {

// Route-selection master problem: pick one pool route per request (an exact
// partition, period by period) while pricing weekly time-class regularity.

struct MasterMode {
    enum class Kind : std::uint8_t { WeightedPenalty, HardCap };
    Kind kind = Kind::WeightedPenalty;
    Cents lambda = 0;    // WeightedPenalty: price per excess class
    int max_classes = 1; // HardCap: allowed classes per user and half

    static MasterMode weighted(Cents lambda) { return {Kind::WeightedPenalty, lambda, 1}; }
    static MasterMode hard_cap(int k) { return {Kind::HardCap, 0, k}; }
};

// AM and PM class sets are independent, so consistency state is tracked per
// "user-half": user index * 2, +1 for PM.
inline int user_half(int user, bool am) { return user * 2 + (am ? 0 : 1); }

struct MasterCandidate {
    int pool_id = -1;
    Cents cost = 0;
    std::string signature;
    int period = 0;
    int vehicle_type = -1;
    std::vector<int> covers;                    // global request indices, sorted
    std::vector<std::pair<int, Minutes>> times; // (user-half, pickup minute)
};

struct MasterProblem {
    const Instance* instance = nullptr;
    Minutes width = 15;
    MasterMode mode;
    std::vector<std::pair<int, int>> requests; // (period, user), lexicographic
    std::vector<MasterCandidate> candidates;
    std::vector<std::vector<int>> covering; // request -> candidate indices by (cost, signature)
    std::vector<int> incumbent;             // candidate indices forming the incumbent plan
};

// Keeps the subset_n cheapest pool routes covering each request (ties by
// signature) plus every incumbent route, so the incumbent stays feasible.
// Throws UncoveredRequestError when the pool cannot serve some request.
MasterProblem build_master(const RoutePool& pool, const Instance& inst, int subset_n,
                           MasterMode mode, Minutes width,
                           const std::array<HalfDaySolution, kPeriodCount>* incumbent = nullptr);

struct MasterSolution {
    std::vector<int> selected;          // candidate indices, ascending
    std::vector<int> selected_pool_ids; // aligned with selected
    // chosen class windows per user-half (minimal cover of the chosen times)
    std::vector<std::pair<int, std::vector<TimeWindow>>> windows;
    Cents objective = 0; // cost + lambda x excess (WeightedPenalty), cost (HardCap)
    Cents cost = 0;
    int excess_classes = 0;
    bool feasible = false;   // false: HardCap admits no partition
    bool proved = false;     // completed within the time limit
    std::string certificate; // HardCap: user whose options ran out first
};

// Exact depth-first branch-and-bound; branches on the first uncovered request
// over its candidates in increasing cost order. Within the time limit the
// result is proved optimal; otherwise the best incumbent is returned with
// proved = false.
MasterSolution solve_master(const MasterProblem& problem, double time_limit_seconds = 10.0);

// Independent re-check: exact partition per period, vehicle availability,
// window membership of every chosen pickup time, objective arithmetic.
std::vector<std::string> verify_master_solution(const MasterProblem& problem,
                                                const MasterSolution& solution);

} // namespace tcdarp
