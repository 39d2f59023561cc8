#include "tcdarp/master.hpp"

#include <algorithm>
#include <chrono>
#include <set>

namespace tcdarp {

MasterProblem build_master(const RoutePool& pool, const Instance& inst, int subset_n,
                           MasterMode mode, Minutes width,
                           const std::array<HalfDaySolution, kPeriodCount>* incumbent) {
    MasterProblem mp;
    mp.instance = &inst;
    mp.width = width;
    mp.mode = mode;
    if (subset_n < 1) subset_n = 1;

    std::map<std::pair<int, int>, int> req_idx; // (period, user) -> global index
    std::array<std::vector<Request>, kPeriodCount> period_requests;
    for (int p = 0; p < kPeriodCount; ++p) {
        period_requests[p] = expand_requests(inst, PeriodId{p});
        for (const auto& r : period_requests[p]) {
            req_idx[{p, r.user}] = (int)mp.requests.size();
            mp.requests.emplace_back(p, r.user);
        }
    }

    std::vector<std::vector<int>> pool_covering(mp.requests.size());
    for (const auto& pr : pool.routes)
        for (int u : pr.served) {
            auto it = req_idx.find({pr.period.index, u});
            if (it != req_idx.end()) pool_covering[it->second].push_back(pr.id);
        }

    auto cheaper = [&](int a, int b) {
        if (pool.routes[a].cost != pool.routes[b].cost)
            return pool.routes[a].cost < pool.routes[b].cost;
        return pool.routes[a].signature < pool.routes[b].signature;
    };
    std::set<int> keep;
    for (size_t r = 0; r < mp.requests.size(); ++r) {
        if (pool_covering[r].empty())
            throw UncoveredRequestError(inst.users[mp.requests[r].second].id,
                                        PeriodId{mp.requests[r].first}.name());
        auto ids = pool_covering[r];
        std::sort(ids.begin(), ids.end(), cheaper);
        for (int i = 0; i < (int)ids.size() && i < subset_n; ++i) keep.insert(ids[i]);
    }
    std::vector<int> incumbent_pool_ids;
    if (incumbent) {
        for (int p = 0; p < kPeriodCount; ++p)
            for (const auto& route : (*incumbent)[p].routes) {
                const std::string sig = route_signature(route, inst, period_requests[p]);
                auto it = pool.by_signature.find(sig);
                if (it == pool.by_signature.end())
                    throw std::logic_error("incumbent route missing from the pool");
                keep.insert(it->second);
                incumbent_pool_ids.push_back(it->second);
            }
    }

    std::map<int, int> cand_of; // pool id -> candidate index
    for (int id : keep) {       // std::set iterates ascending: pool id order
        const PoolRoute& pr = pool.routes[id];
        MasterCandidate c;
        c.pool_id = pr.id;
        c.cost = pr.cost;
        c.signature = pr.signature;
        c.period = pr.period.index;
        c.vehicle_type = pr.route.vehicle_type;
        for (int u : pr.served) c.covers.push_back(req_idx.at({pr.period.index, u}));
        std::sort(c.covers.begin(), c.covers.end());
        for (const auto& [u, t] : pr.pickup_times)
            c.times.emplace_back(user_half(u, pr.period.is_am()), t);
        cand_of[id] = (int)mp.candidates.size();
        mp.candidates.push_back(std::move(c));
    }
    for (int id : incumbent_pool_ids) mp.incumbent.push_back(cand_of.at(id));

    mp.covering.resize(mp.requests.size());
    for (int c = 0; c < (int)mp.candidates.size(); ++c)
        for (int r : mp.candidates[c].covers) mp.covering[r].push_back(c);
    for (auto& list : mp.covering)
        std::sort(list.begin(), list.end(), [&](int a, int b) {
            if (mp.candidates[a].cost != mp.candidates[b].cost)
                return mp.candidates[a].cost < mp.candidates[b].cost;
            return mp.candidates[a].signature < mp.candidates[b].signature;
        });
    return mp;
}

namespace {

struct Search {
    const MasterProblem& mp;
    const bool hardcap;
    const Cents lambda;
    const int cap;
    const double time_limit;
    std::chrono::steady_clock::time_point deadline;

    std::vector<char> covered;
    std::vector<int> used;                        // (period, vehicle type) counts
    std::vector<std::vector<Minutes>> half_times; // sorted, per user-half
    std::vector<int> half_classes;
    std::vector<std::int64_t> minfrac; // millicents, per request
    std::int64_t uncovered_minfrac = 0;
    Cents cost_sel = 0;
    std::int64_t excess = 0;
    std::vector<int> chosen;

    bool have_best = false;
    Cents best_obj = 0;
    std::vector<int> best_sel;
    bool timed_out = false;
    std::uint64_t nodes = 0;
    std::string certificate;

    explicit Search(const MasterProblem& mp, double limit)
        : mp(mp), hardcap(mp.mode.kind == MasterMode::Kind::HardCap), lambda(mp.mode.lambda),
          cap(mp.mode.max_classes), time_limit(limit) {
        deadline = std::chrono::steady_clock::now() +
                   std::chrono::microseconds((std::int64_t)(limit * 1e6));
        covered.assign(mp.requests.size(), 0);
        used.assign(kPeriodCount * std::max<size_t>(1, mp.instance->vehicle_types.size()), 0);
        half_times.assign(mp.instance->users.size() * 2, {});
        half_classes.assign(mp.instance->users.size() * 2, 0);
        minfrac.assign(mp.requests.size(), 0);
        for (size_t r = 0; r < mp.requests.size(); ++r) {
            std::int64_t m = -1;
            for (int c : mp.covering[r]) {
                const std::int64_t frac =
                    mp.candidates[c].cost * 1000 / (std::int64_t)mp.candidates[c].covers.size();
                if (m < 0 || frac < m) m = frac;
            }
            minfrac[r] = std::max<std::int64_t>(0, m);
            uncovered_minfrac += minfrac[r];
        }
    }

    int classes_of(const std::vector<Minutes>& times) const {
        // greedy sweep over the sorted vector, same contract as time_classes
        int count = 0;
        size_t i = 0;
        while (i < times.size()) {
            const Minutes start = times[i];
            ++count;
            while (i < times.size() && times[i] <= start + mp.width) ++i;
        }
        return count;
    }

    struct Undo {
        std::vector<std::pair<int, int>> old_classes; // (half, previous count)
    };

    void apply(int c, Undo& undo) {
        const MasterCandidate& cand = mp.candidates[c];
        for (int r : cand.covers) {
            covered[r] = 1;
            uncovered_minfrac -= minfrac[r];
        }
        ++used[cand.period * (int)mp.instance->vehicle_types.size() + cand.vehicle_type];
        cost_sel += cand.cost;
        for (const auto& [half, t] : cand.times) {
            auto& v = half_times[half];
            v.insert(std::upper_bound(v.begin(), v.end(), t), t);
            undo.old_classes.emplace_back(half, half_classes[half]);
            const int now = classes_of(v);
            excess += std::max(0, now - 1) - std::max(0, half_classes[half] - 1);
            half_classes[half] = now;
        }
        chosen.push_back(c);
    }

    void unapply(int c, const Undo& undo) {
        const MasterCandidate& cand = mp.candidates[c];
        chosen.pop_back();
        for (size_t i = cand.times.size(); i-- > 0;) {
            const auto& [half, t] = cand.times[i];
            auto& v = half_times[half];
            v.erase(std::lower_bound(v.begin(), v.end(), t));
            const int old = undo.old_classes[i].second;
            excess += std::max(0, old - 1) - std::max(0, half_classes[half] - 1);
            half_classes[half] = old;
        }
        cost_sel -= cand.cost;
        --used[cand.period * (int)mp.instance->vehicle_types.size() + cand.vehicle_type];
        for (int r : cand.covers) {
            covered[r] = 0;
            uncovered_minfrac += minfrac[r];
        }
    }

    std::int64_t bound_millicents() const {
        std::int64_t b = cost_sel * 1000 + uncovered_minfrac;
        if (!hardcap) b += lambda * 1000 * excess;
        return b;
    }

    Cents leaf_objective() const { return hardcap ? cost_sel : cost_sel + lambda * excess; }

    void record_leaf() {
        const Cents obj = leaf_objective();
        if (!have_best || obj < best_obj) {
            have_best = true;
            best_obj = obj;
            best_sel = chosen;
        }
    }

    bool over_availability(const MasterCandidate& cand) const {
        const VehicleType& vt = mp.instance->vehicle_types[cand.vehicle_type];
        if (vt.unlimited()) return false;
        return used[cand.period * (int)mp.instance->vehicle_types.size() + cand.vehicle_type] >=
               vt.available;
    }

    void dfs(int from) {
        if (timed_out) return;
        if (++nodes % 1024 == 0 && std::chrono::steady_clock::now() > deadline) {
            timed_out = true;
            return;
        }
        int r = from;
        while (r < (int)mp.requests.size() && covered[r]) ++r;
        if (r == (int)mp.requests.size()) {
            record_leaf();
            return;
        }
        bool any_child = false;
        for (int c : mp.covering[r]) {
            const MasterCandidate& cand = mp.candidates[c];
            bool overlap = false;
            for (int rr : cand.covers) overlap = overlap || (covered[rr] && rr != r);
            if (overlap || covered[r] || over_availability(cand)) continue;
            Undo undo;
            apply(c, undo);
            bool capped = false;
            if (hardcap)
                for (const auto& [half, t] : cand.times)
                    if (half_classes[half] > cap) {
                        capped = true;
                        if (certificate.empty())
                            certificate = mp.instance->users[half / 2].id;
                        break;
                    }
            if (!capped && (!have_best || bound_millicents() < best_obj * 1000)) {
                any_child = true;
                dfs(r + 1);
            }
            unapply(c, undo);
            if (timed_out) return;
        }
        if (!any_child && certificate.empty())
            certificate = mp.instance->users[mp.requests[r].second].id;
    }
};

} // namespace

MasterSolution solve_master(const MasterProblem& problem, double time_limit_seconds) {
    Search search(problem, time_limit_seconds);

    // the incumbent plan, when present, seeds the upper bound
    if (!problem.incumbent.empty()) {
        std::vector<Search::Undo> undos(problem.incumbent.size());
        bool ok = true;
        size_t applied = 0;
        for (; applied < problem.incumbent.size(); ++applied) {
            const auto& cand = problem.candidates[problem.incumbent[applied]];
            bool overlap = false;
            for (int r : cand.covers) overlap = overlap || search.covered[r];
            if (overlap) {
                ok = false;
                break;
            }
            search.apply(problem.incumbent[applied], undos[applied]);
        }
        if (ok) {
            bool complete = true;
            for (char c : search.covered) complete = complete && c;
            bool capped = false;
            if (search.hardcap)
                for (int h = 0; h < (int)search.half_classes.size(); ++h)
                    capped = capped || search.half_classes[h] > search.cap;
            if (complete && !capped) search.record_leaf();
        }
        for (size_t i = applied; i-- > 0;)
            search.unapply(problem.incumbent[i], undos[i]);
    }

    search.dfs(0);

    MasterSolution sol;
    sol.proved = !search.timed_out;
    sol.feasible = search.have_best;
    if (!search.have_best) {
        sol.certificate = search.certificate;
        return sol;
    }
    sol.selected = search.best_sel;
    std::sort(sol.selected.begin(), sol.selected.end());
    std::vector<std::vector<Minutes>> times(problem.instance->users.size() * 2);
    for (int c : sol.selected) {
        sol.selected_pool_ids.push_back(problem.candidates[c].pool_id);
        sol.cost += problem.candidates[c].cost;
        for (const auto& [half, t] : problem.candidates[c].times) times[half].push_back(t);
    }
    for (size_t h = 0; h < times.size(); ++h) {
        if (times[h].empty()) continue;
        auto [count, windows] = time_classes(times[h], problem.width);
        sol.excess_classes += std::max(0, count - 1);
        sol.windows.emplace_back((int)h, std::move(windows));
    }
    sol.objective = search.hardcap ? sol.cost : sol.cost + problem.mode.lambda * sol.excess_classes;
    return sol;
}

std::vector<std::string> verify_master_solution(const MasterProblem& problem,
                                                const MasterSolution& solution) {
    std::vector<std::string> bad;
    if (!solution.feasible) {
        bad.push_back("solution is not feasible");
        return bad;
    }
    std::vector<int> cover_count(problem.requests.size(), 0);
    std::vector<int> used(kPeriodCount * std::max<size_t>(1, problem.instance->vehicle_types.size()),
                          0);
    Cents cost = 0;
    std::map<int, std::vector<Minutes>> times;
    for (int c : solution.selected) {
        const auto& cand = problem.candidates[c];
        cost += cand.cost;
        for (int r : cand.covers) ++cover_count[r];
        ++used[cand.period * (int)problem.instance->vehicle_types.size() + cand.vehicle_type];
        for (const auto& [half, t] : cand.times) times[half].push_back(t);
    }
    for (size_t r = 0; r < cover_count.size(); ++r)
        if (cover_count[r] != 1)
            bad.push_back("request " + std::to_string(r) + " covered " +
                          std::to_string(cover_count[r]) + " times");
    for (int p = 0; p < kPeriodCount; ++p)
        for (size_t t = 0; t < problem.instance->vehicle_types.size(); ++t) {
            const VehicleType& vt = problem.instance->vehicle_types[t];
            if (!vt.unlimited() &&
                used[p * (int)problem.instance->vehicle_types.size() + (int)t] > vt.available)
                bad.push_back("vehicle type " + vt.id + " over availability in " +
                              PeriodId{p}.name());
        }
    if (cost != solution.cost) bad.push_back("cost part mismatch");

    int excess = 0;
    for (const auto& [half, ts] : times) {
        const std::vector<TimeWindow>* wins = nullptr;
        for (const auto& [h, w] : solution.windows)
            if (h == half) wins = &w;
        if (!wins) {
            bad.push_back("no windows reported for a served user-half");
            continue;
        }
        for (Minutes t : ts) {
            bool inside = false;
            for (const auto& w : *wins) inside = inside || (t >= w.earliest && t <= w.latest);
            if (!inside)
                bad.push_back("pickup time " + std::to_string(t) +
                              " outside every selected window");
        }
        excess += std::max(0, (int)wins->size() - 1);
        if (problem.mode.kind == MasterMode::Kind::HardCap &&
            (int)wins->size() > problem.mode.max_classes)
            bad.push_back("class count over the hard cap");
    }
    if (excess != solution.excess_classes) bad.push_back("excess class count mismatch");
    const Cents expect = problem.mode.kind == MasterMode::Kind::HardCap
                             ? solution.cost
                             : solution.cost + problem.mode.lambda * solution.excess_classes;
    if (expect != solution.objective) bad.push_back("objective arithmetic mismatch");
    return bad;
}

} // namespace tcdarp
