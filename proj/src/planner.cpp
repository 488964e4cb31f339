#include "agplan/planner.hpp"

#include <algorithm>
#include <chrono>
#include <queue>
#include <unordered_set>

#include "agplan/errors.hpp"

namespace agplan {

namespace {

// Indices (ascending) of the problem's initial members inside the model's
// canonical variable list.
std::vector<int> member_indices(const PlanningProblem& problem) {
    std::vector<int> out;
    for (const DeployedCm& cm : problem.initial) {
        int index = problem.model->variable_index(cm);
        if (index < 0) throw LogicError("initial state member " + cm.key() + " unknown to model");
        out.push_back(index);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> mask_indices(uint64_t mask) {
    std::vector<int> out;
    for (int i = 0; mask; ++i, mask >>= 1) {
        if (mask & 1) out.push_back(i);
    }
    return out;
}

double mask_cost(const RiskModel& model, uint64_t mask) {
    double cost = 0.0;
    for (int i : mask_indices(mask)) cost += model.variables()[static_cast<size_t>(i)].cost;
    return cost;
}

// Lexicographic comparison of the canonical deployed-set keys. Variables
// are stored in canonical order, so index sequences stand in for key
// sequences.
bool canonical_less(uint64_t a, uint64_t b) {
    std::vector<int> ia = mask_indices(a), ib = mask_indices(b);
    return std::lexicographical_compare(ia.begin(), ia.end(), ib.begin(), ib.end());
}

SearchState make_state(const PlanningProblem& problem, uint64_t mask) {
    SearchState s;
    s.mask = mask;
    s.g = problem.model->evaluate_mask(mask);
    s.h = heuristic(problem, mask);
    s.f = s.g + s.h;
    s.cost = mask_cost(*problem.model, mask);
    return s;
}

std::vector<DeployedCm> mask_members(const RiskModel& model, uint64_t mask) {
    std::vector<DeployedCm> out;
    for (int i : mask_indices(mask)) out.push_back(model.variables()[static_cast<size_t>(i)]);
    return out;
}

}  // namespace

std::vector<uint64_t> expand(const PlanningProblem& problem, uint64_t mask) {
    (void)problem;
    std::vector<uint64_t> out;
    for (int i : mask_indices(mask)) out.push_back(mask & ~(uint64_t{1} << i));
    return out;
}

double heuristic(const PlanningProblem& problem, uint64_t mask) {
    const RiskModel& model = *problem.model;
    std::vector<int> members = mask_indices(mask);
    double cost = 0.0;
    std::vector<double> costs;
    for (int i : members) {
        costs.push_back(model.variables()[static_cast<size_t>(i)].cost);
        cost += costs.back();
    }
    if (cost <= problem.budget) return 0.0;

    std::sort(costs.begin(), costs.end(), std::greater<double>());
    int removals = 0;
    for (double c : costs) {
        cost -= c;
        ++removals;
        if (cost <= problem.budget) break;
    }

    double base = model.evaluate_mask(mask);
    std::vector<double> deltas;
    deltas.reserve(members.size());
    for (int i : members) {
        deltas.push_back(model.evaluate_mask(mask & ~(uint64_t{1} << i)) - base);
    }
    std::sort(deltas.begin(), deltas.end());
    if (problem.heuristic_form == HeuristicForm::SumSmallestDeltas) {
        double sum = 0.0;
        for (int i = 0; i < removals; ++i) sum += deltas[static_cast<size_t>(i)];
        return sum;
    }
    return deltas[static_cast<size_t>(removals - 1)];
}

bool better_state(const PlanningProblem&, const SearchState& a, const SearchState& b) {
    if (a.f != b.f) return a.f < b.f;
    if (a.g != b.g) return a.g > b.g;
    if (a.cost != b.cost) return a.cost < b.cost;
    return canonical_less(a.mask, b.mask);
}

PlanResult astar_plan(const PlanningProblem& problem, std::vector<SearchState>* expanded_log) {
    auto start = std::chrono::steady_clock::now();
    const RiskModel& model = *problem.model;

    uint64_t initial_mask = 0;
    for (int i : member_indices(problem)) initial_mask |= uint64_t{1} << i;

    auto worse = [&problem](const SearchState& a, const SearchState& b) {
        return better_state(problem, b, a);
    };
    std::priority_queue<SearchState, std::vector<SearchState>, decltype(worse)> open(worse);
    std::unordered_set<uint64_t> open_members, closed;
    PlanStats stats;

    open.push(make_state(problem, initial_mask));
    open_members.insert(initial_mask);

    while (!open.empty()) {
        SearchState state = open.top();
        open.pop();
        if (closed.count(state.mask)) {
            ++stats.duplicates_skipped;
            continue;
        }
        if (state.cost <= problem.budget) {
            PlanResult result;
            result.plan = mask_members(model, state.mask);
            result.residual_risk = state.g;
            result.total_cost = state.cost;
            result.stats = stats;
            result.stats.wall_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                    .count();
            return result;
        }
        closed.insert(state.mask);
        ++stats.expanded;
        if (expanded_log) expanded_log->push_back(state);
        for (uint64_t next : expand(problem, state.mask)) {
            if (open_members.count(next) || closed.count(next)) {
                ++stats.duplicates_skipped;
                continue;
            }
            open.push(make_state(problem, next));
            open_members.insert(next);
            ++stats.generated;
        }
    }
    // Unreachable: the empty set always satisfies the goal test.
    throw LogicError("search exhausted the open list without reaching a goal");
}

PlanResult brute_force_plan(const PlanningProblem& problem) {
    const RiskModel& model = *problem.model;
    std::vector<int> members = member_indices(problem);
    if (members.size() > 20) {
        throw ValidationError("brute force guarded to 20 countermeasures, got " +
                              std::to_string(members.size()));
    }
    auto start = std::chrono::steady_clock::now();

    uint64_t best_mask = 0;
    double best_risk = 0.0, best_cost = 0.0;
    bool have_best = false;
    uint64_t combos = uint64_t{1} << members.size();
    for (uint64_t pick = 0; pick < combos; ++pick) {
        uint64_t mask = 0;
        for (size_t j = 0; j < members.size(); ++j) {
            if (pick >> j & 1) mask |= uint64_t{1} << members[j];
        }
        double cost = mask_cost(model, mask);
        if (cost > problem.budget) continue;
        double risk = model.evaluate_mask(mask);
        bool better = !have_best || risk < best_risk ||
                      (risk == best_risk &&
                       (cost < best_cost || (cost == best_cost && canonical_less(mask, best_mask))));
        if (better) {
            have_best = true;
            best_mask = mask;
            best_risk = risk;
            best_cost = cost;
        }
    }

    PlanResult result;
    result.plan = mask_members(model, best_mask);
    result.residual_risk = best_risk;
    result.total_cost = best_cost;
    result.stats.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return result;
}

std::vector<SweepRow> budget_sweep(const RiskModel& model, const std::vector<double>& budgets,
                                   HeuristicForm form) {
    std::vector<SweepRow> rows;
    for (double budget : budgets) {
        PlanningProblem problem;
        problem.model = &model;
        problem.budget = budget;
        problem.heuristic_form = form;
        for (const DeployedCm& cm : model.variables()) {
            if (cm.cost <= budget) problem.initial.push_back(cm);
        }
        rows.push_back({budget, astar_plan(problem)});
    }
    return rows;
}

std::vector<VulnScore> cvss_baseline_rank(std::vector<VulnScore> vulns) {
    std::sort(vulns.begin(), vulns.end(), [](const VulnScore& a, const VulnScore& b) {
        if (a.base_score != b.base_score) return a.base_score > b.base_score;
        return a.id < b.id;
    });
    return vulns;
}

}  // namespace agplan
