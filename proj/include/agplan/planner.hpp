#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "agplan/catalog.hpp"
#include "agplan/risk_model.hpp"

namespace agplan {

/// Step-2 combination of the per-countermeasure risk deltas.
///
/// KthSmallestDelta returns the X-th smallest delta: any budget-feasible
/// subset removes at least X members, and what it adds is at least the
/// delta of every removed member, so this never overestimates even though
/// or-combined branch risks are not superadditive. SumSmallestDeltas (the
/// sum of the X smallest) is kept for comparison; it matches the worked
/// example arithmetic of sum-form equations but can overestimate on
/// or-combined models, forfeiting the optimality guarantee.
enum class HeuristicForm { KthSmallestDelta, SumSmallestDeltas };

struct PlanningProblem {
    const RiskModel* model = nullptr;
    /// Subset of model variables available to the search (the initial node).
    std::vector<DeployedCm> initial;
    double budget = 0.0;
    HeuristicForm heuristic_form = HeuristicForm::KthSmallestDelta;
};

/// A search node: the deployed set as a bitmask over model variables.
/// g is the risk with the whole set applied, h the estimated risk added by
/// shrinking it into budget, cost the summed deployment cost.
struct SearchState {
    uint64_t mask = 0;
    double g = 0.0;
    double h = 0.0;
    double f = 0.0;
    double cost = 0.0;
};

struct PlanStats {
    long expanded = 0;
    long generated = 0;
    long duplicates_skipped = 0;
    double wall_ms = 0.0;
};

struct PlanResult {
    std::vector<DeployedCm> plan;  // canonical order
    double residual_risk = 0.0;
    double total_cost = 0.0;
    PlanStats stats;
};

/// Successor states, one per omitted countermeasure, in canonical order of
/// the removed element.
std::vector<uint64_t> expand(const PlanningProblem& problem, uint64_t mask);

/// Two-step heuristic: X = the minimum number of members, taken from the
/// costs sorted descending, whose removal brings the cost within budget;
/// then combine the X smallest single-removal risk deltas per
/// problem.heuristic_form. Zero when the state is already within budget.
double heuristic(const PlanningProblem& problem, uint64_t mask);

/// Open-list ordering: f ascending, then g descending, then cost ascending,
/// then the canonical deployed-set key ascending. Returns true when a is
/// popped before b.
bool better_state(const PlanningProblem& problem, const SearchState& a, const SearchState& b);

/// Best-first search over subset removals; returns the first within-budget
/// state popped. Duplicate states are never re-inserted and the closed set
/// is re-checked on pop. `expanded_log`, when given, records every state
/// whose successors were generated (used by the admissibility tests).
PlanResult astar_plan(const PlanningProblem& problem,
                      std::vector<SearchState>* expanded_log = nullptr);

/// Exhaustive optimum over all within-budget subsets of the initial state;
/// ties broken by cost then canonical key. Guarded to 20 countermeasures.
PlanResult brute_force_plan(const PlanningProblem& problem);

struct SweepRow {
    double budget = 0.0;
    PlanResult result;
};

/// One plan per budget; the initial state is re-filtered per budget to the
/// countermeasures whose unit cost fits it.
std::vector<SweepRow> budget_sweep(const RiskModel& model, const std::vector<double>& budgets,
                                   HeuristicForm form = HeuristicForm::KthSmallestDelta);

struct VulnScore {
    std::string id;
    double base_score = 0.0;
};

/// Topology-blind remediation order: CVSS base score descending, ties by
/// identifier.
std::vector<VulnScore> cvss_baseline_rank(std::vector<VulnScore> vulns);

}  // namespace agplan
