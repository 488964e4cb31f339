#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "agplan/attack_graph.hpp"
#include "agplan/catalog.hpp"
#include "agplan/matching.hpp"

namespace agplan {

/// Exploit probability of a primitive-fact node: the CVSS-derived value for
/// vulnerability leaves, 1.0 for any other fact (it can always be
/// materialized).
double leaf_probability(const AgNode& node);

/// Dry run of the equation-building worklist: the edges that cycle breaking
/// would delete, in deletion order. Empty for acyclic graphs.
std::vector<std::pair<int, int>> remove_cycles(const AttackGraph& graph);

enum class GoalAggregate { OrCombine, Sum };

/// Risk equations over countermeasure indicator variables, compiled once
/// from the attack graph. Leaves multiply their countermeasure variables by
/// the leaf probability; derivation (AND) nodes multiply their inputs;
/// derived-fact (OR) nodes combine inputs as 1 - prod(1 - x) and multiply
/// their own countermeasure variables. Immutable after construction.
class RiskModel {
public:
    enum class Op { Constant, Var, Product, OrCombine, Sum };
    struct ExprNode {
        Op op = Op::Constant;
        double value = 0.0;
        int var = -1;
        std::vector<int> children;
    };

    const std::vector<DeployedCm>& variables() const { return variables_; }
    int variable_index(const DeployedCm& cm) const;

    /// Residual system risk with every member of `deployed` implemented
    /// (variable = 0; absent countermeasures evaluate to 1).
    double evaluate(const std::set<DeployedCm>& deployed) const;
    /// Planner fast path over variable-index bitmasks.
    double evaluate_mask(uint64_t deployed_mask) const;

    /// evaluate(plan minus cm) - evaluate(plan); cm must be in plan.
    double delta_risk(const std::set<DeployedCm>& plan, const DeployedCm& cm) const;

    /// Canonical rendering of the goal expression; products are flattened
    /// with the constant first and variables sorted, or-children sorted.
    std::string dump() const;
    std::string dump_node(int graph_node_id) const;

    const std::vector<std::pair<int, int>>& removed_edges() const { return removed_edges_; }
    int expr_of_node(int graph_node_id) const { return node_expr_.at(graph_node_id); }
    const std::vector<ExprNode>& exprs() const { return exprs_; }
    int goal_expr() const { return goal_expr_; }

private:
    friend RiskModel build_risk_model(const AttackGraph&, const ResolvedDeployment&,
                                      GoalAggregate);

    std::string render(int expr) const;

    std::vector<ExprNode> exprs_;
    int goal_expr_ = -1;
    std::vector<DeployedCm> variables_;
    std::map<std::string, int> variable_index_;
    std::map<int, int> node_expr_;
    std::vector<std::pair<int, int>> removed_edges_;
};

/// Compiles the equations following the processed/unprocessed worklist,
/// invoking cycle removal whenever no node is processable.
RiskModel build_risk_model(const AttackGraph& graph, const ResolvedDeployment& resolved,
                           GoalAggregate aggregate = GoalAggregate::OrCombine);

/// Everything needed to regenerate the attack graph from scratch.
struct PipelineContext {
    const KnowledgeBase* kb = nullptr;
    std::vector<Atom> goals;
    const std::vector<MitigationAction>* catalog = nullptr;
    const std::vector<Countermeasure>* repo = nullptr;
    std::vector<Atom> policy;
    double budget = 0.0;
    QueryOptions options;
};

/// The regeneration pathway used as the equation oracle and benchmark
/// baseline: delete the facts cancelled by each deployed countermeasure,
/// rebuild graph, matches and model, and evaluate with nothing deployed.
/// Derived facts cancelled by a deployed countermeasure are suppressed from
/// the regenerated graph. Returns 0 when no goal remains derivable.
double rebuild_oracle(const PipelineContext& context, const AttackGraph& original,
                      const ResolvedDeployment& resolved, const std::set<DeployedCm>& deployed);

}  // namespace agplan
