#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "agplan/attack_graph.hpp"
#include "agplan/catalog.hpp"
#include "agplan/solver.hpp"

namespace agplan {

/// One matching rule per mitigation action: the primary postcondition with
/// the MAID prepended as a constant first argument, preconditions as the
/// body. These rules are exempt from range restriction; querying them with
/// a ground node label binds every variable that matters.
HornRule compile_matching_rule(const MitigationAction& ma);

/// The reasoning program for countermeasure identification: the base facts
/// of the network program plus one compiled rule per mitigation action.
/// Throws when a primary postcondition predicate does not occur in the
/// program's vocabulary.
KnowledgeBase make_matching_kb(const KnowledgeBase& program,
                               const std::vector<MitigationAction>& catalog);

struct Match {
    std::string ma_id;
    ProofTrace trace;
};

/// node id -> matches, for every fact node of the graph (derivation nodes
/// never match).
using MatchResult = std::map<int, std::vector<Match>>;

/// Queries p(MAID, t1..tn) for the node's ground label p(t1..tn) and
/// returns every MAID binding with its proof trace.
std::vector<Match> match_node(const KnowledgeBase& matching_kb, const AgNode& node,
                              QueryOptions options = {});

MatchResult match_graph(const KnowledgeBase& matching_kb, const AttackGraph& graph,
                        QueryOptions options = {});

/// Resolves the mitigation action's position specification against a match
/// trace. Inter-subnet positions yield an ordered pair.
Position extract_position(const MitigationAction& ma, const ProofTrace& trace);

/// The search-ready deployment set: the initial node of the search plus the
/// per-node attachment map consumed by the risk model.
struct ResolvedDeployment {
    std::vector<DeployedCm> initial;              // sorted by canonical key, deduplicated
    std::map<int, std::set<DeployedCm>> by_node;  // node id -> countermeasures cancelling it
};

/// For each (node, mitigation action, trace): every countermeasure
/// supporting the action yields one DeployedCm at the extracted position.
/// Matches on nodes whose label matches a policy pattern are dropped, as
/// are countermeasures whose unit cost exceeds the budget.
ResolvedDeployment resolve_countermeasures(const AttackGraph& graph, const MatchResult& matches,
                                           const std::vector<MitigationAction>& catalog,
                                           const std::vector<Countermeasure>& repo,
                                           const std::vector<Atom>& policy, double budget);

}  // namespace agplan
