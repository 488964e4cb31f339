#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agplan/ast.hpp"
#include "agplan/cvss.hpp"
#include "agplan/solver.hpp"

namespace agplan {

enum class NodeKind { Derivation, PrimitiveFact, DerivedFact };

std::string node_kind_name(NodeKind kind);
NodeKind node_kind_from(const std::string& name);

/// A node of the tripartite logical attack graph. Fact nodes carry the
/// ground atom; derivation nodes the applied rule. Vulnerability leaves
/// (vulHost / vulProtocol facts with CVSS data) carry CvssInfo.
struct AgNode {
    int id = 0;
    NodeKind kind = NodeKind::PrimitiveFact;
    Atom atom;                  // fact nodes
    std::string rule_id;        // derivation nodes
    std::string rule_label;     // derivation nodes
    std::optional<CvssInfo> vuln;

    bool is_fact() const { return kind != NodeKind::Derivation; }
    /// Display label: the canonical atom for fact nodes, "Rule N: label"
    /// for derivation nodes.
    std::string label() const;
};

/// AG = (Nr, Np, Nd, E, L, G). Edges run fact -> derivation and
/// derivation -> derived fact only; every derivation has exactly one
/// out-edge. Immutable after construction; share freely across threads.
class AttackGraph {
public:
    AttackGraph() = default;
    AttackGraph(std::vector<AgNode> nodes, std::vector<std::pair<int, int>> edges,
                std::vector<int> goals);

    const std::vector<AgNode>& nodes() const { return nodes_; }
    const AgNode& node(int id) const { return nodes_[static_cast<size_t>(id - 1)]; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<int>& goals() const { return goals_; }

    const std::vector<int>& in_neighbors(int id) const { return in_[static_cast<size_t>(id - 1)]; }
    const std::vector<int>& out_neighbors(int id) const { return out_[static_cast<size_t>(id - 1)]; }

    /// Id of the fact node labelled by `atom`, or 0.
    int fact_node(const Atom& atom) const;

    int count(NodeKind kind) const;

private:
    void validate() const;

    std::vector<AgNode> nodes_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<int> goals_;
    std::vector<std::vector<int>> in_;
    std::vector<std::vector<int>> out_;
    std::map<std::string, int> fact_index_;
};

/// Builds the attack graph for `goals` from the program's proof structure.
/// One node per distinct ground atom, one derivation node per distinct
/// (rule, ground body) application; ids follow depth-first discovery from
/// the goals with children in rule-body order. Throws GoalNotDerivable when
/// any goal has no answers.
AttackGraph build_attack_graph(const KnowledgeBase& kb, const std::vector<Atom>& goals,
                               QueryOptions options = {});

/// As above, but silently drops underivable goals; used by the
/// regeneration oracle. Returns nullopt when nothing is derivable.
std::optional<AttackGraph> build_attack_graph_partial(const KnowledgeBase& kb,
                                                      const std::vector<Atom>& goals,
                                                      QueryOptions options = {});

}  // namespace agplan
