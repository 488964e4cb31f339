#include "agplan/attack_graph.hpp"

#include <algorithm>
#include <cstdlib>

#include "agplan/errors.hpp"

namespace agplan {

std::string node_kind_name(NodeKind kind) {
    switch (kind) {
        case NodeKind::Derivation: return "derivation";
        case NodeKind::PrimitiveFact: return "primitive-fact";
        case NodeKind::DerivedFact: return "derived-fact";
    }
    return "?";
}

NodeKind node_kind_from(const std::string& name) {
    if (name == "derivation" || name == "AND") return NodeKind::Derivation;
    if (name == "primitive-fact" || name == "LEAF") return NodeKind::PrimitiveFact;
    if (name == "derived-fact" || name == "OR") return NodeKind::DerivedFact;
    throw ValidationError("unknown node kind '" + name + "'");
}

std::string AgNode::label() const {
    if (kind != NodeKind::Derivation) return atom.to_string();
    std::string number = rule_id;
    if (!number.empty() && (number[0] == 'r' || number[0] == 'f')) number = number.substr(1);
    return "Rule " + number + ": " + rule_label;
}

AttackGraph::AttackGraph(std::vector<AgNode> nodes, std::vector<std::pair<int, int>> edges,
                         std::vector<int> goals)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), goals_(std::move(goals)) {
    in_.resize(nodes_.size());
    out_.resize(nodes_.size());
    for (const auto& [from, to] : edges_) {
        out_[static_cast<size_t>(from - 1)].push_back(to);
        in_[static_cast<size_t>(to - 1)].push_back(from);
    }
    for (const AgNode& n : nodes_) {
        if (n.is_fact()) fact_index_[n.atom.to_string()] = n.id;
    }
    validate();
}

int AttackGraph::fact_node(const Atom& atom) const {
    auto it = fact_index_.find(atom.to_string());
    return it == fact_index_.end() ? 0 : it->second;
}

int AttackGraph::count(NodeKind kind) const {
    return static_cast<int>(
        std::count_if(nodes_.begin(), nodes_.end(),
                      [kind](const AgNode& n) { return n.kind == kind; }));
}

void AttackGraph::validate() const {
    for (size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].id != static_cast<int>(i) + 1) {
            throw ValidationError("node ids must be contiguous from 1");
        }
    }
    auto in_range = [this](int id) { return id >= 1 && id <= static_cast<int>(nodes_.size()); };
    for (const auto& [from, to] : edges_) {
        if (!in_range(from) || !in_range(to)) {
            throw ValidationError("edge endpoint " + std::to_string(from) + "->" +
                                  std::to_string(to) + " out of range");
        }
        bool fact_to_derivation = node(from).is_fact() && node(to).kind == NodeKind::Derivation;
        bool derivation_to_derived =
            node(from).kind == NodeKind::Derivation && node(to).kind == NodeKind::DerivedFact;
        if (!fact_to_derivation && !derivation_to_derived) {
            throw ValidationError("edge " + std::to_string(from) + "->" + std::to_string(to) +
                                  " violates the bipartite edge discipline");
        }
    }
    for (const AgNode& n : nodes_) {
        if (n.kind == NodeKind::Derivation && out_neighbors(n.id).size() != 1) {
            throw ValidationError("derivation node " + std::to_string(n.id) +
                                  " must have exactly one out-edge");
        }
        if (n.kind == NodeKind::DerivedFact && in_neighbors(n.id).empty()) {
            throw ValidationError("derived-fact node " + std::to_string(n.id) + " has no in-edge");
        }
    }
    if (goals_.empty()) throw ValidationError("attack graph requires at least one goal");
    for (int g : goals_) {
        if (!in_range(g) || node(g).kind == NodeKind::Derivation) {
            throw ValidationError("goal " + std::to_string(g) + " is not a fact node");
        }
    }
}

namespace {

// vulHost(Host, VulID, Program, Range, Consequence) and
// vulProtocol(Prot, VulID, Consequence) are the vulnerability leaves; the
// identifier sits at argument 1 and keys the cvss/cvssProb metadata facts.
bool vulnerability_functor(const std::string& functor) {
    return functor == "vulHost/5" || functor == "vulProtocol/3";
}

std::map<std::string, CvssInfo> collect_cvss(const KnowledgeBase& kb) {
    std::map<std::string, CvssInfo> out;
    for (const HornRule* fact : kb.facts()) {
        const Atom& a = fact->head;
        if (a.predicate == "cvss" && a.arity() == 4) {
            CvssInfo& info = out[a.args[0].text];
            info.version = CvssInfo::parse_version(a.args[1].text);
            info.attack_complexity = CvssInfo::parse_level(a.args[2].text);
            info.interaction = CvssInfo::parse_level(a.args[3].text);
        } else if (a.predicate == "cvssProb" && a.arity() == 2) {
            char* end = nullptr;
            double p = std::strtod(a.args[1].text.c_str(), &end);
            if (!end || *end != '\0') {
                throw ValidationError("cvssProb value '" + a.args[1].text + "' is not a decimal");
            }
            out[a.args[0].text].explicit_probability = p;
        }
    }
    return out;
}

class GraphBuilder {
public:
    GraphBuilder(const KnowledgeBase& kb, const QueryResult& result)
        : kb_(kb), result_(result), cvss_(collect_cvss(kb)) {}

    int visit(const Atom& atom) {
        std::string key = atom.to_string();
        auto it = ids_.find(key);
        if (it != ids_.end()) return it->second;

        const std::vector<Derivation>& derivations = result_.derivations(atom);
        bool any_fact = false, any_rule = false;
        for (const Derivation& d : derivations) {
            (kb_.rule(kb_.rule_index(d.rule_id)).is_fact() ? any_fact : any_rule) = true;
        }
        if (any_fact && any_rule) {
            throw ValidationError("atom " + key + " is both a stored fact and rule-derived");
        }

        AgNode node;
        node.id = next_id();
        node.kind = any_rule ? NodeKind::DerivedFact : NodeKind::PrimitiveFact;
        node.atom = atom;
        if (node.kind == NodeKind::PrimitiveFact && vulnerability_functor(atom.functor())) {
            auto cv = cvss_.find(atom.args[1].text);
            if (cv != cvss_.end()) node.vuln = cv->second;
        }
        ids_[key] = node.id;
        int fact_id = node.id;
        nodes_.push_back(std::move(node));

        for (const Derivation& d : derivations) {
            const HornRule& rule = kb_.rule(kb_.rule_index(d.rule_id));
            if (rule.is_fact()) continue;
            AgNode dnode;
            dnode.id = next_id();
            dnode.kind = NodeKind::Derivation;
            dnode.rule_id = d.rule_id;
            dnode.rule_label = rule.label;
            int deriv_id = dnode.id;
            nodes_.push_back(std::move(dnode));
            for (const Atom& b : d.body) {
                int child = visit(b);
                edges_.emplace_back(child, deriv_id);
            }
            edges_.emplace_back(deriv_id, fact_id);
        }
        return fact_id;
    }

    AttackGraph finish(std::vector<int> goals) {
        return AttackGraph(std::move(nodes_), std::move(edges_), std::move(goals));
    }

private:
    int next_id() { return static_cast<int>(nodes_.size()) + 1; }

    const KnowledgeBase& kb_;
    const QueryResult& result_;
    std::map<std::string, CvssInfo> cvss_;
    std::map<std::string, int> ids_;
    std::vector<AgNode> nodes_;
    std::vector<std::pair<int, int>> edges_;
};

AttackGraph build_from(const KnowledgeBase& kb, const QueryResult& result,
                       const std::vector<Atom>& goals) {
    GraphBuilder builder(kb, result);
    std::vector<int> goal_ids;
    for (size_t g = 0; g < goals.size(); ++g) {
        for (const QueryResult::Answer& answer : result.answers(g)) {
            int id = builder.visit(answer.atom);
            if (std::find(goal_ids.begin(), goal_ids.end(), id) == goal_ids.end()) {
                goal_ids.push_back(id);
            }
        }
    }
    return builder.finish(std::move(goal_ids));
}

}  // namespace

AttackGraph build_attack_graph(const KnowledgeBase& kb, const std::vector<Atom>& goals,
                               QueryOptions options) {
    if (goals.empty()) throw ValidationError("at least one goal atom is required");
    Solver solver(kb, options);
    QueryResult result = solver.query_all(goals);
    std::string missing;
    for (size_t g = 0; g < goals.size(); ++g) {
        if (result.answers(g).empty()) {
            if (!missing.empty()) missing += ", ";
            missing += goals[g].to_string();
        }
    }
    if (!missing.empty()) {
        throw GoalNotDerivable("goal(s) not derivable from the program: " + missing);
    }
    return build_from(kb, result, goals);
}

std::optional<AttackGraph> build_attack_graph_partial(const KnowledgeBase& kb,
                                                      const std::vector<Atom>& goals,
                                                      QueryOptions options) {
    Solver solver(kb, options);
    QueryResult result = solver.query_all(goals);
    std::vector<Atom> derivable;
    std::vector<size_t> kept;
    for (size_t g = 0; g < goals.size(); ++g) {
        if (!result.answers(g).empty()) {
            derivable.push_back(goals[g]);
            kept.push_back(g);
        }
    }
    if (derivable.empty()) return std::nullopt;
    if (derivable.size() == goals.size()) return build_from(kb, result, goals);
    QueryResult narrowed = Solver(kb, options).query_all(derivable);
    return build_from(kb, narrowed, derivable);
}

}  // namespace agplan
