#include "agplan/matching.hpp"

#include <algorithm>
#include <set>

#include "agplan/errors.hpp"

namespace agplan {

namespace {

std::set<std::string> program_vocabulary(const KnowledgeBase& program) {
    std::set<std::string> out;
    for (const HornRule& r : program.rules()) {
        out.insert(r.head.functor());
        for (const Atom& a : r.body) out.insert(a.functor());
        for (const Atom& a : r.negated_body) out.insert(a.functor());
    }
    return out;
}

std::string trace_key(const ProofTrace& trace) {
    std::string out = trace.root.to_string() + "<-" + trace.rule_id;
    for (const ProofTrace& child : trace.children) out += "{" + trace_key(child) + "}";
    for (const Atom& n : trace.negated) out += "!" + n.to_string();
    return out;
}

}  // namespace

HornRule compile_matching_rule(const MitigationAction& ma) {
    HornRule rule;
    rule.id = "ma:" + ma.id;
    rule.label = ma.action.empty() ? ma.id : ma.action;
    rule.head.predicate = ma.primary_post.predicate;
    rule.head.args.push_back(Term::constant(ma.id));
    for (const Term& t : ma.primary_post.args) rule.head.args.push_back(t);
    for (const auto& [atom, negated] : ma.preconditions) {
        (negated ? rule.negated_body : rule.body).push_back(atom);
    }
    return rule;
}

KnowledgeBase make_matching_kb(const KnowledgeBase& program,
                               const std::vector<MitigationAction>& catalog) {
    std::set<std::string> vocabulary = program_vocabulary(program);
    KnowledgeBase kb = program.facts_only();
    for (const MitigationAction& ma : catalog) {
        if (!vocabulary.count(ma.primary_post.functor())) {
            throw ValidationError("mitigation action '" + ma.id + "': postcondition " +
                                  ma.primary_post.functor() +
                                  " is unknown to the attack-graph vocabulary");
        }
        kb.add_rule(compile_matching_rule(ma));
    }
    return kb;
}

std::vector<Match> match_node(const KnowledgeBase& matching_kb, const AgNode& node,
                              QueryOptions options) {
    std::vector<Match> out;
    if (!node.is_fact()) return out;

    Atom goal;
    goal.predicate = node.atom.predicate;
    goal.args.push_back(Term::variable("MAID"));
    for (const Term& t : node.atom.args) goal.args.push_back(t);
    if (!matching_kb.has_predicate(goal.functor())) return out;

    Solver solver(matching_kb, options);
    QueryResult result = solver.query(goal);
    for (const QueryResult::Answer& answer : result.answers()) {
        std::string ma_id = answer.atom.args[0].text;
        for (ProofTrace& trace : result.proofs(answer.atom)) {
            out.push_back(Match{ma_id, std::move(trace)});
        }
    }
    std::sort(out.begin(), out.end(), [](const Match& a, const Match& b) {
        if (a.ma_id != b.ma_id) return a.ma_id < b.ma_id;
        return trace_key(a.trace) < trace_key(b.trace);
    });
    return out;
}

MatchResult match_graph(const KnowledgeBase& matching_kb, const AttackGraph& graph,
                        QueryOptions options) {
    MatchResult result;
    for (const AgNode& node : graph.nodes()) {
        if (!node.is_fact()) continue;
        std::vector<Match> matches = match_node(matching_kb, node, options);
        if (!matches.empty()) result[node.id] = std::move(matches);
    }
    return result;
}

Position extract_position(const MitigationAction& ma, const ProofTrace& trace) {
    const PositionSpec& spec = ma.position;
    Atom target;
    if (spec.source == PositionSpec::Source::Postcondition) {
        // The trace root carries the MAID as an extra first argument.
        target = trace.root;
        target.args.erase(target.args.begin());
    } else {
        // Locate the occurrence among the authored preconditions, then read
        // the corresponding positive child or instantiated negated atom.
        int seen = 0;
        int positive_index = 0, negated_index = 0;
        bool found = false, negated = false;
        for (const auto& [atom, neg] : ma.preconditions) {
            if (atom.predicate == spec.predicate && seen++ == spec.occurrence) {
                found = true;
                negated = neg;
                break;
            }
            (neg ? negated_index : positive_index) += 1;
        }
        if (!found) {
            throw ValidationError("mitigation action '" + ma.id + "': trace has no " +
                                  spec.predicate + " occurrence " +
                                  std::to_string(spec.occurrence));
        }
        if (negated) {
            if (negated_index >= static_cast<int>(trace.negated.size())) {
                throw ValidationError("mitigation action '" + ma.id +
                                      "': negated precondition missing from trace");
            }
            target = trace.negated[static_cast<size_t>(negated_index)];
        } else {
            if (positive_index >= static_cast<int>(trace.children.size())) {
                throw ValidationError("mitigation action '" + ma.id +
                                      "': precondition missing from trace");
            }
            target = trace.children[static_cast<size_t>(positive_index)].root;
        }
    }

    auto arg_text = [&](int index) {
        const Term& t = target.args[static_cast<size_t>(index)];
        if (!t.is_constant()) {
            throw ValidationError("mitigation action '" + ma.id + "': position argument " +
                                  std::to_string(index) + " of " + target.to_string() +
                                  " is not ground");
        }
        return t.text;
    };

    Position position;
    position.parts.push_back(arg_text(spec.arg_index));
    if (spec.kind == PositionSpec::Kind::InterSubnet) {
        position.parts.push_back(arg_text(spec.arg_index + 1));
    }
    return position;
}

ResolvedDeployment resolve_countermeasures(const AttackGraph& graph, const MatchResult& matches,
                                           const std::vector<MitigationAction>& catalog,
                                           const std::vector<Countermeasure>& repo,
                                           const std::vector<Atom>& policy, double budget) {
    std::map<std::string, const MitigationAction*> ma_by_id;
    for (const MitigationAction& ma : catalog) ma_by_id[ma.id] = &ma;
    std::map<std::string, std::vector<const Countermeasure*>> cms_by_ma;
    for (const Countermeasure& cm : repo) {
        for (const std::string& ma : cm.ma_ids) cms_by_ma[ma].push_back(&cm);
    }

    ResolvedDeployment out;
    std::set<DeployedCm> pool;
    for (const auto& [node_id, node_matches] : matches) {
        const Atom& label = graph.node(node_id).atom;
        bool denied = std::any_of(policy.begin(), policy.end(), [&](const Atom& pattern) {
            return matches_pattern(pattern, label);
        });
        if (denied) continue;
        for (const Match& match : node_matches) {
            auto ma_it = ma_by_id.find(match.ma_id);
            if (ma_it == ma_by_id.end()) continue;
            auto cm_it = cms_by_ma.find(match.ma_id);
            if (cm_it == cms_by_ma.end()) continue;
            Position position = extract_position(*ma_it->second, match.trace);
            for (const Countermeasure* cm : cm_it->second) {
                if (cm->deploy_cost > budget) continue;
                DeployedCm deployed{cm->id, match.ma_id, position, cm->deploy_cost};
                pool.insert(deployed);
                out.by_node[node_id].insert(std::move(deployed));
            }
        }
    }
    out.initial.assign(pool.begin(), pool.end());
    return out;
}

}  // namespace agplan
