#include "agplan/risk_model.hpp"

#include <algorithm>
#include <cstdio>

#include "agplan/errors.hpp"

namespace agplan {

namespace {

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// Algorithm-1 style processing order with deterministic cycle breaking:
// when nothing is processable, take the lowest-id unprocessed derived-fact
// node that has more than one in-edge and at least one processed
// in-neighbor, and delete the edges from its unprocessed derivation
// parents.
struct ProcessPlan {
    std::vector<int> order;
    std::vector<std::pair<int, int>> removed_edges;
    std::vector<std::vector<int>> live_in;  // per node (0-based), post-removal in-neighbors
};

ProcessPlan plan_processing(const AttackGraph& graph) {
    size_t n = graph.nodes().size();
    ProcessPlan plan;
    plan.live_in.resize(n);
    for (size_t i = 0; i < n; ++i) plan.live_in[i] = graph.in_neighbors(static_cast<int>(i) + 1);

    std::vector<bool> processed(n + 1, false);
    size_t done = 0;
    long guard = static_cast<long>(n + graph.edges().size() + 2) * 4 + 16;
    while (done < n) {
        if (--guard < 0) throw LogicError("equation worklist exceeded its iteration bound");
        bool progress = false;
        for (size_t i = 0; i < n; ++i) {
            int id = static_cast<int>(i) + 1;
            if (processed[static_cast<size_t>(id)]) continue;
            const auto& in = plan.live_in[i];
            bool ready = std::all_of(in.begin(), in.end(),
                                     [&](int p) { return processed[static_cast<size_t>(p)]; });
            if (!ready) continue;
            processed[static_cast<size_t>(id)] = true;
            plan.order.push_back(id);
            ++done;
            progress = true;
        }
        if (progress || done == n) continue;

        // Stuck: break one cycle.
        bool removed = false;
        for (size_t i = 0; i < n && !removed; ++i) {
            int id = static_cast<int>(i) + 1;
            if (processed[static_cast<size_t>(id)]) continue;
            if (graph.node(id).kind != NodeKind::DerivedFact) continue;
            auto& in = plan.live_in[i];
            if (in.size() <= 1) continue;
            bool any_processed = std::any_of(in.begin(), in.end(), [&](int p) {
                return processed[static_cast<size_t>(p)];
            });
            if (!any_processed) continue;
            std::vector<int> kept;
            for (int p : in) {
                if (processed[static_cast<size_t>(p)]) {
                    kept.push_back(p);
                } else {
                    plan.removed_edges.emplace_back(p, id);
                    removed = true;
                }
            }
            in = std::move(kept);
        }
        if (!removed) {
            throw LogicError("attack graph cannot be processed: no cycle-removal candidate");
        }
    }
    return plan;
}

}  // namespace

double leaf_probability(const AgNode& node) {
    if (node.kind != NodeKind::PrimitiveFact) {
        throw ValidationError("leaf probability requested for non-leaf node " +
                              std::to_string(node.id));
    }
    return node.vuln ? cvss_probability(*node.vuln) : 1.0;
}

std::vector<std::pair<int, int>> remove_cycles(const AttackGraph& graph) {
    return plan_processing(graph).removed_edges;
}

int RiskModel::variable_index(const DeployedCm& cm) const {
    auto it = variable_index_.find(cm.key());
    return it == variable_index_.end() ? -1 : it->second;
}

double RiskModel::evaluate(const std::set<DeployedCm>& deployed) const {
    uint64_t mask = 0;
    for (const DeployedCm& cm : deployed) {
        int index = variable_index(cm);
        if (index < 0) throw LogicError("unknown countermeasure variable " + cm.key());
        mask |= uint64_t{1} << index;
    }
    return evaluate_mask(mask);
}

double RiskModel::evaluate_mask(uint64_t deployed_mask) const {
    std::vector<double> value(exprs_.size());
    for (size_t i = 0; i < exprs_.size(); ++i) {
        const ExprNode& e = exprs_[i];
        switch (e.op) {
            case Op::Constant:
                value[i] = e.value;
                break;
            case Op::Var:
                value[i] = (deployed_mask >> e.var) & 1 ? 0.0 : 1.0;
                break;
            case Op::Product: {
                double v = 1.0;
                for (int c : e.children) v *= value[static_cast<size_t>(c)];
                value[i] = v;
                break;
            }
            case Op::OrCombine: {
                double complement = 1.0;
                for (int c : e.children) complement *= 1.0 - value[static_cast<size_t>(c)];
                value[i] = 1.0 - complement;
                break;
            }
            case Op::Sum: {
                double v = 0.0;
                for (int c : e.children) v += value[static_cast<size_t>(c)];
                value[i] = v;
                break;
            }
        }
    }
    return goal_expr_ < 0 ? 0.0 : value[static_cast<size_t>(goal_expr_)];
}

double RiskModel::delta_risk(const std::set<DeployedCm>& plan, const DeployedCm& cm) const {
    if (!plan.count(cm)) throw LogicError("delta_risk: countermeasure not in plan");
    std::set<DeployedCm> reduced = plan;
    reduced.erase(cm);
    return evaluate(reduced) - evaluate(plan);
}

std::string RiskModel::render(int expr) const {
    const ExprNode& e = exprs_[static_cast<size_t>(expr)];
    switch (e.op) {
        case Op::Constant:
            return format_value(e.value);
        case Op::Var:
            return variables_[static_cast<size_t>(e.var)].var_name();
        case Op::Product: {
            double constant = 1.0;
            bool saw_constant = false;
            std::vector<std::string> vars, composite;
            // Flatten nested products; or-combines stay opaque.
            std::vector<int> stack{expr};
            while (!stack.empty()) {
                int id = stack.back();
                stack.pop_back();
                const ExprNode& node = exprs_[static_cast<size_t>(id)];
                if (id != expr && node.op != Op::Product) {
                    if (node.op == Op::Constant) {
                        constant *= node.value;
                        saw_constant = true;
                    } else if (node.op == Op::Var) {
                        vars.push_back(variables_[static_cast<size_t>(node.var)].var_name());
                    } else {
                        composite.push_back(render(id));
                    }
                    continue;
                }
                for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) {
                    stack.push_back(*it);
                }
            }
            std::sort(vars.begin(), vars.end());
            std::sort(composite.begin(), composite.end());
            std::vector<std::string> parts;
            if (saw_constant || (vars.empty() && composite.empty())) {
                parts.push_back(format_value(constant));
            }
            parts.insert(parts.end(), vars.begin(), vars.end());
            parts.insert(parts.end(), composite.begin(), composite.end());
            std::string out;
            for (size_t i = 0; i < parts.size(); ++i) {
                if (i) out += "*";
                out += parts[i];
            }
            return out;
        }
        case Op::OrCombine:
        case Op::Sum: {
            std::vector<std::string> parts;
            parts.reserve(e.children.size());
            for (int c : e.children) parts.push_back(render(c));
            std::sort(parts.begin(), parts.end());
            std::string out = e.op == Op::OrCombine ? "or(" : "sum(";
            for (size_t i = 0; i < parts.size(); ++i) {
                if (i) out += ", ";
                out += parts[i];
            }
            return out + ")";
        }
    }
    return "?";
}

std::string RiskModel::dump() const { return render(goal_expr_); }

std::string RiskModel::dump_node(int graph_node_id) const {
    return render(node_expr_.at(graph_node_id));
}

RiskModel build_risk_model(const AttackGraph& graph, const ResolvedDeployment& resolved,
                           GoalAggregate aggregate) {
    RiskModel model;
    model.variables_ = resolved.initial;
    for (size_t i = 0; i < model.variables_.size(); ++i) {
        model.variable_index_[model.variables_[i].key()] = static_cast<int>(i);
    }
    if (model.variables_.size() > 64) {
        throw ValidationError("more than 64 countermeasure variables are not supported");
    }

    ProcessPlan plan = plan_processing(graph);
    model.removed_edges_ = plan.removed_edges;

    auto add = [&](RiskModel::ExprNode node) {
        model.exprs_.push_back(std::move(node));
        return static_cast<int>(model.exprs_.size()) - 1;
    };
    auto make_const = [&](double v) {
        return add({RiskModel::Op::Constant, v, -1, {}});
    };
    std::map<int, int> var_exprs;
    auto make_var = [&](int var_index) {
        auto it = var_exprs.find(var_index);
        if (it != var_exprs.end()) return it->second;
        int id = add({RiskModel::Op::Var, 0.0, var_index, {}});
        var_exprs[var_index] = id;
        return id;
    };
    auto make_product = [&](std::vector<int> children) {
        if (children.empty()) return make_const(1.0);
        if (children.size() == 1) return children[0];
        return add({RiskModel::Op::Product, 0.0, -1, std::move(children)});
    };
    auto make_or = [&](std::vector<int> children) {
        if (children.empty()) return make_const(0.0);
        if (children.size() == 1) return children[0];
        return add({RiskModel::Op::OrCombine, 0.0, -1, std::move(children)});
    };
    auto node_vars = [&](int node_id) {
        std::vector<int> out;
        auto it = resolved.by_node.find(node_id);
        if (it == resolved.by_node.end()) return out;
        for (const DeployedCm& cm : it->second) out.push_back(make_var(model.variable_index(cm)));
        return out;
    };

    for (int id : plan.order) {
        const AgNode& node = graph.node(id);
        int expr = -1;
        switch (node.kind) {
            case NodeKind::PrimitiveFact: {
                std::vector<int> children = node_vars(id);
                double p = leaf_probability(node);
                if (children.empty() || p != 1.0) children.push_back(make_const(p));
                expr = make_product(std::move(children));
                break;
            }
            case NodeKind::Derivation: {
                std::vector<int> children;
                for (int in : plan.live_in[static_cast<size_t>(id - 1)]) {
                    children.push_back(model.node_expr_.at(in));
                }
                expr = make_product(std::move(children));
                break;
            }
            case NodeKind::DerivedFact: {
                std::vector<int> branches;
                for (int in : plan.live_in[static_cast<size_t>(id - 1)]) {
                    branches.push_back(model.node_expr_.at(in));
                }
                std::vector<int> children = node_vars(id);
                children.push_back(make_or(std::move(branches)));
                expr = make_product(std::move(children));
                break;
            }
        }
        model.node_expr_[id] = expr;
    }

    std::vector<int> goal_exprs;
    for (int goal : graph.goals()) goal_exprs.push_back(model.node_expr_.at(goal));
    if (aggregate == GoalAggregate::OrCombine) {
        model.goal_expr_ = make_or(std::move(goal_exprs));
    } else if (goal_exprs.size() == 1) {
        model.goal_expr_ = goal_exprs[0];
    } else {
        model.goal_expr_ = add({RiskModel::Op::Sum, 0.0, -1, std::move(goal_exprs)});
    }
    return model;
}

double rebuild_oracle(const PipelineContext& context, const AttackGraph& original,
                      const ResolvedDeployment& resolved, const std::set<DeployedCm>& deployed) {
    // Facts cancelled by the deployment: primitive node labels are deleted
    // from the knowledge base, derived node labels are suppressed from the
    // regenerated graph.
    std::vector<Atom> cancelled;
    std::set<std::string> suppressed;
    for (const auto& [node_id, cms] : resolved.by_node) {
        bool hit = std::any_of(cms.begin(), cms.end(),
                               [&](const DeployedCm& cm) { return deployed.count(cm) > 0; });
        if (!hit) continue;
        const AgNode& node = original.node(node_id);
        if (node.kind == NodeKind::PrimitiveFact) {
            cancelled.push_back(node.atom);
        } else {
            suppressed.insert(node.atom.to_string());
        }
    }

    KnowledgeBase reduced = context.kb->without_facts(cancelled);
    auto rebuilt = build_attack_graph_partial(reduced, context.goals, context.options);
    if (!rebuilt) return 0.0;

    // Drop suppressed derived facts, then anything no longer supported or
    // no longer on a path to a surviving goal.
    const AttackGraph& g = *rebuilt;
    size_t n = g.nodes().size();
    std::vector<bool> dead(n + 1, false);
    for (const AgNode& node : g.nodes()) {
        if (node.kind == NodeKind::DerivedFact && suppressed.count(node.atom.to_string())) {
            dead[static_cast<size_t>(node.id)] = true;
        }
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (const AgNode& node : g.nodes()) {
            size_t id = static_cast<size_t>(node.id);
            if (dead[id]) continue;
            if (node.kind == NodeKind::Derivation) {
                bool broken = dead[static_cast<size_t>(g.out_neighbors(node.id)[0])] ||
                              std::any_of(g.in_neighbors(node.id).begin(),
                                          g.in_neighbors(node.id).end(), [&](int in) {
                                              return dead[static_cast<size_t>(in)];
                                          });
                if (broken) {
                    dead[id] = true;
                    changed = true;
                }
            } else if (node.kind == NodeKind::DerivedFact) {
                const auto& in = g.in_neighbors(node.id);
                bool unsupported = std::all_of(in.begin(), in.end(), [&](int d) {
                    return dead[static_cast<size_t>(d)];
                });
                if (unsupported) {
                    dead[id] = true;
                    changed = true;
                }
            }
        }
    }

    std::vector<int> live_goals;
    for (int goal : g.goals()) {
        if (!dead[static_cast<size_t>(goal)]) live_goals.push_back(goal);
    }
    if (live_goals.empty()) return 0.0;

    // Backward reachability from the surviving goals.
    std::vector<bool> keep(n + 1, false);
    std::vector<int> stack = live_goals;
    while (!stack.empty()) {
        int id = stack.back();
        stack.pop_back();
        if (keep[static_cast<size_t>(id)]) continue;
        keep[static_cast<size_t>(id)] = true;
        for (int in : g.in_neighbors(id)) {
            if (!dead[static_cast<size_t>(in)]) stack.push_back(in);
        }
    }

    std::vector<int> renumber(n + 1, 0);
    std::vector<AgNode> nodes;
    for (const AgNode& node : g.nodes()) {
        if (!keep[static_cast<size_t>(node.id)]) continue;
        AgNode copy = node;
        copy.id = static_cast<int>(nodes.size()) + 1;
        renumber[static_cast<size_t>(node.id)] = copy.id;
        nodes.push_back(std::move(copy));
    }
    std::vector<std::pair<int, int>> edges;
    for (const auto& [from, to] : g.edges()) {
        if (renumber[static_cast<size_t>(from)] && renumber[static_cast<size_t>(to)]) {
            edges.emplace_back(renumber[static_cast<size_t>(from)],
                               renumber[static_cast<size_t>(to)]);
        }
    }
    std::vector<int> goals;
    for (int goal : live_goals) goals.push_back(renumber[static_cast<size_t>(goal)]);
    AttackGraph pruned(std::move(nodes), std::move(edges), std::move(goals));

    KnowledgeBase matching_kb = make_matching_kb(reduced, *context.catalog);
    MatchResult matches = match_graph(matching_kb, pruned, context.options);
    ResolvedDeployment fresh = resolve_countermeasures(pruned, matches, *context.catalog,
                                                       *context.repo, context.policy,
                                                       context.budget);
    RiskModel model = build_risk_model(pruned, fresh);
    return model.evaluate({});
}

}  // namespace agplan
