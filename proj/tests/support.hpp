#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "agplan/ast.hpp"
#include "agplan/parser.hpp"

namespace agplan::testing {

inline std::string fixture(const std::string& relative) {
    return std::string(AGPLAN_FIXTURE_DIR) + "/" + relative;
}

/// Naive bottom-up fixpoint over the positive fragment: grounds every rule
/// against the current fact set until nothing new derives. Independent of
/// the tabled engine; the completeness oracle for acyclic and recursive
/// programs alike.
inline std::set<std::string> naive_fixpoint(const KnowledgeBase& kb) {
    std::vector<Atom> facts;
    std::set<std::string> seen;
    for (const HornRule& r : kb.rules()) {
        if (!r.is_fact()) continue;
        if (seen.insert(r.head.to_string()).second) facts.push_back(r.head);
    }

    bool changed = true;
    while (changed) {
        changed = false;
        for (const HornRule& r : kb.rules()) {
            if (r.is_fact() || !r.negated_body.empty()) continue;
            // Join body atoms left to right against the known facts.
            std::vector<Substitution> frontier{Substitution{}};
            for (const Atom& b : r.body) {
                std::vector<Substitution> next;
                for (const Substitution& theta : frontier) {
                    Atom pattern = theta.apply(b);
                    for (const Atom& fact : facts) {
                        if (auto extended = unify_into(pattern, fact, theta)) {
                            next.push_back(std::move(*extended));
                        }
                    }
                }
                frontier = std::move(next);
                if (frontier.empty()) break;
            }
            for (const Substitution& theta : frontier) {
                Atom instance = theta.apply(r.head);
                if (instance.ground() && seen.insert(instance.to_string()).second) {
                    facts.push_back(instance);
                    changed = true;
                }
            }
        }
    }
    return seen;
}

inline std::set<std::string> naive_answers(const KnowledgeBase& kb, const Atom& goal) {
    std::set<std::string> out;
    for (const std::string& text : naive_fixpoint(kb)) {
        Atom atom = parse_atom(text);
        if (unify(goal, atom)) out.insert(text);
    }
    return out;
}

}  // namespace agplan::testing
