#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "agplan/ast.hpp"

namespace agplan {

/// One successful rule application: the ground body and the instantiated
/// negated atoms (retained for countermeasure position extraction).
/// Facts appear as derivations with an empty body.
struct Derivation {
    std::string rule_id;
    std::vector<Atom> body;
    std::vector<Atom> negated;
};

/// A concrete proof tree. Children correspond to the positive body atoms of
/// the root's rule, in body order; leaves are facts.
struct ProofTrace {
    Atom root;
    std::string rule_id;
    std::vector<ProofTrace> children;
    std::vector<Atom> negated;
};

struct QueryOptions {
    /// Hard cap on alternative derivations per atom and proof trees per
    /// answer; exceeding it raises LogicError.
    int max_proofs_per_atom = 64;
};

/// Result of evaluating one or more goals: the derivable-atom fixpoint
/// restricted to what the goals touched, with all alternative derivations
/// per atom. Deterministic: answers sorted lexicographically, derivations
/// by (rule source order, body text).
class QueryResult {
public:
    struct Answer {
        Atom atom;
        Substitution substitution;  // goal variables -> constants
    };

    /// Ground answers for the goal at `goal_index`, sorted.
    const std::vector<Answer>& answers(size_t goal_index = 0) const {
        return answers_[goal_index];
    }
    size_t goal_count() const { return answers_.size(); }

    const std::vector<Derivation>& derivations(const Atom& atom) const;
    bool derivable(const Atom& atom) const { return derivations_.count(atom.to_string()) > 0; }

    /// All minimal proof trees for an answer atom (no atom repeats on a
    /// root-to-leaf path). Count capped by QueryOptions.
    std::vector<ProofTrace> proofs(const Atom& atom) const;

    /// Stable serialization of answers and derivations, used by the
    /// determinism tests.
    std::string to_string() const;

private:
    friend class Solver;
    std::vector<std::vector<Answer>> answers_;
    std::map<std::string, std::vector<Derivation>> derivations_;
    int max_proofs_ = 64;
};

/// Tabled all-answers evaluation of the Datalog subset with stratified
/// negation-as-failure. Knowledge bases are immutable, so queries are
/// reentrant; each query call owns its own tables.
class Solver {
public:
    explicit Solver(const KnowledgeBase& kb, QueryOptions options = {});

    QueryResult query(const Atom& goal) const { return query_all({goal}); }
    QueryResult query_all(const std::vector<Atom>& goals) const;

private:
    const KnowledgeBase& kb_;
    QueryOptions options_;
};

}  // namespace agplan
