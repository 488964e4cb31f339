#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace agplan {

enum class TermKind { Constant, Variable, Wildcard };

/// A flat first-order term: a constant, a variable (upper-case initial) or
/// the anonymous wildcard "_". There are no function symbols.
struct Term {
    TermKind kind = TermKind::Constant;
    std::string text;

    static Term constant(std::string text) { return {TermKind::Constant, std::move(text)}; }
    static Term variable(std::string text) { return {TermKind::Variable, std::move(text)}; }
    static Term wildcard() { return {TermKind::Wildcard, "_"}; }

    bool is_constant() const { return kind == TermKind::Constant; }
    bool is_variable() const { return kind == TermKind::Variable; }
    bool is_wildcard() const { return kind == TermKind::Wildcard; }

    /// Canonical rendering; constants are quoted when they do not lex as a
    /// plain identifier (e.g. 'CVE-2019-2510').
    std::string to_string() const;

    bool operator==(const Term& other) const { return kind == other.kind && text == other.text; }
    bool operator!=(const Term& other) const { return !(*this == other); }
};

/// p(t1, ..., tk)
struct Atom {
    std::string predicate;
    std::vector<Term> args;

    int arity() const { return static_cast<int>(args.size()); }
    bool ground() const;
    std::string to_string() const;
    /// "pred/arity", the predicate identity used for rule indexing.
    std::string functor() const { return predicate + "/" + std::to_string(args.size()); }

    bool operator==(const Atom& other) const {
        return predicate == other.predicate && args == other.args;
    }
    bool operator!=(const Atom& other) const { return !(*this == other); }
    bool operator<(const Atom& other) const { return to_string() < other.to_string(); }
};

/// Horn clause head :- body, !negated. A fact has an empty body.
struct HornRule {
    std::string id;
    std::string label;
    Atom head;
    std::vector<Atom> body;
    std::vector<Atom> negated_body;

    bool is_fact() const { return body.empty() && negated_body.empty(); }
};

/// Variable name -> term. Ground answers bind every variable to a constant.
struct Substitution {
    std::map<std::string, Term> bindings;

    const Term* lookup(const std::string& var) const;
    /// Resolves a term through the binding chain; unbound variables and
    /// wildcards are returned unchanged.
    Term resolve(Term term) const;
    Atom apply(const Atom& atom) const;

    bool operator==(const Substitution& other) const { return bindings == other.bindings; }
};

/// Most general unifier of two atoms, or nullopt when none exists.
/// Wildcards match anything and bind nothing.
std::optional<Substitution> unify(const Atom& a, const Atom& b);

/// Extends `base` so that `a` and `b` unify under it; nullopt on clash.
std::optional<Substitution> unify_into(const Atom& a, const Atom& b, Substitution base);

/// One-sided pattern match: variables and wildcards in `pattern` match any
/// term, constants must be equal. Used by policy deny-lists.
bool matches_pattern(const Atom& pattern, const Atom& ground_atom);

/// The rule database. Rules are indexed by head functor; several arities may
/// share a predicate name (matching rules prepend a MAID argument).
class KnowledgeBase {
public:
    void add_rule(HornRule rule);

    const std::vector<HornRule>& rules() const { return rules_; }
    const HornRule& rule(int index) const { return rules_[static_cast<size_t>(index)]; }
    /// Indices of rules whose head functor matches, in source order.
    const std::vector<int>& candidates(const std::string& functor) const;
    int rule_index(const std::string& id) const;

    /// All facts (rules with empty body), in source order.
    std::vector<const HornRule*> facts() const;
    bool has_predicate(const std::string& functor) const;

    /// New knowledge base holding only the facts of this one.
    KnowledgeBase facts_only() const;
    /// Copy without the facts whose head is listed (used by the
    /// regeneration oracle).
    KnowledgeBase without_facts(const std::vector<Atom>& cancelled) const;

private:
    std::vector<HornRule> rules_;
    std::map<std::string, std::vector<int>> index_;
    std::map<std::string, int> by_id_;
};

}  // namespace agplan
