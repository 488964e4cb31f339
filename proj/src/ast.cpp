#include "agplan/ast.hpp"

#include <algorithm>
#include <cctype>

#include "agplan/errors.hpp"

namespace agplan {

namespace {

bool plain_identifier(const std::string& text) {
    if (text.empty()) return false;
    if (std::isdigit(static_cast<unsigned char>(text[0]))) {
        return std::all_of(text.begin(), text.end(),
                           [](unsigned char c) { return std::isdigit(c); });
    }
    if (!std::islower(static_cast<unsigned char>(text[0]))) return false;
    return std::all_of(text.begin(), text.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_';
    });
}

}  // namespace

std::string Term::to_string() const {
    if (kind == TermKind::Wildcard) return "_";
    if (kind == TermKind::Variable) return text;
    if (plain_identifier(text)) return text;
    return "'" + text + "'";
}

bool Atom::ground() const {
    return std::all_of(args.begin(), args.end(), [](const Term& t) { return t.is_constant(); });
}

std::string Atom::to_string() const {
    std::string out = predicate + "(";
    for (size_t i = 0; i < args.size(); ++i) {
        if (i) out += ", ";
        out += args[i].to_string();
    }
    out += ")";
    return out;
}

const Term* Substitution::lookup(const std::string& var) const {
    auto it = bindings.find(var);
    return it == bindings.end() ? nullptr : &it->second;
}

Term Substitution::resolve(Term term) const {
    while (term.is_variable()) {
        const Term* bound = lookup(term.text);
        if (!bound) break;
        term = *bound;
    }
    return term;
}

Atom Substitution::apply(const Atom& atom) const {
    Atom out;
    out.predicate = atom.predicate;
    out.args.reserve(atom.args.size());
    for (const Term& t : atom.args) out.args.push_back(resolve(t));
    return out;
}

std::optional<Substitution> unify_into(const Atom& a, const Atom& b, Substitution subst) {
    if (a.predicate != b.predicate || a.args.size() != b.args.size()) return std::nullopt;
    for (size_t i = 0; i < a.args.size(); ++i) {
        Term lhs = subst.resolve(a.args[i]);
        Term rhs = subst.resolve(b.args[i]);
        if (lhs.is_wildcard() || rhs.is_wildcard()) continue;
        if (lhs == rhs) continue;
        if (lhs.is_variable()) {
            subst.bindings[lhs.text] = rhs;
        } else if (rhs.is_variable()) {
            subst.bindings[rhs.text] = lhs;
        } else {
            return std::nullopt;
        }
    }
    return subst;
}

std::optional<Substitution> unify(const Atom& a, const Atom& b) {
    return unify_into(a, b, Substitution{});
}

bool matches_pattern(const Atom& pattern, const Atom& ground_atom) {
    if (pattern.predicate != ground_atom.predicate ||
        pattern.args.size() != ground_atom.args.size()) {
        return false;
    }
    // A repeated variable in a pattern must match equal arguments.
    Substitution subst;
    for (size_t i = 0; i < pattern.args.size(); ++i) {
        const Term& p = pattern.args[i];
        if (p.is_wildcard()) continue;
        if (p.is_constant()) {
            if (p != ground_atom.args[i]) return false;
            continue;
        }
        Term bound = subst.resolve(p);
        if (bound.is_variable()) {
            subst.bindings[bound.text] = ground_atom.args[i];
        } else if (bound != ground_atom.args[i]) {
            return false;
        }
    }
    return true;
}

void KnowledgeBase::add_rule(HornRule rule) {
    if (by_id_.count(rule.id)) {
        throw ValidationError("duplicate rule id '" + rule.id + "'");
    }
    int index = static_cast<int>(rules_.size());
    by_id_[rule.id] = index;
    index_[rule.head.functor()].push_back(index);
    rules_.push_back(std::move(rule));
}

const std::vector<int>& KnowledgeBase::candidates(const std::string& functor) const {
    static const std::vector<int> kEmpty;
    auto it = index_.find(functor);
    return it == index_.end() ? kEmpty : it->second;
}

int KnowledgeBase::rule_index(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? -1 : it->second;
}

std::vector<const HornRule*> KnowledgeBase::facts() const {
    std::vector<const HornRule*> out;
    for (const HornRule& r : rules_) {
        if (r.is_fact()) out.push_back(&r);
    }
    return out;
}

bool KnowledgeBase::has_predicate(const std::string& functor) const {
    return index_.count(functor) > 0;
}

KnowledgeBase KnowledgeBase::facts_only() const {
    KnowledgeBase out;
    for (const HornRule& r : rules_) {
        if (r.is_fact()) out.add_rule(r);
    }
    return out;
}

KnowledgeBase KnowledgeBase::without_facts(const std::vector<Atom>& cancelled) const {
    KnowledgeBase out;
    for (const HornRule& r : rules_) {
        if (r.is_fact()) {
            bool dropped = std::any_of(cancelled.begin(), cancelled.end(),
                                       [&](const Atom& a) { return a == r.head; });
            if (dropped) continue;
        }
        out.add_rule(r);
    }
    return out;
}

}  // namespace agplan
