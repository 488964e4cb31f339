#include "agplan/solver.hpp"

#include <algorithm>
#include <sstream>

#include "agplan/errors.hpp"

namespace agplan {

namespace {

// ---------------------------------------------------------------------------
// Stratification
// ---------------------------------------------------------------------------

// Dependency check over head functors: a negative edge inside a strongly
// connected component means the program is not stratified.
void check_stratified(const KnowledgeBase& kb) {
    std::map<std::string, int> ids;
    auto id_of = [&](const std::string& f) {
        auto it = ids.find(f);
        if (it != ids.end()) return it->second;
        int id = static_cast<int>(ids.size());
        ids[f] = id;
        return id;
    };
    struct Edge {
        int from, to;
        bool negative;
    };
    std::vector<Edge> edges;
    for (const HornRule& r : kb.rules()) {
        int head = id_of(r.head.functor());
        for (const Atom& a : r.body) edges.push_back({head, id_of(a.functor()), false});
        for (const Atom& a : r.negated_body) edges.push_back({head, id_of(a.functor()), true});
    }
    int n = static_cast<int>(ids.size());
    std::vector<std::vector<int>> adj(n);
    for (const Edge& e : edges) adj[e.from].push_back(e.to);

    // Iterative Tarjan SCC.
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<bool> on_stack(n, false);
    std::vector<int> stack;
    int next_index = 0, next_comp = 0;
    struct Frame {
        int v;
        size_t child;
    };
    for (int start = 0; start < n; ++start) {
        if (index[start] != -1) continue;
        std::vector<Frame> frames{{start, 0}};
        index[start] = low[start] = next_index++;
        stack.push_back(start);
        on_stack[start] = true;
        while (!frames.empty()) {
            Frame& f = frames.back();
            if (f.child < adj[f.v].size()) {
                int w = adj[f.v][f.child++];
                if (index[w] == -1) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                if (low[f.v] == index[f.v]) {
                    for (;;) {
                        int w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if (w == f.v) break;
                    }
                    ++next_comp;
                }
                int v = f.v;
                frames.pop_back();
                if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
            }
        }
    }
    for (const Edge& e : edges) {
        if (e.negative && comp[e.from] == comp[e.to]) {
            throw LogicError("non-stratified negation detected");
        }
    }
}

// ---------------------------------------------------------------------------
// Tabled evaluation
// ---------------------------------------------------------------------------

Atom rename_apart(const Atom& atom, int generation) {
    Atom out;
    out.predicate = atom.predicate;
    out.args.reserve(atom.args.size());
    for (const Term& t : atom.args) {
        if (t.is_variable()) {
            out.args.push_back(Term::variable("@" + std::to_string(generation) + "_" + t.text));
        } else {
            out.args.push_back(t);
        }
    }
    return out;
}

// Variant key: variables numbered by first occurrence, wildcards distinct.
std::string call_key(const Atom& atom) {
    std::map<std::string, int> seen;
    int fresh = 0;
    std::string out = atom.predicate + "(";
    for (size_t i = 0; i < atom.args.size(); ++i) {
        if (i) out += ",";
        const Term& t = atom.args[i];
        if (t.is_constant()) {
            out += t.to_string();
        } else if (t.is_wildcard()) {
            out += "$" + std::to_string(fresh++);
        } else {
            auto it = seen.find(t.text);
            int id = it == seen.end() ? (seen[t.text] = fresh++) : it->second;
            out += "$" + std::to_string(id);
        }
    }
    return out + ")";
}

std::string derivation_key(const Derivation& d) {
    std::string out = d.rule_id;
    for (const Atom& a : d.body) out += "|" + a.to_string();
    for (const Atom& a : d.negated) out += "|!" + a.to_string();
    return out;
}

class Engine {
public:
    Engine(const KnowledgeBase& kb, const QueryOptions& options, int depth,
           std::map<std::string, bool>* naf_cache)
        : kb_(kb), options_(options), depth_(depth), naf_cache_(naf_cache) {}

    void solve(const Atom& goal) { table_for(goal); run_fixpoint(); }

    const std::vector<Atom>& answers_for(const Atom& goal) {
        return tables_[table_index_.at(call_key(goal))]->answers;
    }

    std::map<std::string, std::vector<Derivation>> take_derivations() {
        for (auto& [key, list] : derivations_) {
            if (static_cast<int>(list.size()) > options_.max_proofs_per_atom) {
                throw LogicError("proof multiplicity overflow for " + key + " (" +
                                 std::to_string(list.size()) + " derivations, limit " +
                                 std::to_string(options_.max_proofs_per_atom) + ")");
            }
            std::sort(list.begin(), list.end(), [this](const Derivation& a, const Derivation& b) {
                int ia = kb_.rule_index(a.rule_id), ib = kb_.rule_index(b.rule_id);
                if (ia != ib) return ia < ib;
                return derivation_key(a) < derivation_key(b);
            });
        }
        return std::move(derivations_);
    }

private:
    struct Table {
        Atom call;
        std::vector<Atom> answers;
        std::set<std::string> answer_keys;
    };

    Table* table_for(const Atom& call) {
        std::string key = call_key(call);
        auto it = table_index_.find(key);
        if (it != table_index_.end()) return tables_[it->second].get();
        table_index_[key] = tables_.size();
        tables_.push_back(std::make_unique<Table>(Table{call, {}, {}}));
        return tables_.back().get();
    }

    void run_fixpoint() {
        do {
            changed_ = false;
            // The table list grows while we scan it; newly created tables
            // are picked up by the same pass.
            for (size_t i = 0; i < tables_.size(); ++i) expand(*tables_[i]);
        } while (changed_);
    }

    void expand(Table& table) {
        for (int rule_index : kb_.candidates(table.call.functor())) {
            const HornRule& rule = kb_.rule(rule_index);
            Atom head = rename_apart(rule.head, ++generation_);
            int generation = generation_;
            auto theta = unify_into(table.call, head, Substitution{});
            if (!theta) continue;
            if (rule.is_fact()) {
                record(table, rule, *theta, head, {}, {});
                continue;
            }
            std::vector<Atom> body_insts(rule.body.size());
            join(table, rule, generation, 0, *theta, head, body_insts);
        }
    }

    void join(Table& table, const HornRule& rule, int generation, size_t i, Substitution theta,
              const Atom& head, std::vector<Atom>& body_insts) {
        if (i == rule.body.size()) {
            std::vector<Atom> negated_insts;
            for (const Atom& neg : rule.negated_body) {
                Atom inst = theta.apply(rename_apart(neg, generation));
                if (!naf_holds(inst)) return;
                negated_insts.push_back(std::move(inst));
            }
            record(table, rule, theta, head, body_insts, negated_insts);
            return;
        }
        Atom call = theta.apply(rename_apart(rule.body[i], generation));
        Table* sub = table_for(call);
        // Iterate by index: the answer vector may grow during this pass and
        // additions are caught on the next fixpoint round.
        size_t count = sub->answers.size();
        for (size_t k = 0; k < count; ++k) {
            Atom answer = sub->answers[k];
            auto extended = unify_into(call, answer, theta);
            if (!extended) continue;
            body_insts[i] = answer;
            join(table, rule, generation, i + 1, std::move(*extended), head, body_insts);
        }
    }

    // Renames any variables left unbound (possible for matching rules,
    // which are not range-restricted) to canonical names so that answers
    // and derivations deduplicate across fixpoint passes.
    static void canonicalize_free(std::vector<Atom*> atoms) {
        std::map<std::string, std::string> renames;
        for (Atom* atom : atoms) {
            for (Term& t : atom->args) {
                if (!t.is_variable()) continue;
                auto it = renames.find(t.text);
                if (it == renames.end()) {
                    it = renames.emplace(t.text, "V" + std::to_string(renames.size())).first;
                }
                t.text = it->second;
            }
        }
    }

    void record(Table& table, const HornRule& rule, const Substitution& theta, const Atom& head,
                const std::vector<Atom>& body_insts, const std::vector<Atom>& negated_insts) {
        Atom instance = theta.apply(head);
        std::vector<Atom> body;
        body.reserve(body_insts.size());
        for (const Atom& b : body_insts) body.push_back(theta.apply(b));
        std::vector<Atom> negated = negated_insts;
        {
            std::vector<Atom*> all{&instance};
            for (Atom& b : body) all.push_back(&b);
            for (Atom& n : negated) all.push_back(&n);
            canonicalize_free(all);
        }
        std::string key = instance.to_string();
        if (!table.answer_keys.count(key)) {
            table.answer_keys.insert(key);
            table.answers.push_back(instance);
            changed_ = true;
        }
        Derivation derivation{rule.id, std::move(body), std::move(negated)};
        std::string dkey = derivation_key(derivation);
        auto& known = derivation_keys_[key];
        if (!known.count(dkey)) {
            known.insert(dkey);
            derivations_[key].push_back(std::move(derivation));
            changed_ = true;
        }
    }

    // Negation as failure, evaluated to completion by an independent engine.
    // Stratification guarantees the sub-query never depends on the callers'
    // in-progress tables.
    bool naf_holds(const Atom& atom) {
        std::string key = call_key(atom);
        auto it = naf_cache_->find(key);
        if (it != naf_cache_->end()) return it->second;
        if (depth_ > 64) throw LogicError("negation nesting too deep");
        Engine sub(kb_, options_, depth_ + 1, naf_cache_);
        sub.solve(atom);
        bool holds = sub.answers_for(atom).empty();
        (*naf_cache_)[key] = holds;
        return holds;
    }

    const KnowledgeBase& kb_;
    const QueryOptions& options_;
    int depth_;
    std::map<std::string, bool>* naf_cache_;
    std::vector<std::unique_ptr<Table>> tables_;
    std::map<std::string, size_t> table_index_;
    std::map<std::string, std::vector<Derivation>> derivations_;
    std::map<std::string, std::set<std::string>> derivation_keys_;
    bool changed_ = false;
    int generation_ = 0;
};

void build_proofs(const QueryResult& result, const Atom& atom, std::set<std::string>& path,
                  std::vector<ProofTrace>& out, int limit) {
    std::string key = atom.to_string();
    path.insert(key);
    for (const Derivation& d : result.derivations(atom)) {
        bool circular = std::any_of(d.body.begin(), d.body.end(), [&](const Atom& b) {
            return path.count(b.to_string()) > 0;
        });
        if (circular) continue;
        // Cartesian product of the children's proof lists.
        std::vector<std::vector<ProofTrace>> child_proofs(d.body.size());
        bool dead = false;
        for (size_t i = 0; i < d.body.size() && !dead; ++i) {
            build_proofs(result, d.body[i], path, child_proofs[i], limit);
            dead = child_proofs[i].empty();
        }
        if (dead) continue;
        std::vector<size_t> pick(d.body.size(), 0);
        for (;;) {
            ProofTrace trace{atom, d.rule_id, {}, d.negated};
            for (size_t i = 0; i < d.body.size(); ++i) {
                trace.children.push_back(child_proofs[i][pick[i]]);
            }
            out.push_back(std::move(trace));
            if (static_cast<int>(out.size()) > limit) {
                throw LogicError("proof multiplicity overflow while materializing traces for " +
                                 key);
            }
            size_t j = 0;
            for (; j < pick.size(); ++j) {
                if (++pick[j] < child_proofs[j].size()) break;
                pick[j] = 0;
            }
            if (j == pick.size()) break;
            if (pick.empty()) break;
        }
    }
    path.erase(key);
}

}  // namespace

const std::vector<Derivation>& QueryResult::derivations(const Atom& atom) const {
    static const std::vector<Derivation> kEmpty;
    auto it = derivations_.find(atom.to_string());
    return it == derivations_.end() ? kEmpty : it->second;
}

std::vector<ProofTrace> QueryResult::proofs(const Atom& atom) const {
    std::vector<ProofTrace> out;
    std::set<std::string> path;
    build_proofs(*this, atom, path, out, max_proofs_);
    return out;
}

std::string QueryResult::to_string() const {
    std::ostringstream out;
    for (size_t g = 0; g < answers_.size(); ++g) {
        out << "goal " << g << ":\n";
        for (const Answer& a : answers_[g]) out << "  " << a.atom.to_string() << "\n";
    }
    for (const auto& [key, derivations] : derivations_) {
        for (const Derivation& d : derivations) {
            out << key << " <- " << d.rule_id;
            for (const Atom& b : d.body) out << " " << b.to_string();
            for (const Atom& n : d.negated) out << " !" << n.to_string();
            out << "\n";
        }
    }
    return out.str();
}

Solver::Solver(const KnowledgeBase& kb, QueryOptions options) : kb_(kb), options_(options) {
    check_stratified(kb_);
}

QueryResult Solver::query_all(const std::vector<Atom>& goals) const {
    std::map<std::string, bool> naf_cache;
    Engine engine(kb_, options_, 0, &naf_cache);
    for (const Atom& goal : goals) engine.solve(goal);

    QueryResult result;
    result.max_proofs_ = options_.max_proofs_per_atom;
    for (const Atom& goal : goals) {
        std::vector<QueryResult::Answer> list;
        for (const Atom& answer : engine.answers_for(goal)) {
            QueryResult::Answer entry;
            entry.atom = answer;
            if (auto subst = unify(goal, answer)) entry.substitution = *subst;
            list.push_back(std::move(entry));
        }
        std::sort(list.begin(), list.end(),
                  [](const QueryResult::Answer& a, const QueryResult::Answer& b) {
                      return a.atom < b.atom;
                  });
        result.answers_.push_back(std::move(list));
    }
    result.derivations_ = engine.take_derivations();
    return result;
}

}  // namespace agplan
