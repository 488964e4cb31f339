#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "agplan/errors.hpp"
#include "agplan/parser.hpp"
#include "agplan/solver.hpp"
#include "support.hpp"

using namespace agplan;
using agplan::testing::fixture;
using agplan::testing::naive_answers;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("terms render canonically") {
    CHECK(Term::constant("attacker").to_string() == "attacker");
    CHECK(Term::constant("CVE-2019-2510").to_string() == "'CVE-2019-2510'");
    CHECK(Term::constant("1521").to_string() == "1521");
    CHECK(Term::constant("0.65").to_string() == "'0.65'");
    CHECK(Term::variable("Host").to_string() == "Host");
    CHECK(Term::wildcard().to_string() == "_");
}

TEST_CASE("parse a fact") {
    KnowledgeBase kb = parse_program("malicious(attacker).");
    REQUIRE(kb.rules().size() == 1);
    const HornRule& rule = kb.rules()[0];
    CHECK(rule.is_fact());
    CHECK(rule.id == "f1");
    CHECK(rule.head.to_string() == "malicious(attacker)");
}

TEST_CASE("parse the netAccess rule") {
    std::string text =
        "netAccess(Principal, SrcHost, DstHost, Prot, Port) :-\n"
        "    localAccess(Principal, SrcHost, SrcUser),\n"
        "    aclH(SrcHost, SrcUser, SrcHost, DstHost, Prot, Port),\n"
        "    aclNW(SrcHost, DstHost, Prot, Port).";
    KnowledgeBase kb = parse_program(text);
    REQUIRE(kb.rules().size() == 1);
    const HornRule& rule = kb.rules()[0];
    CHECK(rule.id == "r1");
    CHECK(rule.head.predicate == "netAccess");
    CHECK(rule.head.arity() == 5);
    CHECK(rule.body.size() == 3);
}

TEST_CASE("labels, quoting and negation") {
    std::string text =
        "%label: DoS by remote exploit\n"
        "dos(P, H) :- vulHost(H, V, Prog, remoteExploit, dos), reaches(P, H), !shielded(H).\n"
        "vulHost(db, 'CVE-2019-2510', mysql, remoteExploit, dos).\n"
        "reaches(rogue, db).\n";
    KnowledgeBase kb = parse_program(text);
    const HornRule& rule = kb.rules()[0];
    CHECK(rule.label == "DoS by remote exploit");
    CHECK(rule.negated_body.size() == 1);
    CHECK(kb.rules()[1].label == "vulHost");
    CHECK(kb.rules()[1].head.args[1].to_string() == "'CVE-2019-2510'");
}

TEST_CASE("parse errors carry positions") {
    CHECK_THROWS_AS(parse_program("foo(X) :- bar(Y)."), ParseError);     // range restriction
    CHECK_THROWS_AS(parse_program("foo(a). foo(a, b)."), ParseError);    // arity conflict
    CHECK_THROWS_AS(parse_program("foo(_)."), ParseError);               // wildcard fact
    CHECK_THROWS_AS(parse_program("foo(X)."), ParseError);               // non-ground fact
    CHECK_THROWS_AS(parse_program("foo(a"), ParseError);                 // truncated
    CHECK_THROWS_AS(parse_program("p(X) :- q(Y), !r(Z)."), ParseError);  // unsafe negation
    try {
        parse_program("ok(a).\nbroken(");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("unify basics") {
    Atom pxa = parse_atom("p(X, a)");
    Atom pba = parse_atom("p(b, a)");
    auto mgu = unify(pxa, pba);
    REQUIRE(mgu.has_value());
    CHECK(mgu->resolve(Term::variable("X")).text == "b");

    CHECK_FALSE(unify(parse_atom("p(X, X)"), parse_atom("p(a, b)")).has_value());

    auto wild = unify(parse_atom("p(_, a)"), parse_atom("p(c, a)"));
    REQUIRE(wild.has_value());
    CHECK(wild->bindings.empty());
}

TEST_CASE("pattern matching for policies") {
    CHECK(matches_pattern(parse_atom("aclNW(_, dbServer, tcp, 1521)"),
                          parse_atom("aclNW(attackerHost, dbServer, tcp, 1521)")));
    CHECK_FALSE(matches_pattern(parse_atom("aclNW(_, dbServer, tcp, 1521)"),
                                parse_atom("aclNW(attackerHost, dbServer, rdp, 3389)")));
    CHECK(matches_pattern(parse_atom("p(X, X)"), parse_atom("p(a, a)")));
    CHECK_FALSE(matches_pattern(parse_atom("p(X, X)"), parse_atom("p(a, b)")));
}

TEST_CASE("query the dbserver fixture") {
    KnowledgeBase kb = parse_program(read_file(fixture("dbserver/network.pl")));
    Solver solver(kb);

    SUBCASE("dos goal has one answer with two proofs") {
        QueryResult result = solver.query(parse_atom("dos(attacker, dbServer)"));
        REQUIRE(result.answers().size() == 1);
        const Atom& answer = result.answers()[0].atom;
        CHECK(answer.to_string() == "dos(attacker, dbServer)");
        CHECK(result.derivations(answer).size() == 2);  // Rule 1 and Rule 5
        auto proofs = result.proofs(answer);
        CHECK(proofs.size() == 2);
        // Replaying each trace bottom-up re-derives the root from fact leaves.
        std::function<void(const ProofTrace&)> replay = [&](const ProofTrace& trace) {
            int index = kb.rule_index(trace.rule_id);
            REQUIRE(index >= 0);
            const HornRule& rule = kb.rule(index);
            if (rule.is_fact()) {
                CHECK(trace.children.empty());
                CHECK(rule.head == trace.root);
                return;
            }
            REQUIRE(trace.children.size() == rule.body.size());
            auto theta = unify(rule.head, trace.root);
            REQUIRE(theta.has_value());
            Substitution subst = *theta;
            for (size_t i = 0; i < rule.body.size(); ++i) {
                auto extended = unify_into(subst.apply(rule.body[i]), trace.children[i].root, subst);
                REQUIRE(extended.has_value());
                subst = *extended;
                replay(trace.children[i]);
            }
            CHECK(subst.apply(rule.head) == trace.root);
        };
        for (const ProofTrace& proof : proofs) replay(proof);
    }

    SUBCASE("unknown predicate yields the empty set") {
        QueryResult result = solver.query(parse_atom("unknown_pred(x)"));
        CHECK(result.answers().empty());
    }

    SUBCASE("execCode has a single trace rooted at rule 3") {
        QueryResult result = solver.query(parse_atom("execCode(attacker, dbServer, admin)"));
        REQUIRE(result.answers().size() == 1);
        auto proofs = result.proofs(result.answers()[0].atom);
        REQUIRE(proofs.size() == 1);
        CHECK(proofs[0].rule_id == "r3");
    }

    SUBCASE("open query binds the answer substitution") {
        QueryResult result = solver.query(parse_atom("netAccess(attacker, S, dbServer, P, Q)"));
        REQUIRE(result.answers().size() == 2);  // tcp and rdp routes
        const Substitution& subst = result.answers()[0].substitution;
        CHECK(subst.resolve(Term::variable("S")).text == "attackerHost");
    }

    SUBCASE("completeness matches the naive fixpoint") {
        for (const char* goal :
             {"dos(X, Y)", "netAccess(A, B, C, D, E)", "localAccess(A, B, C)", "aclNW(A, B, C, D)"}) {
            Atom atom = parse_atom(goal);
            std::set<std::string> expected = naive_answers(kb, atom);
            std::set<std::string> actual;
            QueryResult result = solver.query(atom);
            for (const auto& answer : result.answers()) {
                actual.insert(answer.atom.to_string());
            }
            CHECK(actual == expected);
        }
    }

    SUBCASE("two runs serialize identically") {
        std::string first = solver.query(parse_atom("dos(attacker, dbServer)")).to_string();
        std::string second = Solver(kb).query(parse_atom("dos(attacker, dbServer)")).to_string();
        CHECK(first == second);
        CHECK(!first.empty());
    }
}

TEST_CASE("termination on mutually recursive rules") {
    // reach/hop call each other; tabling must converge.
    std::string text =
        "reach(X) :- hop(X).\n"
        "hop(X) :- reach(X).\n"
        "reach(X) :- seed(X).\n"
        "seed(a). seed(b).\n";
    KnowledgeBase kb = parse_program(text);
    QueryResult result = Solver(kb).query(parse_atom("reach(X)"));
    REQUIRE(result.answers().size() == 2);
    CHECK(result.answers()[0].atom.to_string() == "reach(a)");
    CHECK(naive_answers(kb, parse_atom("reach(X)")) ==
          std::set<std::string>{"reach(a)", "reach(b)"});
}

TEST_CASE("stratified negation") {
    SUBCASE("negation as failure over a lower stratum") {
        std::string text =
            "open(H) :- host(H), !protected(H).\n"
            "host(a). host(b).\n"
            "protected(b).\n";
        QueryResult result = Solver(parse_program(text)).query(parse_atom("open(X)"));
        REQUIRE(result.answers().size() == 1);
        CHECK(result.answers()[0].atom.to_string() == "open(a)");
    }

    SUBCASE("negation through a cycle is rejected") {
        std::string text =
            "p(X) :- q(X), !r(X).\n"
            "r(X) :- p(X), q(X).\n"
            "q(a).\n";
        KnowledgeBase kb = parse_program(text);
        CHECK_THROWS_AS((void)Solver{kb}, LogicError);
    }
}

TEST_CASE("proof multiplicity cap") {
    // 70 alternative derivations of goal(a) overflow the default cap of 64.
    std::ostringstream text;
    for (int i = 0; i < 70; ++i) {
        text << "goal(X) :- step" << i << "(X).\n";
        text << "step" << i << "(a).\n";
    }
    KnowledgeBase kb = parse_program(text.str());
    CHECK_THROWS_AS(Solver(kb).query(parse_atom("goal(a)")), LogicError);
    QueryOptions relaxed;
    relaxed.max_proofs_per_atom = 128;
    QueryResult result = Solver(kb, relaxed).query(parse_atom("goal(a)"));
    CHECK(result.derivations(parse_atom("goal(a)")).size() == 70);
}

TEST_CASE("random programs agree with the naive fixpoint") {
    std::mt19937 rng(7);
    for (int round = 0; round < 30; ++round) {
        std::ostringstream text;
        text << "path(X, Y) :- edge(X, Y).\n";
        text << "path(X, Y) :- edge(X, Z), path(Z, Y).\n";
        int n = 5 + static_cast<int>(rng() % 4);
        int m = 4 + static_cast<int>(rng() % 10);
        for (int e = 0; e < m; ++e) {
            text << "edge(n" << rng() % static_cast<unsigned>(n) << ", n"
                 << rng() % static_cast<unsigned>(n) << ").\n";
        }
        KnowledgeBase kb = parse_program(text.str());
        Atom goal = parse_atom("path(A, B)");
        std::set<std::string> actual;
        QueryOptions options;
        options.max_proofs_per_atom = 100000;
        for (const auto& answer : Solver(kb, options).query(goal).answers()) {
            actual.insert(answer.atom.to_string());
        }
        CHECK(actual == naive_answers(kb, goal));
    }
}
