#pragma once

#include <string>

#include "agplan/ast.hpp"

namespace agplan {

/// Parses a rule program in the Prolog-subset grammar:
///
///   clause  := atom "." | atom ":-" atomlist "."
///   atom    := ident "(" term ("," term)* ")"   ("!" prefix negates a body atom)
///   ident   := [a-zA-Z0-9_]+ | quoted atom 'any text'
///   comment := "%" to end of line; "%label: text" names the next clause
///
/// Rules with a body are numbered r1, r2, ... in source order, facts f1,
/// f2, ...; the default label is the head predicate name. Enforced here:
/// one arity per predicate name, ground facts, range restriction (head
/// variables bound by the positive body) and safe negation.
KnowledgeBase parse_program(const std::string& text);

/// Parses several sources as one program (profiles appended to a base
/// network description). Clause numbering continues across files.
KnowledgeBase parse_program_files(const std::vector<std::string>& paths);

/// Parses a single atom, e.g. a goal such as "dos(attacker, dbServer)".
Atom parse_atom(const std::string& text);

/// Parses a body-atom pattern; a leading "!" marks negation. Used for
/// catalog preconditions and policy patterns.
std::pair<Atom, bool> parse_literal(const std::string& text);

}  // namespace agplan
