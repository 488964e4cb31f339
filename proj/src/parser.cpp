#include "agplan/parser.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "agplan/errors.hpp"

namespace agplan {

namespace {

struct Token {
    enum Kind { Ident, Quoted, LParen, RParen, Comma, Dot, Neck, Bang, End } kind;
    std::string text;
    int line;
    int column;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    // Label comments are significant; everything else starting with '%' is
    // skipped. The pending label applies to the next clause only.
    Token next() {
        skip_space_and_comments();
        int line = line_, col = col_;
        if (pos_ >= text_.size()) return {Token::End, "", line, col};
        char c = text_[pos_];
        switch (c) {
            case '(': advance(); return {Token::LParen, "(", line, col};
            case ')': advance(); return {Token::RParen, ")", line, col};
            case ',': advance(); return {Token::Comma, ",", line, col};
            case '.': advance(); return {Token::Dot, ".", line, col};
            case '!': advance(); return {Token::Bang, "!", line, col};
            case ':':
                if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '-') {
                    advance();
                    advance();
                    return {Token::Neck, ":-", line, col};
                }
                throw ParseError("unexpected ':'", line, col);
            case '\'': {
                advance();
                std::string body;
                while (pos_ < text_.size() && text_[pos_] != '\'') {
                    if (text_[pos_] == '\n') throw ParseError("newline in quoted atom", line, col);
                    body += text_[pos_];
                    advance();
                }
                if (pos_ >= text_.size()) throw ParseError("unterminated quoted atom", line, col);
                advance();
                return {Token::Quoted, body, line, col};
            }
            default:
                break;
        }
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
            std::string word;
            while (pos_ < text_.size()) {
                char d = text_[pos_];
                if (std::isalnum(static_cast<unsigned char>(d)) || d == '_') {
                    word += d;
                    advance();
                } else {
                    break;
                }
            }
            return {Token::Ident, word, line, col};
        }
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }

    std::string take_pending_label() {
        std::string out = pending_label_;
        pending_label_.clear();
        has_pending_label_ = false;
        return out;
    }
    bool has_pending_label() const { return has_pending_label_; }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space_and_comments() {
        for (;;) {
            while (pos_ < text_.size() &&
                   std::isspace(static_cast<unsigned char>(text_[pos_]))) {
                advance();
            }
            if (pos_ < text_.size() && text_[pos_] == '%') {
                size_t start = pos_;
                std::string comment;
                while (pos_ < text_.size() && text_[pos_] != '\n') {
                    comment += text_[pos_];
                    advance();
                }
                (void)start;
                const std::string tag = "%label:";
                if (comment.rfind(tag, 0) == 0) {
                    std::string label = comment.substr(tag.size());
                    size_t b = label.find_first_not_of(" \t");
                    size_t e = label.find_last_not_of(" \t\r");
                    pending_label_ = b == std::string::npos ? "" : label.substr(b, e - b + 1);
                    has_pending_label_ = true;
                }
                continue;
            }
            return;
        }
    }

    const std::string& text_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    std::string pending_label_;
    bool has_pending_label_ = false;
};

Term classify(const Token& token) {
    if (token.kind == Token::Quoted) return Term::constant(token.text);
    const std::string& t = token.text;
    if (t == "_") return Term::wildcard();
    char c = t[0];
    if (std::isupper(static_cast<unsigned char>(c)) || c == '_') return Term::variable(t);
    return Term::constant(t);
}

class Parser {
public:
    Parser(const std::string& text, int rule_seq, int fact_seq)
        : lexer_(text), rule_seq_(rule_seq), fact_seq_(fact_seq) {}

    void parse_into(KnowledgeBase& kb) {
        for (;;) {
            Token t = lexer_.next();
            if (t.kind == Token::End) break;
            parse_clause(kb, t);
        }
        finalize_checks(kb);
    }

    int rule_seq() const { return rule_seq_; }
    int fact_seq() const { return fact_seq_; }

private:
    void parse_clause(KnowledgeBase& kb, Token first) {
        std::string label = lexer_.take_pending_label();
        HornRule rule;
        rule.head = parse_atom_tokens(first);
        check_arity(rule.head, first);
        Token t = lexer_.next();
        if (t.kind == Token::Neck) {
            for (;;) {
                Token lit = lexer_.next();
                bool negated = false;
                if (lit.kind == Token::Bang) {
                    negated = true;
                    lit = lexer_.next();
                }
                Atom atom = parse_atom_tokens(lit);
                check_arity(atom, lit);
                (negated ? rule.negated_body : rule.body).push_back(std::move(atom));
                Token sep = lexer_.next();
                if (sep.kind == Token::Dot) break;
                if (sep.kind != Token::Comma) {
                    throw ParseError("expected ',' or '.' after body atom", sep.line, sep.column);
                }
            }
        } else if (t.kind != Token::Dot) {
            throw ParseError("expected ':-' or '.' after clause head", t.line, t.column);
        }

        validate_clause(rule, first);
        if (rule.is_fact()) {
            rule.id = "f" + std::to_string(++fact_seq_);
        } else {
            rule.id = "r" + std::to_string(++rule_seq_);
        }
        rule.label = label.empty() ? rule.head.predicate : label;
        kb.add_rule(std::move(rule));
    }

    Atom parse_atom_tokens(Token name) {
        if (name.kind != Token::Ident && name.kind != Token::Quoted) {
            throw ParseError("expected predicate name", name.line, name.column);
        }
        Atom atom;
        atom.predicate = name.text;
        Token t = lexer_.next();
        if (t.kind != Token::LParen) {
            throw ParseError("expected '(' after predicate name", t.line, t.column);
        }
        for (;;) {
            Token term = lexer_.next();
            if (term.kind != Token::Ident && term.kind != Token::Quoted) {
                throw ParseError("expected term", term.line, term.column);
            }
            atom.args.push_back(classify(term));
            Token sep = lexer_.next();
            if (sep.kind == Token::RParen) break;
            if (sep.kind != Token::Comma) {
                throw ParseError("expected ',' or ')' in argument list", sep.line, sep.column);
            }
        }
        return atom;
    }

    void check_arity(const Atom& atom, const Token& at) {
        auto it = arities_.find(atom.predicate);
        if (it == arities_.end()) {
            arities_[atom.predicate] = atom.arity();
        } else if (it->second != atom.arity()) {
            throw ParseError("arity conflict for predicate '" + atom.predicate + "': " +
                                 std::to_string(it->second) + " vs " + std::to_string(atom.arity()),
                             at.line, at.column);
        }
    }

    void validate_clause(const HornRule& rule, const Token& at) {
        std::set<std::string> body_vars;
        for (const Atom& a : rule.body) {
            for (const Term& t : a.args) {
                if (t.is_variable()) body_vars.insert(t.text);
                if (t.is_wildcard() && rule.is_fact()) {
                    throw ParseError("wildcard not allowed in stored facts", at.line, at.column);
                }
            }
        }
        for (const Term& t : rule.head.args) {
            if (t.is_wildcard()) {
                throw ParseError("wildcard not allowed in a clause head", at.line, at.column);
            }
            if (t.is_variable() && !body_vars.count(t.text)) {
                throw ParseError("unbound head variable '" + t.text +
                                     "' (range restriction violated)",
                                 at.line, at.column);
            }
        }
        for (const Atom& a : rule.negated_body) {
            for (const Term& t : a.args) {
                if (t.is_variable() && !body_vars.count(t.text)) {
                    throw ParseError("variable '" + t.text +
                                         "' in negated atom not bound by positive body",
                                     at.line, at.column);
                }
            }
        }
    }

    void finalize_checks(KnowledgeBase&) {}

    Lexer lexer_;
    int rule_seq_;
    int fact_seq_;
    std::map<std::string, int> arities_;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open program file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

KnowledgeBase parse_program(const std::string& text) {
    KnowledgeBase kb;
    Parser parser(text, 0, 0);
    parser.parse_into(kb);
    return kb;
}

KnowledgeBase parse_program_files(const std::vector<std::string>& paths) {
    KnowledgeBase kb;
    int rule_seq = 0, fact_seq = 0;
    for (const std::string& path : paths) {
        std::string text = read_file(path);
        Parser parser(text, rule_seq, fact_seq);
        parser.parse_into(kb);
        rule_seq = parser.rule_seq();
        fact_seq = parser.fact_seq();
    }
    return kb;
}

Atom parse_atom(const std::string& text) {
    auto [atom, negated] = parse_literal(text);
    if (negated) throw ParseError("unexpected negation in atom", 1, 1);
    return atom;
}

std::pair<Atom, bool> parse_literal(const std::string& text) {
    // Reuse the clause parser on "<literal-as-head> :- true" style input by
    // parsing "<text>." as a fact and relaxing the groundness checks.
    std::string trimmed = text;
    size_t b = trimmed.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) throw ParseError("empty atom", 1, 1);
    trimmed = trimmed.substr(b);
    bool negated = false;
    if (!trimmed.empty() && trimmed[0] == '!') {
        negated = true;
        trimmed = trimmed.substr(1);
    }

    Lexer lexer(trimmed);
    Token name = lexer.next();
    if (name.kind != Token::Ident && name.kind != Token::Quoted) {
        throw ParseError("expected predicate name", name.line, name.column);
    }
    Atom atom;
    atom.predicate = name.text;
    Token t = lexer.next();
    if (t.kind != Token::LParen) throw ParseError("expected '('", t.line, t.column);
    for (;;) {
        Token term = lexer.next();
        if (term.kind != Token::Ident && term.kind != Token::Quoted) {
            throw ParseError("expected term", term.line, term.column);
        }
        atom.args.push_back(classify(term));
        Token sep = lexer.next();
        if (sep.kind == Token::RParen) break;
        if (sep.kind != Token::Comma) throw ParseError("expected ',' or ')'", sep.line, sep.column);
    }
    Token end = lexer.next();
    if (end.kind != Token::End && end.kind != Token::Dot) {
        throw ParseError("trailing input after atom", end.line, end.column);
    }
    return {atom, negated};
}

}  // namespace agplan
