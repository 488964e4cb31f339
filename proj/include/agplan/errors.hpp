#pragma once

#include <stdexcept>
#include <string>

namespace agplan {

/// Syntax or structural error in a rule program, with source position.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, int line, int column)
        : std::runtime_error(message + " at " + std::to_string(line) + ":" + std::to_string(column)),
          line_(line),
          column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

/// Evaluation-level failure: non-stratified negation, proof multiplicity
/// overflow, malformed query.
class LogicError : public std::runtime_error {
public:
    explicit LogicError(const std::string& message) : std::runtime_error(message) {}
};

/// Invalid catalog, repository, policy or graph input.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& message) : std::runtime_error(message) {}
};

/// Raised when a requested goal atom has no derivation in the program.
class GoalNotDerivable : public std::runtime_error {
public:
    explicit GoalNotDerivable(const std::string& message) : std::runtime_error(message) {}
};

}  // namespace agplan
