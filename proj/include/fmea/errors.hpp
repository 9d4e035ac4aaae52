#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fmea {

struct Violation;

/// Base class of every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reference to an unknown entity, malformed evidence, or a broken precondition.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// The action's preconditions do not hold in the given state.
class NotApplicableError : public Error {
public:
    using Error::Error;
};

/// A model failed semantic validation.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> report);
    const std::vector<Violation>& report() const { return report_; }

private:
    std::vector<Violation> report_;
};

class CapacityError : public Error {
public:
    CapacityError(std::size_t limit);
    std::size_t limit() const { return limit_; }

private:
    std::size_t limit_;
};

class IterationLimitError : public Error {
public:
    IterationLimitError(int iterations, double residual);
    int iterations() const { return iterations_; }
    double residual() const { return residual_; }

private:
    int iterations_;
    double residual_;
};

/// gamma = 1 on an MDP where some state cannot reach an absorbing state.
class DivergenceRiskError : public Error {
public:
    using Error::Error;
};

class MissingOutcomeError : public Error {
public:
    explicit MissingOutcomeError(std::string action);
    const std::string& action() const { return action_; }

private:
    std::string action_;
};

/// An outcome contradicts the current possibility sets or the previewed outcomes.
class InconsistentEvidenceError : public Error {
public:
    using Error::Error;
};

/// Operation not allowed in the session's current status.
class SessionStateError : public Error {
public:
    using Error::Error;
};

/// Syntax or schema error in a JSON document, located by line/column and JSON pointer.
class ParseError : public Error {
public:
    enum class Kind { syntax, schema };

    ParseError(Kind kind, std::string message, std::size_t line, std::size_t column, std::string pointer);

    Kind kind() const { return kind_; }
    const std::string& detail() const { return detail_; }
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }
    const std::string& pointer() const { return pointer_; }

private:
    Kind kind_;
    std::string detail_;
    std::size_t line_;
    std::size_t column_;
    std::string pointer_;
};

} // namespace fmea
