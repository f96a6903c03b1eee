#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ovfl {

// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
    using Error::Error;
};

// Input data violating a documented invariant (ordering, admissibility, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Time outside a trajectory's interval.
class RangeError : public Error {
public:
    using Error::Error;
};

// A vector field was evaluated at a nonpositive gap.
class SingularityError : public Error {
public:
    SingularityError(int index, double gap);

    int index() const noexcept { return index_; }
    double gap() const noexcept { return gap_; }

private:
    int index_;
    double gap_;
};

// Step size fell below the underflow threshold.
class StiffnessError : public Error {
public:
    StiffnessError(double t, double step, std::vector<double> last_state);

    double time() const noexcept { return t_; }
    double step() const noexcept { return step_; }
    const std::vector<double>& last_state() const noexcept { return state_; }

private:
    double t_;
    double step_;
    std::vector<double> state_;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

// The reconstructed relative gap velocity was not increasing on a barrier segment.
class MonotonicityViolation : public Error {
public:
    MonotonicityViolation(double t, double drop);

    double time() const noexcept { return t_; }
    double drop() const noexcept { return drop_; }

private:
    double t_;
    double drop_;
};

// Denominator of the barrier quotient vanished.
class SingularQuotientError : public Error {
public:
    using Error::Error;
};

// Malformed or schema-violating input (scenario JSON, trajectory CSV).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, std::optional<std::size_t> byte = std::nullopt,
                        std::string column = {})
        : Error(what), byte_(byte), column_(std::move(column)) {}

    std::optional<std::size_t> byte() const noexcept { return byte_; }
    const std::string& column() const noexcept { return column_; }

private:
    std::optional<std::size_t> byte_;
    std::string column_;
};

} // namespace ovfl
