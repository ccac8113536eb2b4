#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace txgraph {

/// Bad input data: malformed records, schema violations, broken invariants.
/// Carries the 1-based line number when the error came from a text stream.
class InputError : public std::runtime_error {
   public:
    explicit InputError(const std::string& what, std::optional<std::size_t> line = std::nullopt)
        : std::runtime_error(line ? "line " + std::to_string(*line) + ": " + what : what), line_(line) {}

    std::optional<std::size_t> line() const { return line_; }

   private:
    std::optional<std::size_t> line_;
};

/// A statistic that has no value on the given input (density with n < 2,
/// assortativity with zero variance, clustering without triads, ...).
/// Reports turn these into empty cells.
class UndefinedError : public std::domain_error {
   public:
    using std::domain_error::domain_error;
};

/// Caller broke an operation's precondition (month discontinuity, from > to, ...).
class PreconditionError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace txgraph
