#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ttcc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownVariableError : Error {
    explicit UnknownVariableError(const std::string& name)
        : Error("unknown variable: " + name), variable(name) {}
    std::string variable;
};

struct ValueOutOfDomainError : Error {
    ValueOutOfDomainError(std::int64_t value, std::int64_t max)
        : Error("value " + std::to_string(value) + " outside domain 0.." +
                std::to_string(max - 1)),
          value(value) {}
    std::int64_t value;
};

struct DomainTooLargeError : Error {
    explicit DomainTooLargeError(const std::string& what) : Error(what) {}
};

struct UnguardedRecursionError : Error {
    explicit UnguardedRecursionError(const std::string& what) : Error(what) {}
};

struct StepBudgetExceededError : Error {
    explicit StepBudgetExceededError(const std::string& what) : Error(what) {}
};

struct ArityMismatchError : Error {
    explicit ArityMismatchError(const std::string& what) : Error(what) {}
};

struct UnknownIdentifierError : Error {
    explicit UnknownIdentifierError(const std::string& name)
        : Error("unknown identifier: " + name) {}
};

// Parse errors carry a source position (1-based).
struct SyntaxError : Error {
    SyntaxError(const std::string& what, int line, int column)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
          line(line),
          column(column) {}
    int line;
    int column;
};

struct ConfigError : Error {
    using Error::Error;
};

struct UnknownLinkError : ConfigError {
    explicit UnknownLinkError(const std::string& what) : ConfigError(what) {}
};

struct InconsistentVirtualLinkError : ConfigError {
    explicit InconsistentVirtualLinkError(const std::string& what) : ConfigError(what) {}
};

} // namespace ttcc
