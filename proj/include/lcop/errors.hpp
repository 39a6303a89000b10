#pragma once

#include <stdexcept>
#include <string>

namespace lcop {

// Bad user input: malformed files, inconsistent dimensions, schema violations.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& msg) : std::invalid_argument(msg) {}
};

// API misuse: out-of-contract arguments (wrong index, mismatched shapes).
class ContractError : public ValidationError {
 public:
  explicit ContractError(const std::string& msg) : ValidationError(msg) {}
};

// Argument outside the mathematical domain of an operation.
class DomainError : public ValidationError {
 public:
  explicit DomainError(const std::string& msg) : ValidationError(msg) {}
};

// Numerical breakdown at runtime (non-finite values, failed factorizations).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace lcop
