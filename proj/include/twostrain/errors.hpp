#pragma once

#include <stdexcept>
#include <string>

namespace twostrain {

// Caller broke a documented precondition (bad parameters, invalid state).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of a formula (log of zero, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Parameters fall outside the regime a formula was derived for.
class RegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A bound was requested whose hypothesis does not hold. Never answered with
// a silent bound.
class InapplicableError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError(what);
}

}  // namespace detail
}  // namespace twostrain
