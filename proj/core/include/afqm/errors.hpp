#pragma once

#include <stdexcept>
#include <string>

namespace afqm {

// Thrown when a measurement primitive is asked to consume a qubit from an
// already-empty register.
class StateExhaustedError : public std::runtime_error {
 public:
  StateExhaustedError() : std::runtime_error("no qubits left to measure") {}
};

// Thrown when an operation is called on a policy of the wrong state kind,
// e.g. squeeze_time on a sine-state policy.
class InvalidStateError : public std::logic_error {
 public:
  explicit InvalidStateError(const std::string& what) : std::logic_error(what) {}
};

// Structured-record parse failure; `field` carries the offending field path.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace afqm
