#pragma once

#include <stdexcept>
#include <string>

namespace rbqkd {

/// Invalid input values: out-of-range parameters, broken invariants,
/// dimension mismatches.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A well-formed computation whose outcome is a refusal (abort, infeasible).
class RejectedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public DomainError {
 public:
  using DomainError::DomainError;
};

class MarginalMismatch : public DomainError {
 public:
  using DomainError::DomainError;
};

class SupportViolation : public DomainError {
 public:
  using DomainError::DomainError;
};

class NotAProjector : public DomainError {
 public:
  using DomainError::DomainError;
};

class NotTracePreserving : public DomainError {
 public:
  using DomainError::DomainError;
};

class MalformedBehavior : public DomainError {
 public:
  using DomainError::DomainError;
};

class NoFeasiblePoint : public RejectedError {
 public:
  using RejectedError::RejectedError;
};

class RejectedTranscript : public RejectedError {
 public:
  using RejectedError::RejectedError;
};

}  // namespace rbqkd
