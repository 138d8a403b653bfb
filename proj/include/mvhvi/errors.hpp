#pragma once

#include <stdexcept>
#include <string>

namespace mvhvi {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed instance document (bad JSON, unknown keys, wrong value kinds).
class ParseError : public Error {
public:
  using Error::Error;
};

/// Matrix/vector shapes inconsistent with the declared dimensions.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// Instance data violates a structural hypothesis (0 not in the multiplier
/// set, non-positive penalty constants, kink off a breakpoint, ...).
class HypothesisError : public Error {
public:
  using Error::Error;
};

/// Polyhedral multiplier set turned out empty.  Excluded by the 0-membership
/// validation at load time.
class InfeasiblePolyhedron : public Error {
public:
  using Error::Error;
};

/// A Clarke-calculus property failed on a sampled witness.
class PropertyViolation : public Error {
public:
  PropertyViolation(const std::string& what, std::string witness_)
      : Error(what), witness(std::move(witness_)) {}
  std::string witness;
};

/// No finite growth bound covers the sampled directional derivatives.
class GrowthFitError : public Error {
public:
  using Error::Error;
};

/// m_J * ||gamma||^2 >= m_A, so no quadratic h can be derived.
class ConstantGapError : public Error {
public:
  using Error::Error;
};

/// Inner fixed-point iteration ran out of budget with a growing residual.
class InnerDivergence : public Error {
public:
  using Error::Error;
};

/// No interior solution was found up to the largest ball of the schedule.
class ScheduleExhausted : public Error {
public:
  using Error::Error;
};

/// Exact enumeration requested above the supported dimension.
class DimensionLimit : public Error {
public:
  using Error::Error;
};

/// Grid or enumeration budget exceeded.
class BudgetExceeded : public Error {
public:
  using Error::Error;
};

/// Operation requires a hypothesis the instance does not satisfy.
class HypothesisGate : public Error {
public:
  using Error::Error;
};

} // namespace mvhvi
