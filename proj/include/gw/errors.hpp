#pragma once

#include <stdexcept>
#include <string>

namespace gw {

// Base class for everything this library throws on purpose.  Callers that
// want to distinguish failure kinds catch the concrete type; the CLI maps
// them onto exit codes.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Input validation failures (bad law, bad parameter, bad query).
class InvalidLaw : public Error {
 public:
  using Error::Error;
};

class NonStochastic : public InvalidLaw {
 public:
  using InvalidLaw::InvalidLaw;
};

class HasZeroOffspring : public InvalidLaw {
 public:
  using InvalidLaw::InvalidLaw;
};

class Subcritical : public InvalidLaw {
 public:
  using InvalidLaw::InvalidLaw;
};

class Degenerate : public InvalidLaw {
 public:
  using InvalidLaw::InvalidLaw;
};

// Case mismatches: an operation that only makes sense for one of the two
// regimes was asked of the other.
class NotSchroeder : public Error {
 public:
  using Error::Error;
};

class NotBoettcher : public Error {
 public:
  using Error::Error;
};

// Exact-distribution engine.
class WindowOverflow : public Error {
 public:
  using Error::Error;
};

class LatticeMismatch : public Error {
 public:
  using Error::Error;
};

class PopulationOverflow : public Error {
 public:
  using Error::Error;
};

// Numeric / convergence failures.  The CLI reports these with exit code 3.
class NumericFailure : public Error {
 public:
  using Error::Error;
};

class RootBracketFailure : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

class QuadratureNotConverged : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

class TargetOutOfRange : public Error {
 public:
  using Error::Error;
};

class NoSuchIndex : public Error {
 public:
  using Error::Error;
};

class BeyondNorming : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace gw
