#pragma once

#include <stdexcept>
#include <string>

namespace fgs {

/// Invalid configuration value (nonpositive bandwidth, bad cutoff, ...).
class ParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Input value outside its admissible range (node outside the unit cube, ...).
class RangeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Dimension mismatch between an argument and the object it is applied to.
class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure detected at run time (nonpositive degree, singular or
/// ill-conditioned subproblem, divergence).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; message carries the 1-based line number when known.
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input file in an unsupported or unrecognized format.
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Requested computation exceeds a configured memory or size budget.
class ResourceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace fgs
