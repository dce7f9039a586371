#pragma once

#include <stdexcept>
#include <string>

namespace dde {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, configuration, or call arguments. Raised before any
/// computation starts.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// The closed-form return map is called outside the set of initial values
/// where it describes the true dynamics.
class PreconditionError : public Error {
public:
  using Error::Error;
};

/// a1 == a2: the return map has slope 1 and no unique fixed point.
class DegenerateMap : public Error {
public:
  using Error::Error;
};

/// The fixed-point bracket shows no sign change.
class BracketFailure : public Error {
public:
  using Error::Error;
};

/// Event bookkeeping exceeded its cap, or produced a state that cannot occur
/// for valid inputs.
class RunawayError : public Error {
public:
  using Error::Error;
};

}  // namespace dde
