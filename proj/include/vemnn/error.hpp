#pragma once

#include <stdexcept>
#include <string>

namespace vemnn {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent mesh input (topology, orientation, tags, file syntax).
class MeshError : public Error {
public:
  using Error::Error;
};

/// Local element construction failed (unsupported order, singular Gram matrix).
class ElementError : public Error {
public:
  using Error::Error;
};

/// Linear or nonlinear solve failure.
class SolverError : public Error {
public:
  using Error::Error;
};

/// Bad user-facing arguments (CLI flags, study configuration).
class UsageError : public Error {
public:
  using Error::Error;
};

} // namespace vemnn
