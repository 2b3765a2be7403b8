#pragma once

#include <stdexcept>
#include <string>

namespace crispedge {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Raised when crispness is requested for a map with zero total mass.
class UndefinedCrispness : public Error {
 public:
  using Error::Error;
};

}  // namespace crispedge
