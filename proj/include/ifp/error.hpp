#pragma once

#include <stdexcept>
#include <string>

namespace ifp {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input or violated precondition (bad config, invalid matrix, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// An iterative method failed to converge or produced an impossible state.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ifp
