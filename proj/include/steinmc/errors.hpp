#pragma once

#include <stdexcept>
#include <string>

namespace steinmc {

/// Raised for inputs of the wrong shape (dimension mismatch, empty sample, bad index).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A score vector passed to the Stein kernel contained NaN or inf.
class InvalidScoreError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The operation is undefined for the current state (e.g. KSD of an empty set).
class UndefinedStateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Bad configuration: non-SPD matrices, out-of-range parameters, missing files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An algorithm failed at run time (chain stuck outside the support, divergence, ...).
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_dim(long expected, long actual, const char* what) {
  if (expected != actual) {
    throw ArgumentError(std::string(what) + ": expected dimension " + std::to_string(expected) +
                        ", got " + std::to_string(actual));
  }
}

}  // namespace steinmc
