#pragma once

#include <stdexcept>

namespace freshcache {

// A scalar argument is out of domain (nonpositive rate, negative update rate,
// non-finite value, malformed binary vector entry, ...).
class InvalidParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Vector lengths disagree with the configured number of files.
class DimensionMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A policy violates one of the problem constraints; the message names the
// violated constraint.
class FeasibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An operation was asked to enumerate beyond its size guard.
class InstanceTooLargeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent experiment configuration document.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A result failed a post-emission sanity check.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace freshcache
