#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace khl {

// Base for every error raised by the library. The CLI maps subclasses to exit
// codes (validation -> 2, resource -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Singular or non-unimodular input where an invertible one is required.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

// A work or enumeration cap would be exceeded.
class ResourceError : public Error {
 public:
  ResourceError(const std::string& what, std::uint64_t cap)
      : Error(what + " (cap = " + std::to_string(cap) + ")"), cap_(cap) {}
  std::uint64_t cap() const noexcept { return cap_; }

 private:
  std::uint64_t cap_;
};

class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of a function (zeta at s <= 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Caller violated a documented precondition (k = 0, too few samples, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace khl
