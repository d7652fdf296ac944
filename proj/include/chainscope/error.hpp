#pragma once

#include <stdexcept>
#include <string>

namespace chainscope {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A point lies outside its domain, or a domain/grid is malformed.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A control value that is not a member of the system's control set.
class ControlError : public Error {
 public:
  using Error::Error;
};

// A map sends a domain point outside the domain.
class SelfMapError : public Error {
 public:
  using Error::Error;
};

// The perturbation radius is too small for the grid resolution.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class EmptySetError : public Error {
 public:
  using Error::Error;
};

// A grid exceeds the configured cell cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// An analysis could not reach a verdict (e.g. an orbit failed to converge).
class InconclusiveError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace chainscope
