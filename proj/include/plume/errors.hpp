#pragma once

#include <stdexcept>
#include <string>

namespace plume {

// Base for every error raised by the simulation library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Query time at or before a puff's release.
class DegenerateTimeError : public Error {
 public:
  using Error::Error;
};

// Closed-form model used outside its validity (e.g. non-uniform flow).
class ModelValidityError : public Error {
 public:
  using Error::Error;
};

// Explicit grid step exceeds the stability bound; the caller must subdivide.
class StepSizeError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

// Sample point outside the region where a field can be evaluated.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Non-finite or otherwise unusable input.
class InputError : public Error {
 public:
  using Error::Error;
};

// Sensor geometry whose Taylor system cannot be solved reliably.
class DegenerateStencilError : public Error {
 public:
  using Error::Error;
};

// Gradient norm below the configured floor.
class DegenerateGradientError : public Error {
 public:
  using Error::Error;
};

}  // namespace plume
