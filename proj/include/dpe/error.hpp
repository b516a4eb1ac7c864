#pragma once

#include <stdexcept>
#include <string>

namespace dpe {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iterative routine failed to converge or produced a non-finite value.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A quantity was evaluated outside the span it was computed for
// (correlation table range, grid capacity, ...).
class SpanError : public Error {
 public:
  using Error::Error;
};

// Discriminator denominator vanished.
class LossOfLock : public Error {
 public:
  using Error::Error;
};

// MMT (tau_los, tau_nlos) pair whose normal equations are singular.
class DegeneratePair : public Error {
 public:
  using Error::Error;
};

// No feasible MMT pair in the search window.
class EstimatorFailure : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dpe
