#pragma once

#include <stdexcept>
#include <string>

namespace pam {

// Root of the library's exception hierarchy. Every failure the library reports
// derives from this so callers can catch one type at stage boundaries.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed argument: non-finite samples, out-of-range scalars, wrong length.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Container shape violated (ragged grids, count mismatches, corrupt files).
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Zero-variance signal handed to the standardizer.
class DegenerateSignal : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

// Metric has no value for this input (e.g. AUROC with one class present).
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace pam
