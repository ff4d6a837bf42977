#pragma once

#include <stdexcept>
#include <string>

namespace rjm {

// Base type for everything the library throws on purpose.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad scalar/vector inputs: non-finite values, out-of-range tuning constants.
class invalid_argument_error : public error {
 public:
  using error::error;
};

// Shape disagreements between data, coefficients, or files.
class dimension_error : public error {
 public:
  using error::error;
};

// A matrix that must be positive definite is not; message names the block.
class rank_error : public error {
 public:
  using error::error;
};

// The starting point of an iterative routine is unusable.
class initialization_error : public error {
 public:
  using error::error;
};

// Model selection could not produce any usable candidate.
class selection_error : public error {
 public:
  using error::error;
};

// File and format problems; message carries path and, where known, line.
class io_error : public error {
 public:
  using error::error;
};

// Internal sanity checks on computed quantities failed.
class numerical_error : public error {
 public:
  using error::error;
};

}  // namespace rjm
