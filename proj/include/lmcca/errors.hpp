#pragma once

#include <stdexcept>
#include <string>

namespace lmcca {

/// Contract violation on an argument (shape, range, non-finite entries).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Fusion variant requested with an incompatible number of views
/// (CCA and GCCA are pairwise).
class VariantMismatch : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Cholesky factorization of the right-hand matrix failed.
class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No eigenvalue cleared the positivity threshold, so the fit has d = 0.
class DegenerateFit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or truncated file content.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lmcca
