#pragma once

#include <stdexcept>
#include <string>

namespace linkcert {

class LinkcertError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public LinkcertError {
public:
  using LinkcertError::LinkcertError;
};

class ValidationError : public LinkcertError {
public:
  using LinkcertError::LinkcertError;
};

/// Crossing counting could not find a regular projection, or a kernel hit a
/// non-finite value.
class KernelError : public LinkcertError {
public:
  using LinkcertError::LinkcertError;
};

class BraidError : public LinkcertError {
public:
  using LinkcertError::LinkcertError;
};

} // namespace linkcert
