#ifndef BATHYLOC_ERRORS_HPP
#define BATHYLOC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bathyloc {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input text (ESRI ASCII header, JSON, ...).
class ParseError : public Error {
public:
  using Error::Error;
};

/// Cell/row/column counts do not match the declared dimensions.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// A value violates a domain constraint (negative height, bad covariance, ...).
class ValueError : public Error {
public:
  using Error::Error;
};

/// Query outside the interpolable interior of a grid.
class BoundsError : public Error {
public:
  using Error::Error;
};

/// Query touching a nodata (land) cell.
class NodataError : public Error {
public:
  using Error::Error;
};

/// Numerical failure (singular innovation covariance, Cholesky breakdown, ...).
class NumericError : public Error {
public:
  using Error::Error;
};

/// Invalid or inconsistent run/benchmark configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
public:
  using Error::Error;
};

} // namespace bathyloc

#endif
