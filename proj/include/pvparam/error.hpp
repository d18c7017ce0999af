#pragma once

#include <stdexcept>
#include <string>

namespace pvparam {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Input text or binary data does not follow the expected format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Arguments violate a precondition (ranges, sizes, matching ids, CRS).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Polygon topology or a boolean operation is unusable.
class GeometryError : public Error {
 public:
  using Error::Error;
};

}  // namespace pvparam
