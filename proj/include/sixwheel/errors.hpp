#ifndef SIXWHEEL_ERRORS_HPP_
#define SIXWHEEL_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace sixwheel {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidFixError : public Error {
 public:
  using Error::Error;
};

class NoSourceError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class ParallelLinesError : public Error {
 public:
  using Error::Error;
};

class ZeroMembershipError : public Error {
 public:
  using Error::Error;
};

class SingularError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or input file. `field()` names the offending
/// JSON path, e.g. `obstacles[1].radius`.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : "field '" + field + "': " + what),
        field_(std::move(field)),
        detail_(what) {}

  const std::string& field() const { return field_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string field_;
  std::string detail_;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sixwheel

#endif  // SIXWHEEL_ERRORS_HPP_
