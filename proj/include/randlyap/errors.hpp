#pragma once

#include <stdexcept>
#include <string>

namespace randlyap {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// f' has no zeros on the circle (degenerate map).
class NoCriticalPoints : public Error {
 public:
  using Error::Error;
};

/// Two roots are closer than two grid cells; the root grid cannot separate them.
class GridTooCoarse : public Error {
 public:
  using Error::Error;
};

/// Region radius c outside its admissible range.
class InvalidC : public Error {
 public:
  using Error::Error;
};

/// A closed-form expression hit an undefined tangent/cotangent.
class SingularInput : public Error {
 public:
  using Error::Error;
};

/// Tangent product left the representable range between renormalizations.
class Overflow : public Error {
 public:
  using Error::Error;
};

/// The non-recurrence condition on critical points is not satisfied.
class H3Failed : public Error {
 public:
  using Error::Error;
};

/// Generic violated precondition (parameter ranges, lengths).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConeNotMapped : public Error {
 public:
  using Error::Error;
};

class NotInGN : public Error {
 public:
  using Error::Error;
};

/// Configuration parse/validation failure; carries the offending key and line.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, int line, const std::string& what)
      : Error(format(key, line, what)), key_(key), line_(line) {}

  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  static std::string format(const std::string& key, int line, const std::string& what) {
    std::string msg = "config error";
    if (line > 0) msg += " at line " + std::to_string(line);
    if (!key.empty()) msg += " [" + key + "]";
    return msg + ": " + what;
  }

  std::string key_;
  int line_;
};

}  // namespace randlyap
