#pragma once

#include <stdexcept>
#include <string>

namespace rkn {

// All library failures derive from rkn::Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownScheme : public Error {
 public:
  explicit UnknownScheme(const std::string& name)
      : Error("unknown scheme: " + name) {}
};

class InconsistentScheme : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class ForceSingularity : public Error {
 public:
  using Error::Error;
};

class CollisionSingularity : public ForceSingularity {
 public:
  using ForceSingularity::ForceSingularity;
};

class NonIntegerStepCount : public Error {
 public:
  using Error::Error;
};

class UnsupportedLevel : public Error {
 public:
  explicit UnsupportedLevel(int k)
      : Error("unsupported extrapolation level " + std::to_string(k)) {}
};

class EccentricityOutOfRange : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class DegenerateFit : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace rkn
