#pragma once

#include <stdexcept>
#include <string>

namespace srw {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyErosion : public Error {
 public:
  using Error::Error;
};

class SupportOutsideDomain : public Error {
 public:
  using Error::Error;
};

class HorizonExceeded : public Error {
 public:
  using Error::Error;
};

class StalledChain : public Error {
 public:
  using Error::Error;
};

class TargetOutsideErodedDomain : public Error {
 public:
  using Error::Error;
};

class EpsNotLessThanR : public Error {
 public:
  using Error::Error;
};

class DegenerateBound : public Error {
 public:
  using Error::Error;
};

class RadiusUnderflow : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed config text; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Well-formed config that violates an invariant; carries the field name.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& reason)
      : Error(field + ": " + reason), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace srw
