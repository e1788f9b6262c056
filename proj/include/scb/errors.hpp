#pragma once

#include <stdexcept>
#include <string>

namespace scb {

/// Base of every error the library throws. `exit_code()` is what the CLI
/// returns when the error escapes a command.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 2; }
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class ResourceError : public Error {
 public:
  ResourceError(const std::string& what, std::size_t required_bytes)
      : Error(what), required_bytes_(required_bytes) {}
  std::size_t required_bytes() const noexcept { return required_bytes_; }

 private:
  std::size_t required_bytes_;
};

class EnumerationBoundError : public Error {
 public:
  using Error::Error;
};

/// Malformed SMAP/MSK1/image payload. `offset()` is the byte position at
/// which parsing stopped.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

class ProtocolError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

/// A scorer produced output violating the probability-vector contract.
class ContractViolation : public Error {
 public:
  ContractViolation(const std::string& what, std::size_t row)
      : Error(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }
  int exit_code() const noexcept override { return 4; }

 private:
  std::size_t row_;
};

}  // namespace scb
