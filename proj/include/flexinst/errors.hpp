#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flexinst {

/// Argument outside the mathematical domain of a formula (PS <= 0, h >= A, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The linkage cannot be assembled for the requested input (law-of-cosines
/// or law-of-sines argument outside [-1, 1]).
class InfeasibleGeometry : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Value outside an achievable or configured range.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class BusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BusTimeout : public BusError {
 public:
  using BusError::BusError;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Console message that does not follow the wire protocol.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace flexinst
