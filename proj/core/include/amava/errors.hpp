#pragma once

#include <stdexcept>
#include <string>

namespace amava {

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class FrameTooSmall : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateVariance : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class MissingClass : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class CorruptModel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StorageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MonotonicityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class SessionClosed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedRecord : public std::runtime_error {
 public:
  MalformedRecord(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Thrown by backend implementations; converted to BackendFailure at the call boundary.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace amava
