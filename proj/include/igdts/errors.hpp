#pragma once

#include <stdexcept>
#include <string>

namespace igdts {

// Vector/matrix sizes that do not compose.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the operation's domain (non-finite input, bad parameter).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Iteration produced non-finite values or a numeric search failed.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every particle scored zero likelihood in a frame.
class TrackingLostError : public std::runtime_error {
 public:
  TrackingLostError(const std::string& what, int frame_index)
      : std::runtime_error(what), frame_index_(frame_index) {}
  int frame_index() const noexcept { return frame_index_; }

 private:
  int frame_index_;
};

// Malformed or unreadable input file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace igdts
