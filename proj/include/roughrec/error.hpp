#pragma once

#include <stdexcept>
#include <string>

namespace roughrec {

enum class ErrorKind {
  DimensionMismatch,
  IndexOutOfRange,
  InvalidGrid,
  InvalidParameter,
  NonFinite,
  RankDeficient,
  NotConverged,
  DegenerateField,
  OutOfNeighborhood,
  DomainViolation,
  Parse,
};

const char* to_string(ErrorKind kind);

/// Exception carrying a machine-readable kind; `what()` holds the detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace roughrec
