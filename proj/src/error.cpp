#include "roughrec/error.hpp"

namespace roughrec {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::InvalidGrid: return "InvalidGrid";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::DegenerateField: return "DegenerateField";
    case ErrorKind::OutOfNeighborhood: return "OutOfNeighborhood";
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

}  // namespace roughrec
