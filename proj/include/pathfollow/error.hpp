#pragma once

#include <stdexcept>
#include <string>

namespace pathfollow {

/// Failure modes shared by every layer of the solver stack.
enum class ErrorKind {
  Singular,
  DimensionMismatch,
  NoSolution,
  AllSingular,
  NoReference,
  OracleDiverged,
  RefineDiverged,
  Stalled,
  InvalidArgument,
};

[[nodiscard]] constexpr const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Singular: return "Singular";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NoSolution: return "NoSolution";
    case ErrorKind::AllSingular: return "AllSingular";
    case ErrorKind::NoReference: return "NoReference";
    case ErrorKind::OracleDiverged: return "OracleDiverged";
    case ErrorKind::RefineDiverged: return "RefineDiverged";
    case ErrorKind::Stalled: return "Stalled";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pathfollow
