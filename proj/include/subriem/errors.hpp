#pragma once

#include <stdexcept>
#include <string>

namespace subriem {

enum class ErrorKind {
  ParseError,
  JacobiViolation,
  NotBracketGenerating,
  NotInjective,
  Infeasible,
  ShapeMismatch,
  DualityViolation,
  AnnihilationViolation,
  NotSemiJNondegenerate,
  InfeasibleW,
  WrongStep,
  InvalidComplement,
};

const char* to_string(ErrorKind kind);

/// Domain error raised by every module. `level()` is the filtration level the
/// failure was detected at, or -1 when no level applies.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, int level = -1)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), level_(level) {}

  ErrorKind kind() const noexcept { return kind_; }
  int level() const noexcept { return level_; }
  const char* name() const noexcept { return to_string(kind_); }

 private:
  ErrorKind kind_;
  int level_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::JacobiViolation: return "JacobiViolation";
    case ErrorKind::NotBracketGenerating: return "NotBracketGenerating";
    case ErrorKind::NotInjective: return "NotInjective";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::DualityViolation: return "DualityViolation";
    case ErrorKind::AnnihilationViolation: return "AnnihilationViolation";
    case ErrorKind::NotSemiJNondegenerate: return "NotSemiJNondegenerate";
    case ErrorKind::InfeasibleW: return "InfeasibleW";
    case ErrorKind::WrongStep: return "WrongStep";
    case ErrorKind::InvalidComplement: return "InvalidComplement";
  }
  return "Unknown";
}

}  // namespace subriem
