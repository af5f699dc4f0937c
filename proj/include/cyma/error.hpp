#pragma once

#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cyma {

enum class Errc {
  SingularMatrix,
  ExhaustedRetries,
  InvalidFrame,
  ExplicitCaseG33Zero,
  NotExplicitCase,
  DegenerateE2,
  InvalidGrid,
  GridMismatch,
  UnnormalizedF,
  LineSearchFailed,
  LinearSolveFailed,
  HomotopyFailed,
  NonzeroMeanU,
  PeriodicityCheckFailed,
  ParseError,
  InvalidArgument,
};

constexpr std::string_view to_string(Errc e) noexcept {
  switch (e) {
    case Errc::SingularMatrix: return "SingularMatrix";
    case Errc::ExhaustedRetries: return "ExhaustedRetries";
    case Errc::InvalidFrame: return "InvalidFrame";
    case Errc::ExplicitCaseG33Zero: return "ExplicitCaseG33Zero";
    case Errc::NotExplicitCase: return "NotExplicitCase";
    case Errc::DegenerateE2: return "DegenerateE2";
    case Errc::InvalidGrid: return "InvalidGrid";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::UnnormalizedF: return "UnnormalizedF";
    case Errc::LineSearchFailed: return "LineSearchFailed";
    case Errc::LinearSolveFailed: return "LinearSolveFailed";
    case Errc::HomotopyFailed: return "HomotopyFailed";
    case Errc::NonzeroMeanU: return "NonzeroMeanU";
    case Errc::PeriodicityCheckFailed: return "PeriodicityCheckFailed";
    case Errc::ParseError: return "ParseError";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every recoverable failure in the library is reported as an Error carrying
/// an Errc, so front ends can map it onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

namespace detail {

/// Transcription bugs (identity violations on validated input) are not
/// user errors.
[[noreturn]] inline void internal_error(const std::string& what) {
  std::fprintf(stderr, "cyma internal error: %s\n", what.c_str());
  std::abort();
}

}  // namespace detail
}  // namespace cyma
