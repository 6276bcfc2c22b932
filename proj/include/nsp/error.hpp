#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nsp {

/// Failure categories raised by the library. The CLI maps them onto exit codes.
enum class Errc {
  InvalidParam,
  DegenerateShock,
  IntegrationFailure,
  NewtonDivergence,
  SingularMode,
  NonConvergence,
  NonPositiveDensity,
  PositivityLoss,
  PoissonFailure,
  UnresolvedMode,
  BadTemplate,
  FrameMismatch,
  NonPositiveValue,
  WindowTooSmall,
  ParseError,
  ValidationError,
  UnknownKey,
  FormatError,
  IoError,
};

constexpr std::string_view to_string(Errc c) {
  switch (c) {
    case Errc::InvalidParam: return "InvalidParam";
    case Errc::DegenerateShock: return "DegenerateShock";
    case Errc::IntegrationFailure: return "IntegrationFailure";
    case Errc::NewtonDivergence: return "NewtonDivergence";
    case Errc::SingularMode: return "SingularMode";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::NonPositiveDensity: return "NonPositiveDensity";
    case Errc::PositivityLoss: return "PositivityLoss";
    case Errc::PoissonFailure: return "PoissonFailure";
    case Errc::UnresolvedMode: return "UnresolvedMode";
    case Errc::BadTemplate: return "BadTemplate";
    case Errc::FrameMismatch: return "FrameMismatch";
    case Errc::NonPositiveValue: return "NonPositiveValue";
    case Errc::WindowTooSmall: return "WindowTooSmall";
    case Errc::ParseError: return "ParseError";
    case Errc::ValidationError: return "ValidationError";
    case Errc::UnknownKey: return "UnknownKey";
    case Errc::FormatError: return "FormatError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace nsp
