#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace bracketlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Errc {
  NotUnimodular,
  DimensionMismatch,
  NonFiniteInput,
  ZeroGap,
  QuantileFailure,
  TailUnbounded,
  MonotonicityViolation,
  OutOfDomain,
  GammaTooSmall,
  InsufficientCurve,
  DomainError,
  DegenerateSample,
  UnstableEstimate,
  ConfigError,
  IoError,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::NotUnimodular: return "NotUnimodular";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::ZeroGap: return "ZeroGap";
    case Errc::QuantileFailure: return "QuantileFailure";
    case Errc::TailUnbounded: return "TailUnbounded";
    case Errc::MonotonicityViolation: return "MonotonicityViolation";
    case Errc::OutOfDomain: return "OutOfDomain";
    case Errc::GammaTooSmall: return "GammaTooSmall";
    case Errc::InsufficientCurve: return "InsufficientCurve";
    case Errc::DomainError: return "DomainError";
    case Errc::DegenerateSample: return "DegenerateSample";
    case Errc::UnstableEstimate: return "UnstableEstimate";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc c, const std::string& msg) { throw Error(c, msg); }

}  // namespace bracketlab
