#pragma once

#include <stdexcept>
#include <string>

namespace sdeflow {

enum class Errc {
  InvalidPoint,
  ProjectionDiverged,
  NotOnBoundary,
  MissingDerivative,
  NotNested,
  OffGrid,
  InsufficientSamples,
  PenaltyBlowup,
  OutOfHull,
  SupportViolation,
  InsufficientReplicas,
  BadSegment,
  ConfigError,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace sdeflow
