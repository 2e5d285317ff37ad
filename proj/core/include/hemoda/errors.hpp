#pragma once

#include <stdexcept>
#include <string>

namespace hemoda {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ResolutionTooCoarse : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

class SensorSelectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CflViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PoissonNonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Forward-model failure inside the ensemble forecast, tagged with the member.
class ForecastError : public std::runtime_error {
 public:
  ForecastError(int member, const std::string& what)
      : std::runtime_error("member " + std::to_string(member) + ": " + what), member_(member) {}
  int member() const noexcept { return member_; }

 private:
  int member_;
};

// Solver or filter failure during a twin-experiment run, tagged with the step.
class AssimilationError : public std::runtime_error {
 public:
  AssimilationError(int step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hemoda
