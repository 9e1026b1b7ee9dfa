#pragma once

#include <stdexcept>
#include <string>

namespace anypro {

// Base class for all library errors; `stage` tags the pipeline phase for CLI
// diagnostics ("topology", "polling", "resolution", "solver", "metrics").
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message) : Error("topology", message) {}
};

class SemanticError : public Error {
 public:
  explicit SemanticError(const std::string& message) : Error("topology", message) {}
};

class GenerationError : public Error {
 public:
  explicit GenerationError(const std::string& message) : Error("topology", message) {}
};

class SimulationError : public Error {
 public:
  explicit SimulationError(const std::string& message) : Error("bgp_sim", message) {}
};

class PollingError : public Error {
 public:
  explicit PollingError(const std::string& message) : Error("polling", message) {}
};

class ResolutionError : public Error {
 public:
  explicit ResolutionError(const std::string& message) : Error("resolution", message) {}
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& message) : Error("solver", message) {}
};

class MetricsError : public Error {
 public:
  explicit MetricsError(const std::string& message) : Error("metrics", message) {}
};

}  // namespace anypro
