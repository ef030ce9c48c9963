#pragma once

#include <stdexcept>
#include <string>

namespace popalloc {

/// Simulation state violates a runtime precondition (e.g. the population
/// left the simplex by more than the allowed tolerance).
class state_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A non-finite value appeared during integration. Carries no trajectory;
/// see simulation_aborted for the run-level wrapper.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration failed validation. `field()` names the offending entry
/// when known.
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
  validation_error(const std::string& field, const std::string& msg)
      : std::runtime_error(field + ": " + msg), field_(field) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Event-trigger parameters violate the feasibility condition
/// lambda2 - a*|N_i| > 0. `agent()` is the violating agent id.
class infeasible_parameter_error : public validation_error {
 public:
  infeasible_parameter_error(int agent, const std::string& msg)
      : validation_error(msg), agent_(agent) {}

  int agent() const { return agent_; }

 private:
  int agent_;
};

/// File I/O failure; message includes the path.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace popalloc
