#pragma once

#include <stdexcept>
#include <string>

namespace etfc {

/// Invalid scenario, parameter or graph input. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An edge length reached the pole of its tension function.
class ConnectivityViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A prediction was requested for a time before the knowledge it extrapolates.
class StaleKnowledge : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The trigger root search could not bracket or refine a crossing.
class RootFindingFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Any failure inside the event loop, tagged with where it happened.
class SimulationFault : public std::runtime_error {
 public:
  SimulationFault(const std::string& what, double time, int agent)
      : std::runtime_error(what), time_(time), agent_(agent) {}

  double time() const noexcept { return time_; }
  int agent() const noexcept { return agent_; }

 private:
  double time_;
  int agent_;
};

}  // namespace etfc
