#pragma once

#include <vector>

#include "etfc/formation.hpp"

namespace etfc {

enum class Mode { single, double_integrator };

const char* to_string(Mode m);

/// One row of the simulation trace.
struct TraceSample {
  double time = 0.0;
  Points positions;
  Points velocities;                 // empty in single mode
  std::vector<double> edge_lengths;  // ||x_i - x_j|| per edge
  std::vector<double> edge_errors;   // ||x_i - x_j - d_ij|| per edge
  std::vector<double> error_norms;   // ||e_i|| or ||E_i|| per agent
  double threshold = 0.0;            // alpha exp(-beta t)
};

/// One agent's trigger. `control` is u_i in single mode and the feedforward
/// u^d_i in double mode; `velocity` is q_i at the trigger (double mode only).
struct TriggerRecord {
  int agent = -1;
  double time = 0.0;
  Vec control;
  Vec velocity;
  Points payload_positions;   // x_i - x_j per neighbor, as broadcast
  Points payload_velocities;  // q_i - q_j per neighbor (double mode)
  double error_norm = 0.0;    // ||e_i|| (or ||E_i||) just before the update
};

}  // namespace etfc
