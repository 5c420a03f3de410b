#pragma once

// Run configuration. A config is a flat JSON object:
//
//   {"model": "poisson-so3", "model.I1": 1.0, "hamiltonian": "kinetic",
//    "force": "linear", "force.c": 0.5, "x0": [0.0], "p0": [1.0, 0.01, 0.0],
//    "t_end": 10.0, "dt": 0.001, "seed": 42, "probes": 100,
//    "output": "traj.csv"}
//
// Keys "model.*", "hamiltonian.*" and "force.*" set family parameters.
// Unknown keys, wrong types and out-of-range values raise ConfigError.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "algh/models.hpp"

namespace algh {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The config file could not be read.
class ConfigIOError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelConfig {
  std::string model = "classical-free";
  ParamMap model_parameters;
  std::string hamiltonian = "kinetic";
  ParamMap hamiltonian_parameters;
  std::string force = "none";
  ParamMap force_parameters;
  std::vector<double> x0;  // empty when not given
  std::vector<double> p0;
  double t_end = 1.0;
  double dt = 1e-3;
  std::uint64_t seed = 42;
  int probes = 100;
  std::string output;  // empty: trajectories go to stdout
};

// Parses and validates: known names, parameters accepted by the families,
// x0/p0 sized for the model, dt > 0, t_end >= 0, probes >= 1.
ModelConfig parse_config(const std::string& text);
ModelConfig load_config(const std::string& path);

// Re-runs the validation of parse_config on an assembled config.
void validate(const ModelConfig& config);

}  // namespace algh
