#pragma once

// Builtin model families. Parameters are read from a flat name -> value map
// with keys such as "tau1" or "I2"; unknown keys are rejected.

#include <map>
#include <string>
#include <vector>

#include "algh/algebroid.hpp"
#include "algh/morphism.hpp"

namespace algh {

using ParamMap = std::map<std::string, double>;

struct BuiltinModel {
  std::string name;
  std::string summary;
  AlgebroidModel algebroid;
  MorphismGH gh;
};

struct ModelInfo {
  std::string name;
  std::string summary;
  int m;
  int r;
  std::vector<std::string> parameters;
};

std::vector<ModelInfo> builtin_models();

// Throws std::invalid_argument for unknown names or parameters.
BuiltinModel make_model(const std::string& name, const ParamMap& params = {});

std::vector<std::string> hamiltonian_names();
std::vector<std::string> force_names();

// Scalar phase field. "kinetic": 1/2 p^T (g o h) p; "potential": kinetic +
// k/2 |x|^2; "cartan": 1/2 K^2 with K = sqrt(p^T (g o h) p) written through
// the square root.
Field make_hamiltonian(const BuiltinModel& model, const std::string& name, const ParamMap& params = {});

// r-vector phase field. "none", "constant" (F_b = c), "linear" (F_b = c p_b),
// "modulated" (F_b = c (1 + (x^1)^2) p_b).
Field make_force(const BuiltinModel& model, const std::string& name, const ParamMap& params = {});

}  // namespace algh
