#pragma once

// The invariant suite behind `algh check`, trajectory runs and the point
// reports behind `algh semispray` and `algh curvature`.

#include <ostream>
#include <string>
#include <vector>

#include "algh/config.hpp"
#include "algh/dynamics.hpp"
#include "algh/hamilton.hpp"
#include "algh/models.hpp"
#include "algh/phase_geometry.hpp"

namespace algh {

struct CheckResult {
  std::string group;
  std::string name;
  double residual = 0.0;
  double threshold = 0.0;
  bool lower_bound = false;  // passes when residual > threshold instead
  bool passed = false;
  std::string note;  // evaluation error, when one occurred
};

struct RunReport {
  std::string model;
  std::vector<CheckResult> checks;
  CurvatureAdjudication curvature;
  bool summed_curvature_rejected = false;  // the summed candidate fails, a flipped one is adopted
  bool closed_form_mismatch = false;        // closed-form semispray disagrees with the linear solve
  double seconds = 0.0;

  bool passed() const;
  // Deterministic text; timing is left out so equal runs print equal bytes.
  void print(std::ostream& out) const;
};

// The setup every run shares.
struct RunSetup {
  BuiltinModel model;
  HamiltonSystem system;
};

RunSetup make_setup(const ModelConfig& config);

RunReport run_check(const ModelConfig& config);

struct IntegrationSummary {
  Trajectory trajectory;  // partial when blown_up
  double max_energy_drift = 0.0;
  bool blown_up = false;
  double last_valid_time = 0.0;
  std::string message;
};

// Integrates the canonical semispray from x0, p0. Throws ConfigError when
// x0 or p0 is missing.
IntegrationSummary run_integrate(const ModelConfig& config);

// Header t,x1..xm,p1..pr,E_H; 17 significant digits; LF line endings.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

// Parses "v1,v2,..." into m + r numbers. Throws ConfigError.
PhasePoint parse_phase_point(const std::string& text, int m, int r);

// G_b, F_b, W_b, E_b, Gamma_bc at a point.
void print_semispray_report(std::ostream& out, const ModelConfig& config, const PhasePoint& at);

// Curvature of the Hamiltonian connection, the curvature of the force-free
// connection and the sign adjudication at a point.
void print_curvature_report(std::ostream& out, const ModelConfig& config, const PhasePoint& at);

}  // namespace algh
