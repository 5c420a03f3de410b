#pragma once

// Dual mechanical systems: external forces, semisprays and sprays, the
// connection they induce, the Berwald linear connection and covariant
// derivatives of d-tensors, the curvature of the force-free connection,
// and RK4 integration of integral curves and parallel lifts.
//
// Sign convention: with delta_alpha = d~_alpha + Gamma_{b alpha} d.^b the
// connection of a semispray with Y-block W is Gamma_bc = 1/2 gtilde[a][c]
// dW_b/dp_a + corrections, so a spray satisfies W_b = Gamma_bc (G p)^c and
// 2G_b = -Gamma_bc (G p)^c when F = 0.

#include <functional>
#include <vector>

#include "algh/algebroid.hpp"
#include "algh/morphism.hpp"
#include "algh/phase_geometry.hpp"
#include "algh/smooth/field.hpp"

namespace algh {

struct ExternalForce {
  Field F;  // r-vector phase field F_a(x, p)
};

ExternalForce zero_force(int m, int r);

// S = (g o h) p d~ + W d. with W = -2(G - F/4). W is stored; G is derived.
class Semispray {
 public:
  static Semispray from_combined(MorphismGH gh, ExternalForce force, Field W);
  static Semispray from_coefficients(MorphismGH gh, ExternalForce force, const Field& G);

  int m() const { return gh_.m(); }
  int r() const { return gh_.r(); }
  const MorphismGH& gh() const { return gh_; }
  const ExternalForce& force() const { return force_; }
  // The Y-block W_a = -2(G_a - F_a/4).
  const Field& combined() const { return W_; }
  // G_a = F_a/4 - W_a/2.
  Field coefficients() const;
  // The force-free Y-block -2G_a = W_a - F_a/2.
  Field force_free() const;
  // (Z, Y) = ((g o h) p, W) as a generalized vector field.
  GeneralizedVectorField field() const;

 private:
  Semispray(MorphismGH gh, ExternalForce force, Field W);
  MorphismGH gh_;
  ExternalForce force_;
  Field W_;
};

// C = p_a d.^a.
GeneralizedVectorField liouville_field(int m, int r);

struct DualMechanicalSystem {
  AlgebroidModel model;
  MorphismGH gh;
  ExternalForce force;
  PhaseConnection conn;
};

// Gamma_bc = 1/2 [gtilde[a][c] dW_b/dp_a + gtilde[b][g] L^g_{ac} v^a
//                 - gtilde[b][g] (R_c . d_x) v^g - (R v . d_x) gtilde[b][c]]
// with v = (g o h) p, R = rho o h and W the force-free Y-block (the
// combined one when include_force is set).
PhaseConnection connection_from_semispray(const AlgebroidModel& model, const Semispray& s, bool include_force = false);

// The three correction terms of connection_from_semispray (everything but
// the dW/dp term), r x r, with the factor 1/2 included.
Field semispray_connection_corrections(const AlgebroidModel& model, const MorphismGH& gh);

// Spray of a mechanical system: W_b = Gamma_bc v^c - C_bc v^c with C the
// corrections above. C_bc v^c vanishes identically.
Semispray spray_coefficients(const AlgebroidModel& model, const MorphismGH& gh, const PhaseConnection& conn,
                             const ExternalForce& force);
Semispray spray_coefficients(const DualMechanicalSystem& sys);

// ([C, S] - S)(at) through the generalized tangent bracket.
GeneralizedVector semispray_derivation(const AlgebroidModel& model, const Semispray& s, const PhasePoint& at);

// Components of a distinguished linear connection, each r x r x r:
//   H_base[alpha][beta][gamma] = H^alpha_{beta gamma}
//   H_fiber[a][b][gamma]       = H^a_{b gamma}
//   V_base[beta][alpha][c]     = V^{alpha c}_beta
//   V_fiber[a][b][c]           = V^{bc}_a
struct DistinguishedLinearConnection {
  Field H_base;
  Field H_fiber;
  Field V_base;
  Field V_fiber;
};

// H_base = H_fiber = dGamma_{b gamma}/dp_a, both V blocks zero.
DistinguishedLinearConnection berwald_connection(const PhaseConnection& conn);

// Slot counts, each at most 2. Components are stored flat, row-major, in
// the order: upper delta~ indices, dz~ indices, d. indices, delta p~ indices.
struct Valence {
  int horizontal_up = 0;    // delta~_alpha slots (component index up)
  int horizontal_down = 0;  // dz~^beta slots (component index down)
  int vertical_down = 0;    // d.^b slots (component index down)
  int vertical_up = 0;      // delta p~_a slots (component index up)
  int slots() const { return horizontal_up + horizontal_down + vertical_down + vertical_up; }
};

struct DTensor {
  Valence valence;
  Field components;  // phase field of size r^slots
};

// Throws ShapeError when a slot count exceeds 2 or the component size does
// not match.
DTensor make_dtensor(int r, Valence valence, Field components);

// Z~^g T|g + Y~_c T|^c at `at`, with (Z~, Y~) the adapted components of X.
std::vector<double> covariant_derivative(const AlgebroidModel& model, const PhaseConnection& conn,
                                         const DistinguishedLinearConnection& dlc, const DTensor& T,
                                         const GeneralizedVectorField& X, const PhasePoint& at);

enum class RingCurvatureForm {
  corrected,  // vertical part of [delta°_c, delta°_d] expanded
  literal,    // the uncorrected expression with Berwald h-covariant derivatives
};

// Curvature R°_{b,cd} of the force-free connection Gamma° = Gamma - Phi/4,
// Phi_bc = gtilde[e][c] dF_b/dp_e, written through the curvature of Gamma.
Field ring_curvature_field(const AlgebroidModel& model, const MorphismGH& gh, const PhaseConnection& conn,
                           const ExternalForce& force, RingCurvatureForm form = RingCurvatureForm::corrected);
std::vector<double> ring_curvature(const AlgebroidModel& model, const MorphismGH& gh, const PhaseConnection& conn,
                                   const ExternalForce& force, const PhasePoint& at);

// Gamma° - Gamma = -Phi/4.
Field force_deformation(const MorphismGH& gh, const ExternalForce& force);

struct Trajectory {
  std::vector<double> t;
  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> p;
  std::vector<double> energy;  // empty unless the integrator records it
  std::size_t size() const { return t.size(); }
};

// Phase field of shape m + r holding (dx/dt, dp/dt).
using PhaseVelocity = Field;

// dx/dt = (rho o eta o h)(g o h) p, dp/dt = W.
PhaseVelocity semispray_velocity(const AlgebroidModel& model, const Semispray& s);

// Fixed-step RK4 from t = 0 to t_end, recording every step into `out`
// (cleared first). The final step is shortened to land on t_end. A
// non-finite state or a numerically singular g o h throws
// IntegrationBlowupError; `out` keeps the samples
// up to the last valid time. `energy`, when set, fills out.energy.
void integrate_flow(const PhaseVelocity& velocity, const std::vector<double>& x0, const std::vector<double>& p0,
                    double t_end, double dt, Trajectory& out,
                    const std::function<double(const std::vector<double>&, const std::vector<double>&)>& energy = {});

Trajectory integrate_semispray(const Semispray& s, const AlgebroidModel& model, const std::vector<double>& x0,
                               const std::vector<double>& p0, double t_end, double dt);

// An analytic base curve with its velocity.
struct BaseCurve {
  std::function<std::vector<double>(double)> position;
  std::function<std::vector<double>(double)> velocity;
};

// du_b/dt = Gamma_{b alpha}(c, u) (g o h)(c)^{alpha a} u_a along c, by RK4.
// The trajectory records x = c(t) and p = u(t).
Trajectory parallel_lift(const MorphismGH& gh, const PhaseConnection& conn, const BaseCurve& curve,
                         const std::vector<double>& u0, double t_end, double dt);

// max over samples of |(rho o eta o h)(c) (g o h)(c) p - d(eta o h o c)/dt|.
double gh_lift_residual(const AlgebroidModel& model, const MorphismGH& gh, const BaseCurve& curve,
                        const std::vector<double>& times, const std::vector<std::vector<double>>& p_samples);

struct GhLift {
  Trajectory lift;
  double residual = 0.0;
};

// Least-squares momenta p(t) with (rho o eta o h)(g o h) p = d(eta o h o c)/dt.
GhLift gh_lift(const AlgebroidModel& model, const MorphismGH& gh, const BaseCurve& curve,
               const std::vector<double>& times);

}  // namespace algh
