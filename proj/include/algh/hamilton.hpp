#pragma once

// Regular Hamiltonians and Cartan functions on the dual bundle, the
// Poincare-Cartan forms, the energy, the canonical semispray (closed form
// and a linear-solve oracle), its connection and Hamilton-Jacobi dynamics.

#include <cstdint>
#include <vector>

#include "algh/algebroid.hpp"
#include "algh/dynamics.hpp"
#include "algh/morphism.hpp"
#include "algh/phase_geometry.hpp"
#include "algh/smooth/field.hpp"

namespace algh {

class HamiltonianField {
 public:
  // H: scalar phase field.
  explicit HamiltonianField(Field H);

  int m() const { return H_.base_dim(); }
  int r() const { return H_.fiber_dim(); }
  const Field& H() const { return H_; }
  // H_i = dH/dx^i, shape m.
  const Field& H_x() const { return H_x_; }
  // H^a = dH/dp_a, shape r.
  const Field& H_p() const { return H_p_; }
  // H^a_i = d2H/dp_a dx^i, r x m.
  const Field& H_px() const { return H_px_; }
  // H^{ab}, r x r.
  const Field& H_pp() const { return H_pp_; }
  // Pointwise inverse of H^{ab}; evaluation throws SingularHessianError.
  const Field& Htilde() const { return Htilde_; }

 private:
  Field H_, H_x_, H_p_, H_px_, H_pp_, Htilde_;
};

struct RegularityReport {
  double min_abs_det = 0.0;
  double max_inverse_residual = 0.0;  // |H^{ab} Htilde - I| where invertible
  double max_asymmetry = 0.0;
  int min_rank = 0;
  bool passed = false;
};

// Probes off the zero section; passes iff H^{ab} has rank r everywhere and
// the inverse residual stays within 1e-10.
RegularityReport regularity_check(const HamiltonianField& H, int probes, std::uint64_t seed);

struct CartanFunction {
  Field K;  // scalar phase field
};

struct CartanReport {
  double homogeneity_residual = 0.0;  // |K(x, l p) - l K(x, p)|, l in {0.5, 2, 7}
  double euler_residual = 0.0;        // |p_a dK/dp_a - K|
  double min_hessian_eigenvalue = 0.0;  // of the fiber Hessian of K^2
  double tolerance = 1e-10;
  bool passed() const {
    return homogeneity_residual <= tolerance && euler_residual <= tolerance && min_hessian_eigenvalue > 0.0;
  }
};

CartanReport cartan_check(const CartanFunction& K, int probes, std::uint64_t seed);

struct HamiltonSystem {
  AlgebroidModel model;
  MorphismGH gh;
  ExternalForce force;
  HamiltonianField H;
};

// theta_alpha = gtilde[e][alpha] H^e as an r-vector phase field.
Field pc_one_form_field(const HamiltonSystem& sys);
// theta_H at a point; the d.-components vanish.
GeneralizedCovector pc_one_form(const HamiltonSystem& sys, const PhasePoint& at);

// omega_H(U, V) = rho~(U) theta(V) - rho~(V) theta(U) - theta([U, V]).
double pc_two_form(const HamiltonSystem& sys, const GeneralizedVectorField& U, const GeneralizedVectorField& V,
                   const PhasePoint& at);

// E_H = p_a H^a - H.
Field energy_field(const HamiltonSystem& sys);
double energy(const HamiltonSystem& sys, const PhasePoint& at);

// The semispray with Z = (g o h) p and
//   W_a = Htilde[a][e] G[b][e] E_b,
//   E_b = R^i_b (H_i - p_a H^a_i) - v^i d_i theta_b + R^i_b Z^d d_i theta_d + Z^d L^c_{db} theta_c,
// R = rho o h, v = R Z. W only depends on H, so the force only moves the
// split between G and F.
Semispray canonical_semispray_closed_form(const HamiltonSystem& sys);

// The r-vector E_b of the closed form.
Field hamilton_jacobi_terms(const HamiltonSystem& sys);

// Solves omega_H(S, B_j) = -rho~(B_j) E_H over the natural basis at `at`.
// Throws DegenerateSymplecticError when the Gram matrix is singular.
GeneralizedVector canonical_semispray_linear_solve(const HamiltonSystem& sys, const PhasePoint& at);

// max_j |omega_H(S, B_j) + rho~(B_j) E_H| over the natural basis.
double canonical_semispray_residual(const HamiltonSystem& sys, const Semispray& s, const PhasePoint& at);

// The semispray connection of the canonical semispray, built from dW/dp.
PhaseConnection connection_from_hamiltonian(const HamiltonSystem& sys);

// RK4 along the canonical semispray, recording E_H at every sample.
Trajectory integrate_hamilton_jacobi(const HamiltonSystem& sys, const std::vector<double>& x0,
                                     const std::vector<double>& p0, double t_end, double dt);

}  // namespace algh
