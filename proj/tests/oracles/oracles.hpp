#pragma once

// Independent reference computations and random fixtures shared by the unit
// tests and the acceptance binary.

#include <cstdint>
#include <utility>
#include <vector>

#include "algh/dynamics.hpp"
#include "algh/phase_geometry.hpp"
#include "algh/smooth/field.hpp"

namespace oracle {

using algh::Field;
using algh::PhasePoint;

// Polynomial of total degree <= 2 in (x, p) for every component.
Field random_phase_polynomial(int m, int r, algh::Shape shape, std::uint64_t seed, double scale = 1.0);

// I + scale * (random quadratic in x) for both the momentum and the frame change.
algh::FiberChange random_fiber_change(int m, int r, std::uint64_t seed, double scale = 0.2);

// Random generalized vector at a point (entries uniform on [-1, 1]).
algh::GeneralizedVector random_vector(const PhasePoint& at, int r, std::uint64_t seed);

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b);
double max_abs_diff(const algh::GeneralizedVector& a, const algh::GeneralizedVector& b);
double max_abs(const std::vector<double>& a);

// Y-block of a semispray read in new frames, from the chain rule for
// p' = M_inv^T p along dx/dt = (rho o h)(g o h) p:
// W'(x, p') = M_inv^T W(x, M^T p') + ((rho o h) v . d_x)(M_inv^T) p.
Field semispray_block_in_new_frame(const algh::AlgebroidModel& model, const algh::MorphismGH& gh, const Field& W,
                                   const algh::FiberChange& change);

// R[b][c][d] read off the vertical part of [delta_c, delta_d] after
// removing L^g_cd delta_g, with every bracket taken through gt_bracket.
std::vector<double> bracket_curvature(const algh::AlgebroidModel& model, const algh::PhaseConnection& conn,
                                      const PhasePoint& at);

// Five-point central derivative of sampled values at index k.
std::vector<double> five_point_derivative(const std::vector<std::vector<double>>& samples, std::size_t k, double dt);

// Five-point central second derivative of sampled values at index k.
std::vector<double> five_point_second_derivative(const std::vector<std::vector<double>>& samples, std::size_t k,
                                                 double dt);

// Textbook RK4 for H = 1/2 (1 + k|x|^2) |p|^2 on R^2 with hand-coded
// dx/dt = dH/dp, dp/dt = -dH/dx. Returns (x1, x2, p1, p2) at every step.
std::vector<std::vector<double>> conformal_hamilton_rk4(double k, const std::vector<double>& x0,
                                                        const std::vector<double>& p0, double t_end, double dt);

// Right-hand sides (fiber, base) of the change relations for the Berwald
// connection B under `change`, at the new-frame point qn.
std::pair<std::vector<double>, std::vector<double>> berwald_change_rhs(const algh::AlgebroidModel& model,
                                                                       const algh::DistinguishedLinearConnection& B,
                                                                       const algh::FiberChange& change,
                                                                       const PhasePoint& qn);

// Row-major products of small dense matrices.
std::vector<double> matmul(const std::vector<double>& a, const std::vector<double>& b, int n);
std::vector<double> identity(int n);

}  // namespace oracle
