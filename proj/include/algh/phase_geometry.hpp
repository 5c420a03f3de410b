#pragma once

// The generalized tangent bundle over the dual bundle: vectors Z^alpha d~_alpha
// + Y_a d.^a in the natural basis, nonlinear connections, the endomorphisms
// built from them, the bracket and the connection curvature.
//
// Convention: the adapted horizontals are delta_alpha = d~_alpha + Gamma_{b alpha} d.^b
// and the vertical projector is V(Z, Y) = (0, Y - Gamma Z).

#include <array>
#include <vector>

#include "algh/algebroid.hpp"
#include "algh/morphism.hpp"
#include "algh/smooth/field.hpp"

namespace algh {

struct GeneralizedVector {
  std::vector<double> Z;
  std::vector<double> Y;
  PhasePoint at;
};

struct GeneralizedCovector {
  std::vector<double> zdual;
  std::vector<double> pdual;
  PhasePoint at;
};

// A phase field of shape 2r holding (Z^1..Z^r, Y_1..Y_r).
using GeneralizedVectorField = Field;

GeneralizedVectorField make_vector_field(const Field& Z, const Field& Y);
// Constant-coefficient extension of a point vector.
GeneralizedVectorField constant_vector_field(int m, const GeneralizedVector& v);
// d~_k for k < r, d.^(k-r) otherwise.
GeneralizedVectorField natural_basis_field(int m, int r, int k);
GeneralizedVector evaluate(const GeneralizedVectorField& f, const PhasePoint& at);

double pairing(const GeneralizedCovector& w, const GeneralizedVector& v);

struct PhaseConnection {
  Field Gamma;  // r x r phase field, Gamma[b][alpha]

  int m() const { return Gamma.base_dim(); }
  int r() const { return Gamma.shape().rows; }
  std::vector<double> at(const PhasePoint& q) const { return Gamma(q); }
};

PhaseConnection zero_connection(int m, int r);

GeneralizedVector adapted_horizontal(const PhaseConnection& conn, int alpha, const PhasePoint& at);
GeneralizedVectorField adapted_horizontal_field(const PhaseConnection& conn, int alpha);
GeneralizedCovector dual_adapted(const PhaseConnection& conn, int a, const PhasePoint& at);

// A field of 2r x 2r matrices acting on stacked (Z, Y).
class EndomorphismField {
 public:
  explicit EndomorphismField(Field matrix);

  int r() const { return r_; }
  const Field& matrix() const { return matrix_; }
  std::vector<double> matrix_at(const PhasePoint& q) const;
  GeneralizedVector operator()(const GeneralizedVector& v) const;
  GeneralizedVectorField operator()(const GeneralizedVectorField& v) const;

 private:
  Field matrix_;
  int r_;
};

EndomorphismField identity_endomorphism(int m, int r);
EndomorphismField compose(const EndomorphismField& outer, const EndomorphismField& inner);
EndomorphismField combine(double a, const EndomorphismField& e, double b, const EndomorphismField& f);

EndomorphismField vertical_projector(const PhaseConnection& conn);
EndomorphismField horizontal_projector(const PhaseConnection& conn);
EndomorphismField almost_product(const PhaseConnection& conn);
EndomorphismField almost_tangent(const MorphismGH& gh);

// Phase-space tangent vector (xdot, pdot) = ((rho o h) Z, Y).
std::vector<double> realize(const AlgebroidModel& model, const GeneralizedVector& v);
Field realization_field(const AlgebroidModel& model, const GeneralizedVectorField& v);

GeneralizedVectorField gt_bracket_field(const AlgebroidModel& model, const GeneralizedVectorField& U,
                                        const GeneralizedVectorField& V);
GeneralizedVector gt_bracket(const AlgebroidModel& model, const GeneralizedVectorField& U,
                             const GeneralizedVectorField& V, const PhasePoint& at);

// N_e(U, V) = [eU, eV] + e^2[U, V] - e[eU, V] - e[U, eV].
GeneralizedVector nijenhuis(const AlgebroidModel& model, const EndomorphismField& e, const GeneralizedVectorField& U,
                            const GeneralizedVectorField& V, const PhasePoint& at);

// Candidate expressions for the curvature of a connection. `summed` adds
// the two derivative terms; the variants flip the sign of one of them.
enum class CurvatureVariant { summed, first_term_flipped, second_term_flipped };

const char* to_string(CurvatureVariant v);

// r x r x r phase field R[b][alpha][beta].
Field curvature_field(const AlgebroidModel& model, const PhaseConnection& conn,
                      CurvatureVariant variant = CurvatureVariant::first_term_flipped);
// R_{b,alpha beta}(at) with [delta_alpha, delta_beta] = L^gamma delta_gamma + R_b d.^b.
std::vector<double> connection_curvature(const AlgebroidModel& model, const PhaseConnection& conn,
                                         const PhasePoint& at);

struct CurvatureAdjudication {
  std::array<double, 3> residual{};  // indexed by CurvatureVariant
  double horizontal_residual = 0.0;  // Z-block of the bracket against L
  double tolerance = 1e-8;
  CurvatureVariant adopted = CurvatureVariant::first_term_flipped;
  bool any_passed = false;
  bool summed_passed() const { return residual[0] <= tolerance; }
};

// Decomposes [delta_alpha, delta_beta] through gt_bracket at the points and
// scores every candidate. The first passing candidate (in enum order) is
// adopted.
CurvatureAdjudication adjudicate_curvature(const AlgebroidModel& model, const PhaseConnection& conn,
                                           const std::vector<PhasePoint>& points);

// Change of fiber frames. M[a'][a] acts on the momenta over M, Lambda[a'][a]
// on the sections of the algebroid over N. New momenta p'_{a'} satisfy
// p_a = M[a'][a] p'_{a'}.
class FiberChange {
 public:
  FiberChange(Field momentum, Field frame);

  int r() const { return M_.shape().rows; }
  const Field& M() const { return M_; }
  const Field& M_inv() const { return M_inv_; }
  const Field& Lambda() const { return Lambda_; }
  const Field& Lambda_inv() const { return Lambda_inv_; }

  std::vector<double> old_momenta(const std::vector<double>& x, const std::vector<double>& p_new) const;
  std::vector<double> new_momenta(const std::vector<double>& x, const std::vector<double>& p_old) const;
  double inverse_residual(const std::vector<std::vector<double>>& points) const;

 private:
  Field M_, M_inv_, Lambda_, Lambda_inv_;
};

FiberChange identity_change(int m, int r);

// Reads a phase field in the new momenta: (x, p') -> f(x, M^T p').
Field in_new_momenta(const Field& f, const FiberChange& change);
// Y-block components (force-like) in the new frame: Y'_{b'} = M_inv[b][b'] Y_b(x, M^T p').
Field vertical_components_in_new_frame(const Field& Y, const FiberChange& change);

// Connection coefficients in the new frames, as functions of (x, p').
PhaseConnection transform_connection(const AlgebroidModel& model, const PhaseConnection& conn,
                                     const FiberChange& change);
// Anchor rho Lambda_inv and structure functions of the new basis sections.
AlgebroidModel transform_model(const AlgebroidModel& model, const FiberChange& change);
// g'^{alpha' a'} = Lambda[alpha'][alpha] g^{alpha a} M[a'][a] (M read at h^-1).
MorphismGH transform_morphism(const MorphismGH& gh, const FiberChange& change);

}  // namespace algh
