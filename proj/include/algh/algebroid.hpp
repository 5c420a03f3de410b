#pragma once

// A generalized Lie algebroid in a single chart, restricted to one bundle
// over one base (E = F, N = M) with base maps h, eta: M -> M.

#include <cstdint>
#include <vector>

#include "algh/smooth/diffeo.hpp"
#include "algh/smooth/field.hpp"

namespace algh {

class AlgebroidModel {
 public:
  // rho: base field of shape m x r (rho[i][alpha]); L: base field of shape
  // r x r x r (L[gamma][alpha][beta]). Both live on N and are read through h.
  AlgebroidModel(int m, int r, Field rho, Field L, DiffeoMap h, DiffeoMap eta);

  int m() const { return m_; }
  int r() const { return r_; }
  const Field& rho() const { return rho_; }
  const Field& L() const { return L_; }
  const DiffeoMap& h() const { return h_; }
  const DiffeoMap& eta() const { return eta_; }

  // rho o h and L o h as base fields on M.
  const Field& rho_h() const { return rho_h_; }
  const Field& L_h() const { return L_h_; }

 private:
  int m_;
  int r_;
  Field rho_;
  Field L_;
  DiffeoMap h_;
  DiffeoMap eta_;
  Field rho_h_;
  Field L_h_;
};

// A section z^alpha t_alpha: a base field of shape r.
using Section = Field;

Section basis_section(const AlgebroidModel& model, int alpha);

// [u, v]^gamma = u^alpha v^beta L^gamma_{alpha beta} + theta(u) v^gamma - theta(v) u^gamma,
// where theta(u) f at y = h(x) is (rho o h)(u o h) d(f o h)/dx evaluated at x.
Section bracket(const AlgebroidModel& model, const Section& u, const Section& v);

// (rho o h)(u o h) . d(f o h)/dx evaluated at eta(at).
double composed_anchor(const AlgebroidModel& model, const Section& u, const Field& f, const std::vector<double>& at);

struct AxiomReport {
  double antisymmetry = 0.0;
  double leibniz = 0.0;
  double jacobi = 0.0;
  double anchor_compatibility = 0.0;
  double tolerance = 1e-7;
  bool passed() const {
    return antisymmetry <= tolerance && leibniz <= tolerance && jacobi <= tolerance &&
           anchor_compatibility <= tolerance;
  }
};

AxiomReport check_axioms(const AlgebroidModel& model, int probes, std::uint64_t seed);

// Max residual of the anchor compatibility identity over the given points.
double anchor_compatibility_residual(const AlgebroidModel& model, const std::vector<std::vector<double>>& points);

// Random polynomial of total degree <= 2 in x for every component.
Field random_polynomial_field(int m, Shape shape, std::uint64_t seed, double scale = 1.0);

}  // namespace algh
