#include "algh/hamilton.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "algh/smooth/linalg.hpp"
#include "algh/smooth/probes.hpp"

namespace algh {

namespace {

// out[c][k] = d f_c / dq_{offset + k}.
class Jacobian final : public FieldModel<Jacobian> {
 public:
  Jacobian(Field f, int offset, int count) : f_(std::move(f)), offset_(offset), count_(count) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    const int n = f_.size();
    for (int k = 0; k < count_; ++k) {
      Buf<T> d = partial<T>(f_, x, p, offset_ + k);
      for (int c = 0; c < n; ++c) out[c * count_ + k] = d[c];
    }
  }

 private:
  Field f_;
  int offset_, count_;
};

Field jacobian(const Field& f, int offset, int count) {
  const int n = f.size();
  const Shape shape = n == 1 ? Shape{count, 1, 1} : Shape{n, count, 1};
  return Field(std::make_shared<Jacobian>(f, offset, count), shape, Domain::phase, f.base_dim(), f.fiber_dim());
}

// theta_alpha = gtilde[e][alpha] H^e.
class ThetaField final : public FieldModel<ThetaField> {
 public:
  ThetaField(Field gt_h, Field H_p) : gt_h_(std::move(gt_h)), H_p_(std::move(H_p)), r_(H_p_.size()) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    Buf<T> gt = gt_h_.eval<T>(x, p), Hp = H_p_.eval<T>(x, p);
    for (int a = 0; a < r_; ++a) {
      T s(0.0);
      for (int e = 0; e < r_; ++e) s += gt[e * r_ + a] * Hp[e];
      out[a] = s;
    }
  }

 private:
  Field gt_h_, H_p_;
  int r_;
};

// theta(V) as a scalar field.
class ThetaPairing final : public FieldModel<ThetaPairing> {
 public:
  ThetaPairing(Field theta, Field V) : theta_(std::move(theta)), V_(std::move(V)), r_(theta_.size()) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    Buf<T> th = theta_.eval<T>(x, p), v = V_.eval<T>(x, p);
    T s(0.0);
    for (int a = 0; a < r_; ++a) s += th[a] * v[a];
    out[0] = s;
  }

 private:
  Field theta_, V_;
  int r_;
};

class EnergyField final : public FieldModel<EnergyField> {
 public:
  EnergyField(Field H, Field H_p) : H_(std::move(H)), H_p_(std::move(H_p)) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    Buf<T> h = H_.eval<T>(x, p), Hp = H_p_.eval<T>(x, p);
    T s = -h[0];
    for (std::size_t a = 0; a < p.size(); ++a) s += p[a] * Hp[a];
    out[0] = s;
  }

 private:
  Field H_, H_p_;
};

// W_a = Htilde[a][e] G[b][e] E_b, or E_b itself when `terms_only`.
class CanonicalCombined final : public FieldModel<CanonicalCombined> {
 public:
  CanonicalCombined(const HamiltonianField& H, Field theta, Field rho_h, Field L_h, Field g_h, bool terms_only)
      : terms_only_(terms_only),
        H_x_(H.H_x()),
        H_px_(H.H_px()),
        H_pp_(H.H_pp()),
        theta_(std::move(theta)),
        rho_h_(std::move(rho_h)),
        L_h_(std::move(L_h)),
        g_h_(std::move(g_h)) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    const int m = rho_h_.shape().rows, r = rho_h_.shape().cols;
    Buf<T> R = rho_h_.eval<T>(x, p), L = L_h_.eval<T>(x, p), G = g_h_.eval<T>(x, p);
    Buf<T> Hx = H_x_.eval<T>(x, p), Hpx = H_px_.eval<T>(x, p), Hpp = H_pp_.eval<T>(x, p);
    Buf<T> th = theta_.eval<T>(x, p);
    std::vector<Buf<T>> dth(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) dth[i] = partial<T>(theta_, x, p, i);
    Buf<T> Z(r, T(0.0)), v(m, T(0.0));
    for (int a = 0; a < r; ++a)
      for (int e = 0; e < r; ++e) Z[a] += G[a * r + e] * p[e];
    for (int i = 0; i < m; ++i)
      for (int a = 0; a < r; ++a) v[i] += R[i * r + a] * Z[a];
    Buf<T> E(r, T(0.0));
    for (int b = 0; b < r; ++b) {
      T s(0.0);
      for (int i = 0; i < m; ++i) {
        T dE = Hx[i];
        for (int a = 0; a < r; ++a) dE -= p[a] * Hpx[a * m + i];
        T Zdth(0.0);
        for (int d = 0; d < r; ++d) Zdth += Z[d] * dth[i][d];
        s += R[i * r + b] * (dE + Zdth) - v[i] * dth[i][b];
      }
      for (int d = 0; d < r; ++d)
        for (int c = 0; c < r; ++c) s += Z[d] * L[(c * r + d) * r + b] * th[c];
      E[b] = s;
    }
    if (terms_only_) {
      for (int b = 0; b < r; ++b) out[b] = E[b];
      return;
    }
    Buf<T> Ht(static_cast<std::size_t>(r * r));
    if (!invert<T>(CSpan<T>(Hpp), r, std::span<T>(Ht))) throw SingularHessianError("canonical semispray: singular H^{ab}");
    for (int a = 0; a < r; ++a) {
      T s(0.0);
      for (int e = 0; e < r; ++e) {
        T GE(0.0);
        for (int b = 0; b < r; ++b) GE += G[b * r + e] * E[b];
        s += Ht[a * r + e] * GE;
      }
      out[a] = s;
    }
  }

 private:
  bool terms_only_;
  Field H_x_, H_px_, H_pp_, theta_, rho_h_, L_h_, g_h_;
};

Field theta_field(const AlgebroidModel& model, const MorphismGH& gh, const HamiltonianField& H) {
  const int r = model.r();
  if (H.r() != r || H.m() != model.m() || gh.r() != r) throw ShapeError("hamilton system: dimension mismatch");
  return Field(std::make_shared<ThetaField>(gh.gtilde_h(), H.H_p()), Shape{r, 1, 1}, Domain::phase, model.m(), r);
}

double two_form(const AlgebroidModel& model, const Field& theta, const GeneralizedVectorField& U,
                const GeneralizedVectorField& V, const PhasePoint& at) {
  const int m = model.m(), r = model.r();
  auto along = [&](const GeneralizedVectorField& X, const GeneralizedVectorField& Y) {
    Field pairing(std::make_shared<ThetaPairing>(theta, Y), Shape{}, Domain::phase, m, r);
    const auto t = realize(model, evaluate(X, at));
    const std::vector<double> vx(t.begin(), t.begin() + m), vp(t.begin() + m, t.end());
    return directional<double>(pairing, at.x, at.p, vx, vp)[0];
  };
  const auto br = gt_bracket(model, U, V, at);
  const auto th = theta(at);
  double tb = 0.0;
  for (int a = 0; a < r; ++a) tb += th[a] * br.Z[a];
  return along(U, V) - along(V, U) - tb;
}

double anchored_energy_derivative(const AlgebroidModel& model, const Field& E, const GeneralizedVector& B) {
  const int m = model.m();
  const auto t = realize(model, B);
  const std::vector<double> vx(t.begin(), t.begin() + m), vp(t.begin() + m, t.end());
  return directional<double>(E, B.at.x, B.at.p, vx, vp)[0];
}

}  // namespace

HamiltonianField::HamiltonianField(Field H) : H_(std::move(H)) {
  if (H_.size() != 1 || H_.domain() != Domain::phase) throw ShapeError("HamiltonianField: H must be a scalar phase field");
  const int m = H_.base_dim(), r = H_.fiber_dim();
  H_x_ = jacobian(H_, 0, m);
  H_p_ = jacobian(H_, m, r);
  H_px_ = jacobian(H_p_, 0, m);
  H_pp_ = jacobian(H_p_, m, r);
  Htilde_ = inverse_field<SingularHessianError>(H_pp_, "HamiltonianField: singular H^{ab}");
}

RegularityReport regularity_check(const HamiltonianField& H, int probes, std::uint64_t seed) {
  const int r = H.r();
  RegularityReport rep;
  rep.min_abs_det = INFINITY;
  rep.min_rank = r;
  for (const auto& q : phase_probes(H.m(), r, probes, seed)) {
    const auto hv = H.H_pp()(q);
    Eigen::MatrixXd A(r, r);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) A(a, b) = hv[a * r + b];
    rep.max_asymmetry = std::max(rep.max_asymmetry, (A - A.transpose()).cwiseAbs().maxCoeff());
    rep.min_abs_det = std::min(rep.min_abs_det, std::abs(A.determinant()));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    lu.setThreshold(1e-10);
    const int rank = static_cast<int>(lu.rank());
    rep.min_rank = std::min(rep.min_rank, rank);
    if (rank < r) continue;
    const auto inv = H.Htilde()(q);
    Eigen::MatrixXd Ai(r, r);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) Ai(a, b) = inv[a * r + b];
    const double res = (A * Ai - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff();
    rep.max_inverse_residual = std::max(rep.max_inverse_residual, res);
  }
  rep.passed = rep.min_rank == r && rep.max_inverse_residual <= 1e-10;
  return rep;
}

CartanReport cartan_check(const CartanFunction& K, int probes, std::uint64_t seed) {
  const int m = K.K.base_dim(), r = K.K.fiber_dim();
  const Field Kf = K.K;
  HamiltonianField squared(make_phase_field(m, r, Shape{}, [Kf](auto x, auto p, auto out) {
    using T = typename decltype(out)::value_type;
    Buf<T> k = Kf.eval<T>(x, p);
    out[0] = k[0] * k[0];
  }));
  const Field grad = jacobian(Kf, m, r);
  CartanReport rep;
  rep.min_hessian_eigenvalue = INFINITY;
  for (const auto& q : phase_probes(m, r, probes, seed)) {
    const double k = Kf(q)[0];
    for (double l : {0.5, 2.0, 7.0}) {
      std::vector<double> lp(q.p);
      for (double& v : lp) v *= l;
      rep.homogeneity_residual = std::max(rep.homogeneity_residual, std::abs(Kf(PhasePoint{q.x, lp})[0] - l * k));
    }
    const auto g = grad(q);
    double euler = -k;
    for (int a = 0; a < r; ++a) euler += q.p[a] * g[a];
    rep.euler_residual = std::max(rep.euler_residual, std::abs(euler));
    const auto hv = squared.H_pp()(q);
    Eigen::MatrixXd A(r, r);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) A(a, b) = 0.5 * (hv[a * r + b] + hv[b * r + a]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A, Eigen::EigenvaluesOnly);
    rep.min_hessian_eigenvalue = std::min(rep.min_hessian_eigenvalue, eig.eigenvalues().minCoeff());
  }
  return rep;
}

Field pc_one_form_field(const HamiltonSystem& sys) { return theta_field(sys.model, sys.gh, sys.H); }

GeneralizedCovector pc_one_form(const HamiltonSystem& sys, const PhasePoint& at) {
  return {pc_one_form_field(sys)(at), std::vector<double>(static_cast<std::size_t>(sys.model.r()), 0.0), at};
}

double pc_two_form(const HamiltonSystem& sys, const GeneralizedVectorField& U, const GeneralizedVectorField& V,
                   const PhasePoint& at) {
  return two_form(sys.model, pc_one_form_field(sys), U, V, at);
}

Field energy_field(const HamiltonSystem& sys) {
  return Field(std::make_shared<EnergyField>(sys.H.H(), sys.H.H_p()), Shape{}, Domain::phase, sys.H.m(), sys.H.r());
}

double energy(const HamiltonSystem& sys, const PhasePoint& at) { return energy_field(sys)(at)[0]; }

namespace {

Field canonical_field(const HamiltonSystem& sys, bool terms_only) {
  const int m = sys.model.m(), r = sys.model.r();
  Field theta = theta_field(sys.model, sys.gh, sys.H);
  return Field(
      std::make_shared<CanonicalCombined>(sys.H, theta, sys.model.rho_h(), sys.model.L_h(), sys.gh.g_h(), terms_only),
      Shape{r, 1, 1}, Domain::phase, m, r);
}

}  // namespace

Field hamilton_jacobi_terms(const HamiltonSystem& sys) { return canonical_field(sys, true); }

Semispray canonical_semispray_closed_form(const HamiltonSystem& sys) {
  return Semispray::from_combined(sys.gh, sys.force, canonical_field(sys, false));
}

GeneralizedVector canonical_semispray_linear_solve(const HamiltonSystem& sys, const PhasePoint& at) {
  const int m = sys.model.m(), r = sys.model.r(), n = 2 * r;
  Field theta = theta_field(sys.model, sys.gh, sys.H);
  Field E = energy_field(sys);
  std::vector<GeneralizedVectorField> basis;
  for (int k = 0; k < n; ++k) basis.push_back(natural_basis_field(m, r, k));
  // S_i omega(B_i, B_j) = -rho~(B_j) E_H, written as omega^T S = rhs.
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double w = two_form(sys.model, theta, basis[i], basis[j], at);
      A(j, i) = w;
      A(i, j) = -w;
    }
  for (int i = 0; i < n; ++i) A(i, i) = 0.0;
  for (int j = 0; j < n; ++j) rhs(j) = -anchored_energy_derivative(sys.model, E, evaluate(basis[j], at));
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) throw DegenerateSymplecticError("omega_H is degenerate at the probe");
  const Eigen::VectorXd S = lu.solve(rhs);
  return {std::vector<double>(S.data(), S.data() + r), std::vector<double>(S.data() + r, S.data() + n), at};
}

double canonical_semispray_residual(const HamiltonSystem& sys, const Semispray& s, const PhasePoint& at) {
  const int m = sys.model.m(), r = sys.model.r();
  Field theta = theta_field(sys.model, sys.gh, sys.H);
  Field E = energy_field(sys);
  const GeneralizedVectorField S = s.field();
  double worst = 0.0;
  for (int k = 0; k < 2 * r; ++k) {
    const GeneralizedVectorField B = natural_basis_field(m, r, k);
    const double res = two_form(sys.model, theta, S, B, at) + anchored_energy_derivative(sys.model, E, evaluate(B, at));
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

PhaseConnection connection_from_hamiltonian(const HamiltonSystem& sys) {
  return connection_from_semispray(sys.model, canonical_semispray_closed_form(sys), true);
}

Trajectory integrate_hamilton_jacobi(const HamiltonSystem& sys, const std::vector<double>& x0,
                                     const std::vector<double>& p0, double t_end, double dt) {
  const Field E = energy_field(sys);
  Trajectory out;
  try {
    integrate_flow(semispray_velocity(sys.model, canonical_semispray_closed_form(sys)), x0, p0, t_end, dt, out,
                   [&E](const std::vector<double>& x, const std::vector<double>& p) { return E(PhasePoint{x, p})[0]; });
  } catch (const SingularHessianError& e) {
    throw DegenerateSymplecticError(std::string("Hamilton-Jacobi flow left the regular region: ") + e.what());
  }
  return out;
}

}  // namespace algh
