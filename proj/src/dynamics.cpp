#include "algh/dynamics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "algh/smooth/linalg.hpp"

namespace algh {

namespace {

// ((g o h) p, W).
class SemisprayField final : public FieldModel<SemisprayField> {
 public:
  SemisprayField(Field g_h, Field W) : g_h_(std::move(g_h)), W_(std::move(W)), r_(g_h_.shape().rows) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    Buf<T> G = g_h_.eval<T>(x, p);
    for (int a = 0; a < r_; ++a) {
      T s(0.0);
      for (int e = 0; e < r_; ++e) s += G[a * r_ + e] * p[e];
      out[a] = s;
    }
    W_.eval<T>(x, p, out.subspan(static_cast<std::size_t>(r_)));
  }

 private:
  Field g_h_, W_;
  int r_;
};

class LiouvilleField final : public FieldModel<LiouvilleField> {
 public:
  explicit LiouvilleField(int r) : r_(r) {}
  template <class T>
  void apply(CSpan<T>, CSpan<T> p, std::span<T> out) const {
    for (int a = 0; a < r_; ++a) {
      out[a] = T(0.0);
      out[r_ + a] = p[a];
    }
  }

 private:
  int r_;
};

// 1/2 gtilde[a][c] dW_b/dp_a (when W is set) plus the three corrections.
class SemisprayConnection final : public FieldModel<SemisprayConnection> {
 public:
  SemisprayConnection(Field W, Field g_h, Field gt_h, Field rho_h, Field L_h)
      : W_(std::move(W)), g_h_(std::move(g_h)), gt_h_(std::move(gt_h)), rho_h_(std::move(rho_h)), L_h_(std::move(L_h)) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    const int m = rho_h_.shape().rows, r = rho_h_.shape().cols;
    Buf<T> R = rho_h_.eval<T>(x, p);
    Buf<T> L = L_h_.eval<T>(x, p);
    Buf<T> G = g_h_.eval<T>(x, p);
    Buf<T> gt = gt_h_.eval<T>(x, p);
    Buf<T> v(r, T(0.0));
    for (int a = 0; a < r; ++a)
      for (int e = 0; e < r; ++e) v[a] += G[a * r + e] * p[e];
    for (auto& o : out) o = T(0.0);
    if (W_.valid()) {
      for (int a = 0; a < r; ++a) {
        Buf<T> dW = partial<T>(W_, x, p, m + a);
        for (int b = 0; b < r; ++b)
          for (int c = 0; c < r; ++c) out[b * r + c] += 0.5 * gt[a * r + c] * dW[b];
      }
    }
    for (int b = 0; b < r; ++b)
      for (int c = 0; c < r; ++c) {
        T s(0.0);
        for (int g = 0; g < r; ++g)
          for (int a = 0; a < r; ++a) s += gt[b * r + g] * L[(g * r + a) * r + c] * v[a];
        out[b * r + c] += 0.5 * s;
      }
    Buf<T> vx(m);
    for (int c = 0; c < r; ++c) {
      for (int i = 0; i < m; ++i) vx[i] = R[i * r + c];
      Buf<T> dG = directional<T>(g_h_, x, p, CSpan<T>(vx), CSpan<T>());
      for (int g = 0; g < r; ++g) {
        T dv(0.0);
        for (int e = 0; e < r; ++e) dv += dG[g * r + e] * p[e];
        for (int b = 0; b < r; ++b) out[b * r + c] -= 0.5 * gt[b * r + g] * dv;
      }
    }
    Buf<T> Rv(m, T(0.0));
    for (int i = 0; i < m; ++i)
      for (int a = 0; a < r; ++a) Rv[i] += R[i * r + a] * v[a];
    Buf<T> dgt = directional<T>(gt_h_, x, p, CSpan<T>(Rv), CSpan<T>());
    for (int k = 0; k < r * r; ++k) out[k] -= 0.5 * dgt[k];
  }

 private:
  Field W_, g_h_, gt_h_, rho_h_, L_h_;
};

// W_b = (Gamma_bc - C_bc) v^c.
class SprayField final : public FieldModel<SprayField> {
 public:
  SprayField(Field gamma, Field corrections, Field g_h)
      : gamma_(std::move(gamma)), corr_(std::move(corrections)), g_h_(std::move(g_h)), r_(g_h_.shape().rows) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    Buf<T> Gm = gamma_.eval<T>(x, p);
    Buf<T> C = corr_.eval<T>(x, p);
    Buf<T> G = g_h_.eval<T>(x, p);
    Buf<T> v(r_, T(0.0));
    for (int a = 0; a < r_; ++a)
      for (int e = 0; e < r_; ++e) v[a] += G[a * r_ + e] * p[e];
    for (int b = 0; b < r_; ++b) {
      T s(0.0);
      for (int c = 0; c < r_; ++c) s += (Gm[b * r_ + c] - C[b * r_ + c]) * v[c];
      out[b] = s;
    }
  }

 private:
  Field gamma_, corr_, g_h_;
  int r_;
};

class BerwaldField final : public FieldModel<BerwaldField> {
 public:
  explicit BerwaldField(Field gamma) : gamma_(std::move(gamma)), r_(gamma_.shape().rows) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    const int m = static_cast<int>(x.size());
    const std::size_t n = static_cast<std::size_t>(r_ * r_);
    for (int a = 0; a < r_; ++a) partial<T>(gamma_, x, p, m + a, out.subspan(a * n, n));
  }

 private:
  Field gamma_;
  int r_;
};

// scale * gtilde[e][c] dF_b/dp_e.
class ForceDeformation final : public FieldModel<ForceDeformation> {
 public:
  ForceDeformation(Field gt_h, Field F, double scale) : gt_h_(std::move(gt_h)), F_(std::move(F)), scale_(scale) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    const int m = static_cast<int>(x.size()), r = static_cast<int>(p.size());
    Buf<T> gt = gt_h_.eval<T>(x, p);
    for (auto& o : out) o = T(0.0);
    for (int e = 0; e < r; ++e) {
      Buf<T> dF = partial<T>(F_, x, p, m + e);
      for (int b = 0; b < r; ++b)
        for (int c = 0; c < r; ++c) out[b * r + c] += scale_ * gt[e * r + c] * dF[b];
    }
  }

 private:
  Field gt_h_, F_;
  double scale_;
};

class RingCurvature final : public FieldModel<RingCurvature> {
 public:
  RingCurvature(Field rho_h, Field L_h, Field gamma, Field base_curvature, Field phi, RingCurvatureForm form)
      : rho_h_(std::move(rho_h)),
        L_h_(std::move(L_h)),
        gamma_(std::move(gamma)),
        R0_(std::move(base_curvature)),
        phi_(std::move(phi)),
        form_(form) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    const int m = rho_h_.shape().rows, r = rho_h_.shape().cols;
    Buf<T> R = rho_h_.eval<T>(x, p);
    Buf<T> L = L_h_.eval<T>(x, p);
    Buf<T> G = gamma_.eval<T>(x, p);
    Buf<T> Phi = phi_.eval<T>(x, p);
    R0_.eval<T>(x, p, out);
    // derivatives of Phi along delta_c, and p-derivatives of Gamma and Phi
    std::vector<Buf<T>> dPhi, pGamma, pPhi;
    Buf<T> vx(m), vp(r);
    for (int c = 0; c < r; ++c) {
      for (int i = 0; i < m; ++i) vx[i] = R[i * r + c];
      for (int b = 0; b < r; ++b) vp[b] = G[b * r + c];
      dPhi.push_back(directional<T>(phi_, x, p, CSpan<T>(vx), CSpan<T>(vp)));
      pGamma.push_back(partial<T>(gamma_, x, p, m + c));
      pPhi.push_back(partial<T>(phi_, x, p, m + c));
    }
    auto at = [r](int b, int c) { return b * r + c; };
    for (int b = 0; b < r; ++b)
      for (int c = 0; c < r; ++c)
        for (int d = 0; d < r; ++d) {
          T s(0.0);
          if (form_ == RingCurvatureForm::corrected) {
            s -= 0.25 * (dPhi[c][at(b, d)] - dPhi[d][at(b, c)]);
            for (int f = 0; f < r; ++f) {
              s += 0.25 * (Phi[at(f, d)] * pGamma[f][at(b, c)] - Phi[at(f, c)] * pGamma[f][at(b, d)]);
              s += 0.0625 * (Phi[at(f, c)] * pPhi[f][at(b, d)] - Phi[at(f, d)] * pPhi[f][at(b, c)]);
            }
          } else {
            // Phi_bd|c - Phi_bc|d with the Berwald h-covariant derivative
            T cov = dPhi[c][at(b, d)] - dPhi[d][at(b, c)];
            for (int a = 0; a < r; ++a) {
              cov += pGamma[a][at(b, c)] * Phi[at(a, d)] - pGamma[a][at(d, c)] * Phi[at(b, a)];
              cov -= pGamma[a][at(b, d)] * Phi[at(a, c)] - pGamma[a][at(c, d)] * Phi[at(b, a)];
            }
            s += 0.25 * cov;
            for (int l = 0; l < r; ++l)
              s += 0.0625 * (Phi[at(l, d)] * pPhi[l][at(b, c)] - Phi[at(l, c)] * pPhi[l][at(b, d)]);
          }
          for (int e = 0; e < r; ++e) s += 0.25 * L[(e * r + c) * r + d] * Phi[at(b, e)];
          out[(b * r + c) * r + d] += s;
        }
  }

 private:
  Field rho_h_, L_h_, gamma_, R0_, phi_;
  RingCurvatureForm form_;
};

// ((rho o eta o h)(g o h) p, W).
class SemisprayVelocity final : public FieldModel<SemisprayVelocity> {
 public:
  SemisprayVelocity(Field anchor, Field g_h, Field W) : anchor_(std::move(anchor)), g_h_(std::move(g_h)), W_(std::move(W)) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    const int m = anchor_.shape().rows, r = anchor_.shape().cols;
    Buf<T> A = anchor_.eval<T>(x, p);
    Buf<T> G = g_h_.eval<T>(x, p);
    Buf<T> v(r, T(0.0));
    for (int a = 0; a < r; ++a)
      for (int e = 0; e < r; ++e) v[a] += G[a * r + e] * p[e];
    for (int i = 0; i < m; ++i) {
      T s(0.0);
      for (int a = 0; a < r; ++a) s += A[i * r + a] * v[a];
      out[i] = s;
    }
    W_.eval<T>(x, p, out.subspan(static_cast<std::size_t>(m)));
  }

 private:
  Field anchor_, g_h_, W_;
};

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
}

using State = std::vector<double>;
using Rhs = std::function<State(double, const State&)>;

State axpy(const State& y, double h, const State& k) {
  State out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + h * k[i];
  return out;
}

// Classical RK4 with a final shortened step. `record` is called for t = 0
// and after every step; a non-finite stage or recorded value, or a stage
// where g o h stops being invertible, throws IntegrationBlowupError.
void rk4(const Rhs& f, State y, double t_end, double dt, const std::function<void(double, const State&)>& record) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be non-negative");
  const long steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  double t = 0.0;
  record(t, y);
  auto stage = [&](double ts, const State& ys) {
    State k;
    try {
      k = f(ts, ys);
    } catch (const NumericalDomainError&) {
      throw IntegrationBlowupError("non-finite state during integration", t);
    } catch (const SingularMorphismError&) {
      throw IntegrationBlowupError("the flow left the region where g o h is invertible", t);
    }
    if (!all_finite(k)) throw IntegrationBlowupError("non-finite state during integration", t);
    return k;
  };
  for (long n = 0; n < steps; ++n) {
    const double h = std::min(dt, t_end - n * dt);
    const double t0 = n * dt;
    State k1 = stage(t0, y);
    State k2 = stage(t0 + 0.5 * h, axpy(y, 0.5 * h, k1));
    State k3 = stage(t0 + 0.5 * h, axpy(y, 0.5 * h, k2));
    State k4 = stage(t0 + h, axpy(y, h, k3));
    State next(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) next[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!all_finite(next)) throw IntegrationBlowupError("non-finite state during integration", t);
    y = std::move(next);
    const double t_next = (n + 1 == steps) ? t_end : (n + 1) * dt;
    try {
      record(t_next, y);
    } catch (const NumericalDomainError&) {
      throw IntegrationBlowupError("non-finite value recorded during integration", t);
    }
    t = t_next;
  }
}

Field anchor_on_phase_space(const AlgebroidModel& model) {
  return compose_base(compose_base(model.rho(), model.eta().forward), model.h().forward);
}

std::vector<double> matvec(const std::vector<double>& A, const std::vector<double>& v, int rows, int cols) {
  std::vector<double> out(static_cast<std::size_t>(rows), 0.0);
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < cols; ++k) out[i] += A[i * cols + k] * v[k];
  return out;
}

// rho(eta(h(c))) g(h(c)) as an m x r matrix, and d(eta o h o c)/dt.
std::pair<std::vector<double>, std::vector<double>> lift_system(const AlgebroidModel& model, const MorphismGH& gh,
                                                                 const BaseCurve& curve, double t) {
  const int m = model.m(), r = model.r();
  const auto c = curve.position(t);
  const auto cdot = curve.velocity(t);
  const auto hc = model.h()(c);
  const auto rho = model.rho().at_base(model.eta()(hc));
  const auto g = gh.g().at_base(hc);
  std::vector<double> A(static_cast<std::size_t>(m * r), 0.0);
  for (int i = 0; i < m; ++i)
    for (int a = 0; a < r; ++a)
      for (int k = 0; k < r; ++k) A[i * r + a] += rho[i * r + k] * g[k * r + a];
  const auto Jh = model.h().jacobian(c);
  const auto Je = model.eta().jacobian(hc);
  const auto hdot = matvec(Jh, cdot, m, m);
  return {A, matvec(Je, hdot, m, m)};
}

}  // namespace

ExternalForce zero_force(int m, int r) {
  return {constant_field(m, r, Shape{r, 1, 1}, std::vector<double>(static_cast<std::size_t>(r), 0.0))};
}

Semispray::Semispray(MorphismGH gh, ExternalForce force, Field W)
    : gh_(std::move(gh)), force_(std::move(force)), W_(std::move(W)) {
  const int r = gh_.r();
  if (W_.size() != r || force_.F.size() != r) throw ShapeError("semispray coefficients must have r entries");
  if (W_.base_dim() != gh_.m() || force_.F.base_dim() != gh_.m()) throw ShapeError("semispray base dimension mismatch");
}

Semispray Semispray::from_combined(MorphismGH gh, ExternalForce force, Field W) {
  return Semispray(std::move(gh), std::move(force), std::move(W));
}

Semispray Semispray::from_coefficients(MorphismGH gh, ExternalForce force, const Field& G) {
  Field W = linear_combination(-2.0, G, 0.5, force.F);
  return Semispray(std::move(gh), std::move(force), std::move(W));
}

Field Semispray::coefficients() const { return linear_combination(0.25, force_.F, -0.5, W_); }

Field Semispray::force_free() const { return linear_combination(1.0, W_, -0.5, force_.F); }

GeneralizedVectorField Semispray::field() const {
  const int r = gh_.r();
  return Field(std::make_shared<SemisprayField>(gh_.g_h(), W_), Shape{2 * r, 1, 1}, Domain::phase, gh_.m(), r);
}

GeneralizedVectorField liouville_field(int m, int r) {
  return Field(std::make_shared<LiouvilleField>(r), Shape{2 * r, 1, 1}, Domain::phase, m, r);
}

namespace {

Field semispray_connection(const AlgebroidModel& model, const MorphismGH& gh, Field W) {
  const int r = model.r();
  if (gh.r() != r || gh.m() != model.m()) throw ShapeError("morphism does not match the model");
  return Field(std::make_shared<SemisprayConnection>(std::move(W), gh.g_h(), gh.gtilde_h(), model.rho_h(), model.L_h()),
               Shape{r, r, 1}, Domain::phase, model.m(), r);
}

}  // namespace

PhaseConnection connection_from_semispray(const AlgebroidModel& model, const Semispray& s, bool include_force) {
  return {semispray_connection(model, s.gh(), include_force ? s.combined() : s.force_free())};
}

Field semispray_connection_corrections(const AlgebroidModel& model, const MorphismGH& gh) {
  return semispray_connection(model, gh, Field());
}

Semispray spray_coefficients(const AlgebroidModel& model, const MorphismGH& gh, const PhaseConnection& conn,
                             const ExternalForce& force) {
  const int r = model.r();
  if (conn.r() != r || conn.m() != model.m()) throw ShapeError("connection does not match the model");
  Field corr = semispray_connection_corrections(model, gh);
  Field W(std::make_shared<SprayField>(conn.Gamma, corr, gh.g_h()), Shape{r, 1, 1}, Domain::phase, model.m(), r);
  return Semispray::from_combined(gh, force, W);
}

Semispray spray_coefficients(const DualMechanicalSystem& sys) {
  return spray_coefficients(sys.model, sys.gh, sys.conn, sys.force);
}

GeneralizedVector semispray_derivation(const AlgebroidModel& model, const Semispray& s, const PhasePoint& at) {
  GeneralizedVectorField S = s.field();
  GeneralizedVector out = gt_bracket(model, liouville_field(model.m(), model.r()), S, at);
  GeneralizedVector Sv = evaluate(S, at);
  for (std::size_t k = 0; k < out.Z.size(); ++k) {
    out.Z[k] -= Sv.Z[k];
    out.Y[k] -= Sv.Y[k];
  }
  return out;
}

DistinguishedLinearConnection berwald_connection(const PhaseConnection& conn) {
  const int m = conn.m(), r = conn.r();
  Field H(std::make_shared<BerwaldField>(conn.Gamma), Shape{r, r, r}, Domain::phase, m, r);
  Field zero = constant_field(m, r, Shape{r, r, r}, std::vector<double>(static_cast<std::size_t>(r * r * r), 0.0));
  return {H, H, zero, zero};
}

DTensor make_dtensor(int r, Valence valence, Field components) {
  for (int n : {valence.horizontal_up, valence.horizontal_down, valence.vertical_down, valence.vertical_up})
    if (n < 0 || n > 2) throw ShapeError("d-tensor valence is limited to 2 slots per group");
  int size = 1;
  for (int k = 0; k < valence.slots(); ++k) size *= r;
  if (components.size() != size) throw ShapeError("d-tensor component count does not match its valence");
  return {valence, std::move(components)};
}

std::vector<double> covariant_derivative(const AlgebroidModel& model, const PhaseConnection& conn,
                                         const DistinguishedLinearConnection& dlc, const DTensor& T,
                                         const GeneralizedVectorField& X, const PhasePoint& at) {
  const int m = model.m(), r = model.r();
  make_dtensor(r, T.valence, T.components);
  const int k = T.valence.slots();
  const std::size_t n = static_cast<std::size_t>(T.components.size());
  const GeneralizedVector Xv = evaluate(X, at);
  const auto Gam = conn.at(at);
  // adapted components of X
  std::vector<double> Zt = Xv.Z, Yt = Xv.Y;
  for (int b = 0; b < r; ++b)
    for (int c = 0; c < r; ++c) Yt[b] -= Gam[b * r + c] * Xv.Z[c];

  const auto Tv = T.components(at);
  const auto Hb = dlc.H_base(at), Hf = dlc.H_fiber(at), Vb = dlc.V_base(at), Vf = dlc.V_fiber(at);
  const auto R = model.rho_h()(at);
  auto idx3 = [r](int i, int j, int l) { return (i * r + j) * r + l; };

  // slot kinds in storage order
  enum Kind { hu, hd, vd, vu };
  std::vector<Kind> kinds;
  for (int s = 0; s < T.valence.horizontal_up; ++s) kinds.push_back(hu);
  for (int s = 0; s < T.valence.horizontal_down; ++s) kinds.push_back(hd);
  for (int s = 0; s < T.valence.vertical_down; ++s) kinds.push_back(vd);
  for (int s = 0; s < T.valence.vertical_up; ++s) kinds.push_back(vu);
  std::vector<std::size_t> stride(static_cast<std::size_t>(k), 1);
  for (int s = k - 2; s >= 0; --s) stride[s] = stride[s + 1] * static_cast<std::size_t>(r);

  std::vector<double> out(n, 0.0);
  std::vector<double> vx(m), vp(r);
  for (int g = 0; g < r; ++g) {
    if (Zt[g] == 0.0) continue;
    for (int i = 0; i < m; ++i) vx[i] = R[i * r + g];
    for (int b = 0; b < r; ++b) vp[b] = Gam[b * r + g];
    auto d = directional<double>(T.components, at.x, at.p, vx, vp);
    for (std::size_t I = 0; I < n; ++I) {
      double s = d[I];
      for (int slot = 0; slot < k; ++slot) {
        const int own = static_cast<int>(I / stride[slot] % r);
        const std::size_t base = I - own * stride[slot];
        for (int q = 0; q < r; ++q) {
          const double t = Tv[base + q * stride[slot]];
          switch (kinds[slot]) {
            case hu: s += Hb[idx3(own, q, g)] * t; break;
            case hd: s -= Hb[idx3(q, own, g)] * t; break;
            case vd: s += Hf[idx3(q, own, g)] * t; break;
            case vu: s -= Hf[idx3(own, q, g)] * t; break;
          }
        }
      }
      out[I] += Zt[g] * s;
    }
  }
  for (int c = 0; c < r; ++c) {
    if (Yt[c] == 0.0) continue;
    auto d = partial<double>(T.components, at.x, at.p, m + c);
    for (std::size_t I = 0; I < n; ++I) {
      double s = d[I];
      for (int slot = 0; slot < k; ++slot) {
        const int own = static_cast<int>(I / stride[slot] % r);
        const std::size_t base = I - own * stride[slot];
        for (int q = 0; q < r; ++q) {
          const double t = Tv[base + q * stride[slot]];
          switch (kinds[slot]) {
            case hu: s += Vb[idx3(q, own, c)] * t; break;
            case hd: s -= Vb[idx3(own, q, c)] * t; break;
            case vd: s += Vf[idx3(own, q, c)] * t; break;
            case vu: s -= Vf[idx3(q, own, c)] * t; break;
          }
        }
      }
      out[I] += Yt[c] * s;
    }
  }
  return out;
}

Field force_deformation(const MorphismGH& gh, const ExternalForce& force) {
  const int r = gh.r();
  return Field(std::make_shared<ForceDeformation>(gh.gtilde_h(), force.F, -0.25), Shape{r, r, 1}, Domain::phase,
               gh.m(), r);
}

Field ring_curvature_field(const AlgebroidModel& model, const MorphismGH& gh, const PhaseConnection& conn,
                           const ExternalForce& force, RingCurvatureForm form) {
  const int r = model.r();
  if (conn.r() != r || gh.r() != r || force.F.size() != r) throw ShapeError("ring curvature: dimension mismatch");
  Field phi(std::make_shared<ForceDeformation>(gh.gtilde_h(), force.F, 1.0), Shape{r, r, 1}, Domain::phase, model.m(),
            r);
  Field R0 = curvature_field(model, conn);
  return Field(std::make_shared<RingCurvature>(model.rho_h(), model.L_h(), conn.Gamma, R0, phi, form), Shape{r, r, r},
               Domain::phase, model.m(), r);
}

std::vector<double> ring_curvature(const AlgebroidModel& model, const MorphismGH& gh, const PhaseConnection& conn,
                                   const ExternalForce& force, const PhasePoint& at) {
  return ring_curvature_field(model, gh, conn, force)(at);
}

PhaseVelocity semispray_velocity(const AlgebroidModel& model, const Semispray& s) {
  const int m = model.m(), r = model.r();
  if (s.r() != r || s.m() != m) throw ShapeError("semispray does not match the model");
  return Field(std::make_shared<SemisprayVelocity>(anchor_on_phase_space(model), s.gh().g_h(), s.combined()),
               Shape{m + r, 1, 1}, Domain::phase, m, r);
}

void integrate_flow(const PhaseVelocity& velocity, const std::vector<double>& x0, const std::vector<double>& p0,
                    double t_end, double dt, Trajectory& out,
                    const std::function<double(const std::vector<double>&, const std::vector<double>&)>& energy) {
  const int m = velocity.base_dim(), r = velocity.fiber_dim();
  if (static_cast<int>(x0.size()) != m || static_cast<int>(p0.size()) != r)
    throw ShapeError("initial state does not match the model");
  out = Trajectory{};
  auto split = [m](const State& y) {
    return PhasePoint{State(y.begin(), y.begin() + m), State(y.begin() + m, y.end())};
  };
  State y0 = x0;
  y0.insert(y0.end(), p0.begin(), p0.end());
  rk4([&](double, const State& y) { return velocity(split(y)); }, y0, t_end, dt,
      [&](double t, const State& y) {
        PhasePoint q = split(y);
        if (energy) out.energy.push_back(energy(q.x, q.p));
        out.t.push_back(t);
        out.x.push_back(std::move(q.x));
        out.p.push_back(std::move(q.p));
      });
}

Trajectory integrate_semispray(const Semispray& s, const AlgebroidModel& model, const std::vector<double>& x0,
                               const std::vector<double>& p0, double t_end, double dt) {
  Trajectory out;
  integrate_flow(semispray_velocity(model, s), x0, p0, t_end, dt, out);
  return out;
}

Trajectory parallel_lift(const MorphismGH& gh, const PhaseConnection& conn, const BaseCurve& curve,
                         const std::vector<double>& u0, double t_end, double dt) {
  const int r = conn.r();
  if (static_cast<int>(u0.size()) != r || gh.r() != r) throw ShapeError("parallel lift: dimension mismatch");
  Trajectory out;
  rk4(
      [&](double t, const State& u) {
        const auto c = curve.position(t);
        const auto Gam = conn.at(PhasePoint{c, u});
        const auto G = gh.g_h()(PhasePoint{c, u});
        const auto v = matvec(G, u, r, r);
        return matvec(Gam, v, r, r);
      },
      u0, t_end, dt,
      [&](double t, const State& u) {
        out.t.push_back(t);
        out.x.push_back(curve.position(t));
        out.p.push_back(u);
      });
  return out;
}

double gh_lift_residual(const AlgebroidModel& model, const MorphismGH& gh, const BaseCurve& curve,
                        const std::vector<double>& times, const std::vector<std::vector<double>>& p_samples) {
  if (times.size() != p_samples.size()) throw ShapeError("gh lift: one momentum sample per time is required");
  const int m = model.m(), r = model.r();
  double worst = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    auto [A, target] = lift_system(model, gh, curve, times[k]);
    const auto lhs = matvec(A, p_samples[k], m, r);
    for (int i = 0; i < m; ++i) worst = std::max(worst, std::abs(lhs[i] - target[i]));
  }
  return worst;
}

GhLift gh_lift(const AlgebroidModel& model, const MorphismGH& gh, const BaseCurve& curve,
               const std::vector<double>& times) {
  const int m = model.m(), r = model.r();
  GhLift out;
  for (double t : times) {
    auto [A, target] = lift_system(model, gh, curve, t);
    Eigen::MatrixXd Am(m, r);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
      b(i) = target[i];
      for (int a = 0; a < r; ++a) Am(i, a) = A[i * r + a];
    }
    Eigen::VectorXd p = Am.completeOrthogonalDecomposition().solve(b);
    out.lift.t.push_back(t);
    out.lift.x.push_back(curve.position(t));
    out.lift.p.emplace_back(p.data(), p.data() + r);
  }
  out.residual = gh_lift_residual(model, gh, curve, times, out.lift.p);
  return out;
}

}  // namespace algh
