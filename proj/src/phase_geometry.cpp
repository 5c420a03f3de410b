#include "algh/phase_geometry.hpp"

#include <algorithm>
#include <cmath>

#include "algh/smooth/linalg.hpp"

namespace algh {

namespace {

class StackField final : public FieldModel<StackField> {
 public:
  StackField(Field top, Field bottom) : top_(std::move(top)), bottom_(std::move(bottom)) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    const std::size_t n = static_cast<std::size_t>(top_.size());
    top_.eval<T>(x, p, out.first(n));
    bottom_.eval<T>(x, p, out.subspan(n));
  }

 private:
  Field top_, bottom_;
};

class AdaptedHorizontal final : public FieldModel<AdaptedHorizontal> {
 public:
  AdaptedHorizontal(Field gamma, int alpha) : gamma_(std::move(gamma)), alpha_(alpha), r_(gamma_.shape().rows) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    Buf<T> g = gamma_.eval<T>(x, p);
    for (int a = 0; a < r_; ++a) {
      out[a] = T(a == alpha_ ? 1.0 : 0.0);
      out[r_ + a] = g[a * r_ + alpha_];
    }
  }

 private:
  Field gamma_;
  int alpha_, r_;
};

// [[diag_z I, 0], [lower * block, diag_y I]] acting on (Z, Y).
class BlockEndomorphism final : public FieldModel<BlockEndomorphism> {
 public:
  BlockEndomorphism(Field block, double diag_z, double lower, double diag_y)
      : block_(std::move(block)), r_(block_.shape().rows), dz_(diag_z), lo_(lower), dy_(diag_y) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    Buf<T> b = block_.eval<T>(x, p);
    const int n = 2 * r_;
    for (auto& o : out) o = T(0.0);
    for (int a = 0; a < r_; ++a) {
      out[a * n + a] = T(dz_);
      out[(r_ + a) * n + r_ + a] = T(dy_);
      for (int c = 0; c < r_; ++c) out[(r_ + a) * n + c] = lo_ * b[a * r_ + c];
    }
  }

 private:
  Field block_;
  int r_;
  double dz_, lo_, dy_;
};

class Realization final : public FieldModel<Realization> {
 public:
  Realization(Field rho_h, Field v) : rho_h_(std::move(rho_h)), v_(std::move(v)) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    const int m = rho_h_.shape().rows, r = rho_h_.shape().cols;
    Buf<T> R = rho_h_.eval<T>(x, p);
    Buf<T> v = v_.eval<T>(x, p);
    for (int i = 0; i < m; ++i) {
      T s(0.0);
      for (int a = 0; a < r; ++a) s += R[i * r + a] * v[a];
      out[i] = s;
    }
    for (int a = 0; a < r; ++a) out[m + a] = v[r + a];
  }

 private:
  Field rho_h_, v_;
};

class GTBracket final : public FieldModel<GTBracket> {
 public:
  GTBracket(Field rho_h, Field L_h, Field U, Field V)
      : rho_h_(std::move(rho_h)), L_h_(std::move(L_h)), U_(std::move(U)), V_(std::move(V)) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    const int m = rho_h_.shape().rows, r = rho_h_.shape().cols;
    Buf<T> R = rho_h_.eval<T>(x, p);
    Buf<T> L = L_h_.eval<T>(x, p);
    Buf<T> u = U_.eval<T>(x, p);
    Buf<T> v = V_.eval<T>(x, p);
    Buf<T> xu(m, T(0.0)), xv(m, T(0.0));
    for (int i = 0; i < m; ++i)
      for (int a = 0; a < r; ++a) {
        xu[i] += R[i * r + a] * u[a];
        xv[i] += R[i * r + a] * v[a];
      }
    CSpan<T> pu(u.data() + r, r), pv(v.data() + r, r);
    Buf<T> dv = directional<T>(V_, x, p, CSpan<T>(xu), pu);
    Buf<T> du = directional<T>(U_, x, p, CSpan<T>(xv), pv);
    for (int k = 0; k < 2 * r; ++k) out[k] = dv[k] - du[k];
    for (int g = 0; g < r; ++g)
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) out[g] += L[(g * r + a) * r + b] * u[a] * v[b];
  }

 private:
  Field rho_h_, L_h_, U_, V_;
};

class Curvature final : public FieldModel<Curvature> {
 public:
  Curvature(Field rho_h, Field L_h, Field gamma, CurvatureVariant variant)
      : rho_h_(std::move(rho_h)), L_h_(std::move(L_h)), gamma_(std::move(gamma)) {
    // summed form: +delta_beta(Gamma_{b alpha}) + delta_alpha(Gamma_{b beta})
    s_first_ = variant == CurvatureVariant::first_term_flipped ? -1.0 : 1.0;
    s_second_ = variant == CurvatureVariant::second_term_flipped ? -1.0 : 1.0;
  }
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    const int m = rho_h_.shape().rows, r = rho_h_.shape().cols;
    Buf<T> R = rho_h_.eval<T>(x, p);
    Buf<T> L = L_h_.eval<T>(x, p);
    Buf<T> G = gamma_.eval<T>(x, p);
    // D[a] = derivative of Gamma along the realized delta_a
    std::vector<Buf<T>> D;
    D.reserve(static_cast<std::size_t>(r));
    Buf<T> vx(m), vp(r);
    for (int a = 0; a < r; ++a) {
      for (int i = 0; i < m; ++i) vx[i] = R[i * r + a];
      for (int b = 0; b < r; ++b) vp[b] = G[b * r + a];
      D.push_back(directional<T>(gamma_, x, p, CSpan<T>(vx), CSpan<T>(vp)));
    }
    for (int b = 0; b < r; ++b)
      for (int a = 0; a < r; ++a)
        for (int c = 0; c < r; ++c) {
          T s = s_first_ * D[c][b * r + a] + s_second_ * D[a][b * r + c];
          for (int g = 0; g < r; ++g) s -= L[(g * r + a) * r + c] * G[b * r + g];
          out[(b * r + a) * r + c] = s;
        }
  }

 private:
  Field rho_h_, L_h_, gamma_;
  double s_first_ = 1.0, s_second_ = 1.0;
};

// f(x, M^T p'), optionally followed by M_inv^T on the output vector.
class NewMomenta final : public FieldModel<NewMomenta> {
 public:
  NewMomenta(Field f, Field M, Field M_inv, bool covariant_output)
      : f_(std::move(f)), M_(std::move(M)), M_inv_(std::move(M_inv)), cov_(covariant_output), r_(M_.shape().rows) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> pn, std::span<T> out) const {
    Buf<T> M = M_.eval<T>(x, pn);
    Buf<T> p(r_, T(0.0));
    for (int a = 0; a < r_; ++a)
      for (int k = 0; k < r_; ++k) p[a] += M[k * r_ + a] * pn[k];
    if (!cov_) {
      f_.eval<T>(x, CSpan<T>(p), out);
      return;
    }
    Buf<T> y = f_.eval<T>(x, CSpan<T>(p));
    Buf<T> Mi = M_inv_.eval<T>(x, pn);
    for (int k = 0; k < r_; ++k) {
      T s(0.0);
      for (int b = 0; b < r_; ++b) s += Mi[b * r_ + k] * y[b];
      out[k] = s;
    }
  }

 private:
  Field f_, M_, M_inv_;
  bool cov_;
  int r_;
};

class TransformedConnection final : public FieldModel<TransformedConnection> {
 public:
  TransformedConnection(Field gamma, Field rho_h, Field M, Field M_inv, Field lambda_inv_h)
      : gamma_(std::move(gamma)),
        rho_h_(std::move(rho_h)),
        M_(std::move(M)),
        M_inv_(std::move(M_inv)),
        li_(std::move(lambda_inv_h)) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> pn, std::span<T> out) const {
    const int m = rho_h_.shape().rows, r = rho_h_.shape().cols;
    Buf<T> M = M_.eval<T>(x, pn);
    Buf<T> Mi = M_inv_.eval<T>(x, pn);
    Buf<T> Li = li_.eval<T>(x, pn);
    Buf<T> R = rho_h_.eval<T>(x, pn);
    Buf<T> p(r, T(0.0));
    for (int a = 0; a < r; ++a)
      for (int k = 0; k < r; ++k) p[a] += M[k * r + a] * pn[k];
    Buf<T> G = gamma_.eval<T>(x, CSpan<T>(p));
    // A[b][c] = Gamma_{bc} - R^i_c d_i M[a'][b] p'_{a'}
    Buf<T> A = G;
    Buf<T> vx(m);
    for (int c = 0; c < r; ++c) {
      for (int i = 0; i < m; ++i) vx[i] = R[i * r + c];
      Buf<T> dM = directional<T>(M_, x, pn, CSpan<T>(vx), CSpan<T>());
      for (int b = 0; b < r; ++b)
        for (int k = 0; k < r; ++k) A[b * r + c] -= dM[k * r + b] * pn[k];
    }
    for (int bn = 0; bn < r; ++bn)
      for (int cn = 0; cn < r; ++cn) {
        T s(0.0);
        for (int b = 0; b < r; ++b)
          for (int c = 0; c < r; ++c) s += Mi[b * r + bn] * A[b * r + c] * Li[c * r + cn];
        out[bn * r + cn] = s;
      }
  }

 private:
  Field gamma_, rho_h_, M_, M_inv_, li_;
};

// Column `col` of a matrix base field, as a section.
class ColumnField final : public FieldModel<ColumnField> {
 public:
  ColumnField(Field matrix, int col) : f_(std::move(matrix)), col_(col) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    Buf<T> a = f_.eval<T>(x, p);
    const int n = f_.shape().cols;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i * n + col_];
  }

 private:
  Field f_;
  int col_;
};

// L'^{g'}_{a'b'} = Lambda[g'][g] [t'_a', t'_b']^g for precomputed brackets.
class FrameStructure final : public FieldModel<FrameStructure> {
 public:
  FrameStructure(Field lambda, std::vector<Field> brackets)
      : lambda_(std::move(lambda)), brackets_(std::move(brackets)), r_(lambda_.shape().rows) {}
  template <class T>
  void apply(CSpan<T> y, CSpan<T> p, std::span<T> out) const {
    Buf<T> lam = lambda_.eval<T>(y, p);
    for (int a = 0; a < r_; ++a)
      for (int b = 0; b < r_; ++b) {
        Buf<T> br = brackets_[a * r_ + b].eval<T>(y, p);
        for (int g = 0; g < r_; ++g) {
          T s(0.0);
          for (int k = 0; k < r_; ++k) s += lam[g * r_ + k] * br[k];
          out[(g * r_ + a) * r_ + b] = s;
        }
      }
  }

 private:
  Field lambda_;
  std::vector<Field> brackets_;
  int r_;
};

// Lambda g M^T with M read at h^-1.
class TransformedMorphism final : public FieldModel<TransformedMorphism> {
 public:
  TransformedMorphism(Field g, Field lambda, Field m_on_n)
      : g_(std::move(g)), lambda_(std::move(lambda)), M_(std::move(m_on_n)), r_(g_.shape().rows) {}
  template <class T>
  void apply(CSpan<T> y, CSpan<T> p, std::span<T> out) const {
    Buf<T> g = g_.eval<T>(y, p);
    Buf<T> lam = lambda_.eval<T>(y, p);
    Buf<T> M = M_.eval<T>(y, p);
    for (int a = 0; a < r_; ++a)
      for (int b = 0; b < r_; ++b) {
        T s(0.0);
        for (int k = 0; k < r_; ++k)
          for (int l = 0; l < r_; ++l) s += lam[a * r_ + k] * g[k * r_ + l] * M[b * r_ + l];
        out[a * r_ + b] = s;
      }
  }

 private:
  Field g_, lambda_, M_;
  int r_;
};

void check_index(int k, int r) {
  if (k < 0 || k >= r) throw ShapeError("basis index out of range");
}

void check_vector(const GeneralizedVector& v) {
  if (v.Z.size() != v.Y.size()) throw ShapeError("Z and Y blocks must have equal length");
}

}  // namespace

GeneralizedVectorField make_vector_field(const Field& Z, const Field& Y) {
  if (Z.size() != Y.size() || Z.base_dim() != Y.base_dim()) throw ShapeError("Z and Y blocks must have equal length");
  const int r = Z.size();
  return Field(std::make_shared<StackField>(Z, Y), Shape{2 * r, 1, 1}, Domain::phase, Z.base_dim(), r);
}

GeneralizedVectorField constant_vector_field(int m, const GeneralizedVector& v) {
  check_vector(v);
  const int r = static_cast<int>(v.Z.size());
  std::vector<double> c(v.Z);
  c.insert(c.end(), v.Y.begin(), v.Y.end());
  return constant_field(m, r, Shape{2 * r, 1, 1}, c, Domain::phase);
}

GeneralizedVectorField natural_basis_field(int m, int r, int k) {
  check_index(k, 2 * r);
  std::vector<double> c(static_cast<std::size_t>(2 * r), 0.0);
  c[k] = 1.0;
  return constant_field(m, r, Shape{2 * r, 1, 1}, c, Domain::phase);
}

GeneralizedVector evaluate(const GeneralizedVectorField& f, const PhasePoint& at) {
  std::vector<double> v = f(at);
  const std::size_t r = v.size() / 2;
  return {std::vector<double>(v.begin(), v.begin() + r), std::vector<double>(v.begin() + r, v.end()), at};
}

double pairing(const GeneralizedCovector& w, const GeneralizedVector& v) {
  check_vector(v);
  if (w.zdual.size() != v.Z.size() || w.pdual.size() != v.Y.size()) throw ShapeError("pairing: size mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < v.Z.size(); ++k) s += w.zdual[k] * v.Z[k] + w.pdual[k] * v.Y[k];
  return s;
}

PhaseConnection zero_connection(int m, int r) {
  return {constant_field(m, r, Shape{r, r, 1}, std::vector<double>(static_cast<std::size_t>(r * r), 0.0))};
}

GeneralizedVector adapted_horizontal(const PhaseConnection& conn, int alpha, const PhasePoint& at) {
  const int r = conn.r();
  check_index(alpha, r);
  auto G = conn.at(at);
  GeneralizedVector v{std::vector<double>(r, 0.0), std::vector<double>(r), at};
  v.Z[alpha] = 1.0;
  for (int b = 0; b < r; ++b) v.Y[b] = G[b * r + alpha];
  return v;
}

GeneralizedVectorField adapted_horizontal_field(const PhaseConnection& conn, int alpha) {
  const int r = conn.r();
  check_index(alpha, r);
  return Field(std::make_shared<AdaptedHorizontal>(conn.Gamma, alpha), Shape{2 * r, 1, 1}, Domain::phase, conn.m(), r);
}

GeneralizedCovector dual_adapted(const PhaseConnection& conn, int a, const PhasePoint& at) {
  const int r = conn.r();
  check_index(a, r);
  auto G = conn.at(at);
  GeneralizedCovector w{std::vector<double>(r), std::vector<double>(r, 0.0), at};
  for (int alpha = 0; alpha < r; ++alpha) w.zdual[alpha] = -G[a * r + alpha];
  w.pdual[a] = 1.0;
  return w;
}

EndomorphismField::EndomorphismField(Field matrix) : matrix_(std::move(matrix)), r_(matrix_.shape().rows / 2) {
  const Shape& s = matrix_.shape();
  if (s.rows != s.cols || s.rows % 2 != 0 || s.depth != 1) throw ShapeError("endomorphism matrix must be 2r x 2r");
}

std::vector<double> EndomorphismField::matrix_at(const PhasePoint& q) const {
  return matrix_.eval<double>(CSpan<double>(q.x), CSpan<double>(q.p));
}

GeneralizedVector EndomorphismField::operator()(const GeneralizedVector& v) const {
  check_vector(v);
  if (static_cast<int>(v.Z.size()) != r_) throw ShapeError("vector size does not match the endomorphism");
  auto a = matrix_at(v.at);
  const int n = 2 * r_;
  GeneralizedVector out{std::vector<double>(r_, 0.0), std::vector<double>(r_, 0.0), v.at};
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = 0; k < r_; ++k) s += a[i * n + k] * v.Z[k] + a[i * n + r_ + k] * v.Y[k];
    (i < r_ ? out.Z[i] : out.Y[i - r_]) = s;
  }
  return out;
}

GeneralizedVectorField EndomorphismField::operator()(const GeneralizedVectorField& v) const { return mat_vec(matrix_, v); }

EndomorphismField identity_endomorphism(int m, int r) {
  const int n = 2 * r;
  std::vector<double> id(static_cast<std::size_t>(n * n), 0.0);
  for (int i = 0; i < n; ++i) id[i * n + i] = 1.0;
  return EndomorphismField(constant_field(m, r, Shape{n, n, 1}, id, Domain::phase));
}

EndomorphismField compose(const EndomorphismField& outer, const EndomorphismField& inner) {
  return EndomorphismField(mat_mat(outer.matrix(), inner.matrix()));
}

EndomorphismField combine(double a, const EndomorphismField& e, double b, const EndomorphismField& f) {
  return EndomorphismField(linear_combination(a, e.matrix(), b, f.matrix()));
}

namespace {

EndomorphismField block_endomorphism(const Field& block, int m, int r, double dz, double lower, double dy) {
  return EndomorphismField(Field(std::make_shared<BlockEndomorphism>(block, dz, lower, dy), Shape{2 * r, 2 * r, 1},
                                 Domain::phase, m, r));
}

}  // namespace

EndomorphismField vertical_projector(const PhaseConnection& conn) {
  return block_endomorphism(conn.Gamma, conn.m(), conn.r(), 0.0, -1.0, 1.0);
}

EndomorphismField horizontal_projector(const PhaseConnection& conn) {
  return block_endomorphism(conn.Gamma, conn.m(), conn.r(), 1.0, 1.0, 0.0);
}

EndomorphismField almost_product(const PhaseConnection& conn) {
  return block_endomorphism(conn.Gamma, conn.m(), conn.r(), 1.0, 2.0, -1.0);
}

EndomorphismField almost_tangent(const MorphismGH& gh) {
  return block_endomorphism(gh.gtilde_h(), gh.m(), gh.r(), 0.0, 1.0, 0.0);
}

std::vector<double> realize(const AlgebroidModel& model, const GeneralizedVector& v) {
  check_vector(v);
  return realization_field(model, constant_vector_field(model.m(), v))(v.at);
}

Field realization_field(const AlgebroidModel& model, const GeneralizedVectorField& v) {
  if (v.size() != 2 * model.r() || v.base_dim() != model.m()) throw ShapeError("vector field does not match the model");
  return Field(std::make_shared<Realization>(model.rho_h(), v), Shape{model.m() + model.r(), 1, 1}, Domain::phase,
               model.m(), model.r());
}

GeneralizedVectorField gt_bracket_field(const AlgebroidModel& model, const GeneralizedVectorField& U,
                                        const GeneralizedVectorField& V) {
  for (const Field* f : {&U, &V})
    if (f->size() != 2 * model.r() || f->base_dim() != model.m()) throw ShapeError("vector field does not match the model");
  return Field(std::make_shared<GTBracket>(model.rho_h(), model.L_h(), U, V), Shape{2 * model.r(), 1, 1},
               Domain::phase, model.m(), model.r());
}

GeneralizedVector gt_bracket(const AlgebroidModel& model, const GeneralizedVectorField& U,
                             const GeneralizedVectorField& V, const PhasePoint& at) {
  return evaluate(gt_bracket_field(model, U, V), at);
}

GeneralizedVector nijenhuis(const AlgebroidModel& model, const EndomorphismField& e, const GeneralizedVectorField& U,
                            const GeneralizedVectorField& V, const PhasePoint& at) {
  GeneralizedVectorField eU = e(U), eV = e(V);
  GeneralizedVector a = gt_bracket(model, eU, eV, at);
  GeneralizedVector b = e(e(gt_bracket(model, U, V, at)));
  GeneralizedVector c = e(gt_bracket(model, eU, V, at));
  GeneralizedVector d = e(gt_bracket(model, U, eV, at));
  GeneralizedVector out = a;
  for (std::size_t k = 0; k < a.Z.size(); ++k) {
    out.Z[k] = a.Z[k] + b.Z[k] - c.Z[k] - d.Z[k];
    out.Y[k] = a.Y[k] + b.Y[k] - c.Y[k] - d.Y[k];
  }
  return out;
}

const char* to_string(CurvatureVariant v) {
  switch (v) {
    case CurvatureVariant::summed:
      return "summed";
    case CurvatureVariant::first_term_flipped:
      return "first-term-flipped";
    case CurvatureVariant::second_term_flipped:
      return "second-term-flipped";
  }
  return "unknown";
}

Field curvature_field(const AlgebroidModel& model, const PhaseConnection& conn, CurvatureVariant variant) {
  const int r = model.r();
  if (conn.r() != r || conn.m() != model.m()) throw ShapeError("connection does not match the model");
  return Field(std::make_shared<Curvature>(model.rho_h(), model.L_h(), conn.Gamma, variant), Shape{r, r, r},
               Domain::phase, model.m(), r);
}

std::vector<double> connection_curvature(const AlgebroidModel& model, const PhaseConnection& conn,
                                         const PhasePoint& at) {
  return curvature_field(model, conn)(at);
}

CurvatureAdjudication adjudicate_curvature(const AlgebroidModel& model, const PhaseConnection& conn,
                                           const std::vector<PhasePoint>& points) {
  const int r = model.r();
  CurvatureAdjudication rep;
  std::vector<GeneralizedVectorField> delta;
  for (int a = 0; a < r; ++a) delta.push_back(adapted_horizontal_field(conn, a));
  const std::array<CurvatureVariant, 3> variants = {CurvatureVariant::summed, CurvatureVariant::first_term_flipped,
                                                    CurvatureVariant::second_term_flipped};
  std::array<Field, 3> fields;
  for (int k = 0; k < 3; ++k) fields[k] = curvature_field(model, conn, variants[k]);
  for (const auto& q : points) {
    auto L = model.L_h()(PhasePoint{q.x, {}});
    auto G = conn.at(q);
    std::array<std::vector<double>, 3> R;
    for (int k = 0; k < 3; ++k) R[k] = fields[k](q);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) {
        GeneralizedVector br = gt_bracket(model, delta[a], delta[b], q);
        for (int g = 0; g < r; ++g)
          rep.horizontal_residual = std::max(rep.horizontal_residual, std::abs(br.Z[g] - L[(g * r + a) * r + b]));
        for (int c = 0; c < r; ++c) {
          // vertical part left after removing L^g delta_g
          double y = br.Y[c];
          for (int g = 0; g < r; ++g) y -= L[(g * r + a) * r + b] * G[c * r + g];
          for (int k = 0; k < 3; ++k)
            rep.residual[k] = std::max(rep.residual[k], std::abs(y - R[k][(c * r + a) * r + b]));
        }
      }
  }
  for (int k = 0; k < 3; ++k)
    if (rep.residual[k] <= rep.tolerance) {
      rep.adopted = variants[k];
      rep.any_passed = true;
      break;
    }
  return rep;
}

FiberChange::FiberChange(Field momentum, Field frame) : M_(std::move(momentum)), Lambda_(std::move(frame)) {
  for (const Field* f : {&M_, &Lambda_})
    if (f->domain() != Domain::base || f->shape().rows != f->shape().cols || f->shape().depth != 1)
      throw ShapeError("fiber changes are square base fields");
  if (M_.shape() != Lambda_.shape() || M_.base_dim() != Lambda_.base_dim())
    throw ShapeError("momentum and frame changes must have the same size");
  M_inv_ = inverse_field<SingularMorphismError>(M_, "singular momentum change");
  Lambda_inv_ = inverse_field<SingularMorphismError>(Lambda_, "singular frame change");
}

std::vector<double> FiberChange::old_momenta(const std::vector<double>& x, const std::vector<double>& p_new) const {
  const int n = r();
  auto M = M_.at_base(x);
  std::vector<double> p(n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int k = 0; k < n; ++k) p[a] += M[k * n + a] * p_new[k];
  return p;
}

std::vector<double> FiberChange::new_momenta(const std::vector<double>& x, const std::vector<double>& p_old) const {
  const int n = r();
  auto Mi = M_inv_.at_base(x);
  std::vector<double> p(n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int k = 0; k < n; ++k) p[a] += Mi[k * n + a] * p_old[k];
  return p;
}

double FiberChange::inverse_residual(const std::vector<std::vector<double>>& points) const {
  const int n = r();
  double worst = 0.0;
  for (const auto& x : points)
    for (auto [f, fi] : {std::pair{&M_, &M_inv_}, std::pair{&Lambda_, &Lambda_inv_}}) {
      auto a = f->at_base(x), b = fi->at_base(x);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double s = 0.0;
          for (int k = 0; k < n; ++k) s += a[i * n + k] * b[k * n + j];
          worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
        }
    }
  return worst;
}

FiberChange identity_change(int m, int r) {
  std::vector<double> id(static_cast<std::size_t>(r * r), 0.0);
  for (int a = 0; a < r; ++a) id[a * r + a] = 1.0;
  Field I = constant_field(m, 0, Shape{r, r, 1}, id, Domain::base);
  return FiberChange(I, I);
}

Field in_new_momenta(const Field& f, const FiberChange& change) {
  return Field(std::make_shared<NewMomenta>(f, change.M(), change.M_inv(), false), f.shape(), Domain::phase,
               f.base_dim(), change.r());
}

Field vertical_components_in_new_frame(const Field& Y, const FiberChange& change) {
  if (Y.size() != change.r()) throw ShapeError("vertical components must have r entries");
  return Field(std::make_shared<NewMomenta>(Y, change.M(), change.M_inv(), true), Y.shape(), Domain::phase,
               Y.base_dim(), change.r());
}

PhaseConnection transform_connection(const AlgebroidModel& model, const PhaseConnection& conn,
                                     const FiberChange& change) {
  const int r = model.r();
  if (conn.r() != r || change.r() != r) throw ShapeError("fiber change does not match the connection");
  Field li_h = compose_base(change.Lambda_inv(), model.h().forward);
  return {Field(std::make_shared<TransformedConnection>(conn.Gamma, model.rho_h(), change.M(), change.M_inv(), li_h),
                Shape{r, r, 1}, Domain::phase, model.m(), r)};
}

AlgebroidModel transform_model(const AlgebroidModel& model, const FiberChange& change) {
  const int r = model.r();
  if (change.r() != r) throw ShapeError("fiber change does not match the model");
  Field rho = mat_mat(model.rho(), change.Lambda_inv());
  std::vector<Field> cols, brackets;
  for (int a = 0; a < r; ++a)
    cols.push_back(Field(std::make_shared<ColumnField>(change.Lambda_inv(), a), Shape{r, 1, 1}, Domain::base,
                         model.m(), 0));
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b) brackets.push_back(bracket(model, cols[a], cols[b]));
  Field L(std::make_shared<FrameStructure>(change.Lambda(), brackets), Shape{r, r, r}, Domain::base, model.m(), 0);
  return AlgebroidModel(model.m(), r, rho, L, model.h(), model.eta());
}

MorphismGH transform_morphism(const MorphismGH& gh, const FiberChange& change) {
  Field m_on_n = compose_base(change.M(), gh.h().inverse);
  Field g(std::make_shared<TransformedMorphism>(gh.g(), change.Lambda(), m_on_n), gh.g().shape(), Domain::base, gh.m(),
          0);
  return MorphismGH(g, gh.h());
}

}  // namespace algh
