#include "algh/models.hpp"

#include <algorithm>
#include <stdexcept>

namespace algh {

namespace {

class ParamReader {
 public:
  ParamReader(const ParamMap& given, std::map<std::string, double> defaults, const std::string& owner)
      : values_(std::move(defaults)) {
    for (const auto& [key, value] : given) {
      auto it = values_.find(key);
      if (it == values_.end()) throw std::invalid_argument("unknown parameter '" + key + "' for " + owner);
      it->second = value;
    }
  }
  double operator[](const std::string& key) const { return values_.at(key); }

 private:
  std::map<std::string, double> values_;
};

const std::map<std::string, std::map<std::string, double>>& model_defaults() {
  static const std::map<std::string, std::map<std::string, double>> d = {
      {"classical-free", {}},
      {"classical-metric", {{"metric_scale", 0.25}}},
      {"poisson-so3", {{"I1", 1.0}, {"I2", 2.0}, {"I3", 3.0}, {"L312_offset", 0.0}}},
      {"deformed-translate", {{"tau1", 0.3}, {"tau2", -0.7}}},
  };
  return d;
}

Field identity_matrix(int m, int r) {
  std::vector<double> id(static_cast<std::size_t>(r * r), 0.0);
  for (int a = 0; a < r; ++a) id[a * r + a] = 1.0;
  return constant_field(m, 0, Shape{r, r, 1}, id, Domain::base);
}

Field zero_structure(int m, int r) {
  return constant_field(m, 0, Shape{r, r, r}, std::vector<double>(static_cast<std::size_t>(r * r * r), 0.0),
                        Domain::base);
}

BuiltinModel classical(const std::string& name, double metric_scale) {
  const int m = 2;
  AlgebroidModel alg(m, m, identity_matrix(m, m), zero_structure(m, m), identity_map(m), identity_map(m));
  Field g = make_base_field(m, Shape{m, m, 1}, [metric_scale](auto x, auto out) {
    auto s = 1.0 + metric_scale * (x[0] * x[0] + x[1] * x[1]);
    out[0] = s;
    out[1] = 0.0 * s;
    out[2] = 0.0 * s;
    out[3] = s;
  });
  std::string summary = metric_scale == 0.0 ? "tangent algebroid of R^2, flat metric"
                                            : "tangent algebroid of R^2, conformal metric g = (1 + s|x|^2) I";
  return {name, summary, alg, MorphismGH(g, identity_map(m))};
}

BuiltinModel so3(const ParamReader& p) {
  const double offset = p["L312_offset"];
  Field L = make_base_field(1, Shape{3, 3, 3}, [offset](auto x, auto out) {
    using T = typename decltype(out)::value_type;
    for (auto& o : out) o = T(0.0) + 0.0 * x[0];
    auto at = [](int g, int a, int b) { return (g * 3 + a) * 3 + b; };
    // L^c_{ab} = eps_{abc}
    out[at(0, 1, 2)] = T(1.0);
    out[at(0, 2, 1)] = T(-1.0);
    out[at(1, 2, 0)] = T(1.0);
    out[at(1, 0, 2)] = T(-1.0);
    out[at(2, 0, 1)] = T(1.0 + offset);
    out[at(2, 1, 0)] = T(-1.0);
  });
  AlgebroidModel alg(1, 3, constant_field(1, 0, Shape{1, 3, 1}, {0.0, 0.0, 0.0}, Domain::base), L, identity_map(1),
                     identity_map(1));
  const double I1 = p["I1"], I2 = p["I2"], I3 = p["I3"];
  if (!(I1 > 0.0 && I2 > 0.0 && I3 > 0.0)) throw std::invalid_argument("poisson-so3: inertia moments must be positive");
  Field g = constant_field(1, 0, Shape{3, 3, 1}, {1.0 / I1, 0, 0, 0, 1.0 / I2, 0, 0, 0, 1.0 / I3}, Domain::base);
  return {"poisson-so3", "Lie-Poisson rigid body: zero anchor, L = epsilon, g = diag(1/I)", alg,
          MorphismGH(g, identity_map(1))};
}

BuiltinModel deformed(const ParamReader& p) {
  Field rho = make_base_field(2, Shape{2, 2, 1}, [](auto y, auto out) {
    out[0] = 1.0 + 0.25 * y[0] * y[0];
    out[1] = 0.0 * y[0];
    out[2] = 0.0 * y[0];
    out[3] = 1.0 + 0.1 * y[1] * y[1];
  });
  Field g = make_base_field(2, Shape{2, 2, 1}, [](auto y, auto out) {
    out[0] = 1.0 + 0.2 * y[0] * y[0];
    out[1] = 0.0 * y[0];
    out[2] = 0.0 * y[0];
    out[3] = 1.0 + 0.3 * y[1] * y[1];
  });
  DiffeoMap h = translation_map({p["tau1"], p["tau2"]});
  AlgebroidModel alg(2, 2, rho, zero_structure(2, 2), h, identity_map(2));
  return {"deformed-translate", "h = x + tau, commuting diagonal anchor, L = 0", alg, MorphismGH(g, h)};
}

}  // namespace

std::vector<ModelInfo> builtin_models() {
  std::vector<ModelInfo> out;
  for (const auto& [name, defaults] : model_defaults()) {
    BuiltinModel model = make_model(name);
    std::vector<std::string> keys;
    for (const auto& kv : defaults) keys.push_back(kv.first);
    out.push_back({name, model.summary, model.algebroid.m(), model.algebroid.r(), keys});
  }
  return out;
}

BuiltinModel make_model(const std::string& name, const ParamMap& params) {
  auto it = model_defaults().find(name);
  if (it == model_defaults().end()) throw std::invalid_argument("unknown model '" + name + "'");
  ParamReader p(params, it->second, name);
  if (name == "classical-free") return classical(name, 0.0);
  if (name == "classical-metric") return classical(name, p["metric_scale"]);
  if (name == "poisson-so3") return so3(p);
  return deformed(p);
}

std::vector<std::string> hamiltonian_names() { return {"kinetic", "potential", "cartan"}; }

std::vector<std::string> force_names() { return {"none", "constant", "linear", "modulated"}; }

Field make_hamiltonian(const BuiltinModel& model, const std::string& name, const ParamMap& params) {
  const int m = model.algebroid.m(), r = model.algebroid.r();
  Field g = model.gh.g_h();
  auto quadratic = [g, r](auto x, auto p) {
    using T = typename decltype(p)::value_type;
    Buf<T> G = g.eval<T>(x, p);
    T s(0.0);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) s += G[a * r + b] * p[a] * p[b];
    return s;
  };
  if (name == "kinetic") {
    ParamReader(params, {}, "hamiltonian kinetic");
    return make_phase_field(m, r, Shape{}, [quadratic](auto x, auto p, auto out) { out[0] = 0.5 * quadratic(x, p); });
  }
  if (name == "potential") {
    const double k = ParamReader(params, {{"k", 1.0}}, "hamiltonian potential")["k"];
    return make_phase_field(m, r, Shape{}, [quadratic, k, m](auto x, auto p, auto out) {
      auto s = 0.5 * quadratic(x, p);
      for (int i = 0; i < m; ++i) s += 0.5 * k * x[i] * x[i];
      out[0] = s;
    });
  }
  if (name == "cartan") {
    ParamReader(params, {}, "hamiltonian cartan");
    return make_phase_field(m, r, Shape{}, [quadratic](auto x, auto p, auto out) {
      auto K = sqrt(quadratic(x, p));
      out[0] = 0.5 * K * K;
    });
  }
  throw std::invalid_argument("unknown hamiltonian '" + name + "'");
}

Field make_force(const BuiltinModel& model, const std::string& name, const ParamMap& params) {
  const int m = model.algebroid.m(), r = model.algebroid.r();
  const Shape shape{r, 1, 1};
  if (name == "none") {
    ParamReader(params, {}, "force none");
    return constant_field(m, r, shape, std::vector<double>(static_cast<std::size_t>(r), 0.0));
  }
  const double c = ParamReader(params, {{"c", 0.5}}, "force " + name)["c"];
  if (name == "constant") return constant_field(m, r, shape, std::vector<double>(static_cast<std::size_t>(r), c));
  if (name == "linear")
    return make_phase_field(m, r, shape, [c](auto, auto p, auto out) {
      for (std::size_t a = 0; a < out.size(); ++a) out[a] = c * p[a];
    });
  if (name == "modulated")
    return make_phase_field(m, r, shape, [c](auto x, auto p, auto out) {
      for (std::size_t a = 0; a < out.size(); ++a) out[a] = c * (1.0 + x[0] * x[0]) * p[a];
    });
  throw std::invalid_argument("unknown force '" + name + "'");
}

}  // namespace algh
