// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "algh/runner.hpp"
#include "algh/smooth/errors.hpp"
#include "algh/smooth/probes.hpp"
#include "oracles/oracles.hpp"

using namespace algh;
using oracle::max_abs;
using oracle::max_abs_diff;

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr int kProbes = 100;
constexpr std::uint64_t kSeed = kDefaultSeed;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::vector<BuiltinModel> all_models() {
  std::vector<BuiltinModel> out;
  for (const auto& info : builtin_models()) out.push_back(make_model(info.name));
  return out;
}

HamiltonSystem system_for(const BuiltinModel& mod, const std::string& hamiltonian, const std::string& force = "none") {
  return {mod.algebroid, mod.gh, ExternalForce{make_force(mod, force)},
          HamiltonianField(make_hamiltonian(mod, hamiltonian))};
}

double endo_gap(const EndomorphismField& a, const EndomorphismField& b, const std::vector<PhasePoint>& points) {
  double w = 0.0;
  for (const auto& q : points) w = std::max(w, max_abs_diff(a.matrix_at(q), b.matrix_at(q)));
  return w;
}

double max_energy_drift(const Trajectory& tr) {
  double w = 0.0;
  for (double e : tr.energy) w = std::max(w, std::abs(e - tr.energy.front()));
  return w;
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

// --- 1: structure identities -------------------------------------------------

Outcome structure_identities() {
  const auto start = Clock::now();
  double worst = 0.0;
  for (const auto& mod : all_models()) {
    const int m = mod.algebroid.m(), r = mod.algebroid.r();
    const auto points = phase_probes(m, r, kProbes, kSeed);
    const GeneralizedVectorField X = oracle::random_phase_polynomial(m, r, Shape{2 * r, 1, 1}, kSeed + 1, 0.5);
    const GeneralizedVectorField Y = oracle::random_phase_polynomial(m, r, Shape{2 * r, 1, 1}, kSeed + 2, 0.5);
    const PhaseConnection random{oracle::random_phase_polynomial(m, r, Shape{r, r, 1}, kSeed + 3, 0.5)};
    for (const PhaseConnection& conn : {random, connection_from_hamiltonian(system_for(mod, "kinetic", "linear"))}) {
      const EndomorphismField V = vertical_projector(conn), H = horizontal_projector(conn), P = almost_product(conn),
                              J = almost_tangent(mod.gh), I = identity_endomorphism(m, r);
      const EndomorphismField O = combine(0.0, I, 0.0, I), minus_J = combine(-1.0, J, 0.0, J);
      worst = std::max({worst, endo_gap(compose(V, V), V, points), endo_gap(compose(H, H), H, points),
                        endo_gap(combine(1.0, H, 1.0, V), I, points), endo_gap(compose(P, P), I, points),
                        endo_gap(P, combine(2.0, H, -1.0, I), points), endo_gap(P, combine(1.0, I, -2.0, V), points),
                        endo_gap(P, combine(1.0, H, -1.0, V), points), endo_gap(compose(J, J), O, points),
                        endo_gap(compose(J, P), J, points), endo_gap(compose(P, J), minus_J, points),
                        endo_gap(compose(J, H), J, points), endo_gap(compose(H, J), O, points),
                        endo_gap(compose(J, V), O, points), endo_gap(compose(V, J), J, points)});
      for (const auto& q : points) {
        const auto nj = nijenhuis(mod.algebroid, J, X, Y, q);
        worst = std::max({worst, max_abs(nj.Z), max_abs(nj.Y)});
      }
    }
  }
  const double t = seconds_since(start);
  return {worst <= 1e-10 && t < 10.0, "max residual " + sci(worst) + " (<= 1e-10), " + sci(t) + " s (< 10 s)"};
}

// --- 2: bracket and curvature consistency -----------------------------------

Outcome bracket_consistency() {
  double worst = 0.0, oracle_gap = 0.0;
  std::string adopted;
  bool summed_holds = true;
  for (const auto& info : builtin_models()) {
    ModelConfig c;
    c.model = info.name;
    c.force = "modulated";
    const RunReport report = run_check(c);
    for (const auto& check : report.checks)
      if (check.group == "phase geometry" && !check.lower_bound && check.threshold == 1e-8)
        worst = std::max(worst, check.passed ? check.residual : INFINITY);
    if (!report.curvature.any_passed) worst = INFINITY;
    summed_holds = summed_holds && report.curvature.summed_passed();
    if (adopted.empty()) adopted = report.curvature.any_passed ? to_string(report.curvature.adopted) : "none";
    if (report.curvature.any_passed && adopted != to_string(report.curvature.adopted)) adopted = "inconsistent";

    // the adopted curvature against brackets of the adapted basis, on the Hamiltonian connection
    const BuiltinModel mod = make_model(info.name);
    const HamiltonSystem sys = system_for(mod, "kinetic", "modulated");
    const PhaseConnection conn = connection_from_hamiltonian(sys);
    for (const auto& q : phase_probes(mod.algebroid.m(), mod.algebroid.r(), 30, kSeed))
      oracle_gap = std::max(oracle_gap, max_abs_diff(connection_curvature(mod.algebroid, conn, q),
                                                     oracle::bracket_curvature(mod.algebroid, conn, q)));
  }
  worst = std::max(worst, oracle_gap);
  const bool ok = worst <= 1e-8 && adopted != "none" && adopted != "inconsistent";
  return {ok, "max residual " + sci(worst) + " (<= 1e-8); curvature candidates: summed " +
                  (summed_holds ? "holds" : "fails") + ", adopted " + adopted};
}

// --- 3: algebroid axioms -----------------------------------------------------

Outcome algebroid_axioms() {
  bool ok = true;
  double anti = 0.0, leib = 0.0, jac = 0.0, anchor = 0.0;
  for (const auto& mod : all_models()) {
    const AxiomReport a = check_axioms(mod.algebroid, kProbes, kSeed);
    anti = std::max(anti, a.antisymmetry);
    leib = std::max(leib, a.leibniz);
    jac = std::max(jac, a.jacobi);
    anchor = std::max(anchor, a.anchor_compatibility);
  }
  ok = anti == 0.0 && leib <= 1e-8 && jac <= 1e-7 && anchor <= 1e-8;
  return {ok, "antisymmetry " + sci(anti) + ", leibniz " + sci(leib) + ", jacobi " + sci(jac) + ", anchor " +
                  sci(anchor)};
}

// --- 4: closed form against the linear solve ---------------------------------

Outcome closed_form_vs_solve() {
  double agreement = 0.0, residual = 0.0;
  for (const auto& mod : all_models())
    for (const auto& h : hamiltonian_names())
      for (const std::string& f : {"none", "modulated"}) {
        const HamiltonSystem sys = system_for(mod, h, f);
        const Semispray S = canonical_semispray_closed_form(sys);
        const GeneralizedVectorField field = S.field();
        for (const auto& q : phase_probes(mod.algebroid.m(), mod.algebroid.r(), kProbes, kSeed)) {
          agreement = std::max(agreement, max_abs_diff(evaluate(field, q), canonical_semispray_linear_solve(sys, q)));
          residual = std::max(residual, canonical_semispray_residual(sys, S, q));
        }
      }
  return {agreement <= 1e-8 && residual <= 1e-10,
          "componentwise gap " + sci(agreement) + " (<= 1e-8), defining-equation residual " + sci(residual) +
              " (<= 1e-10)"};
}

// --- 5: classical reduction ---------------------------------------------------

Outcome classical_reduction() {
  const auto start = Clock::now();
  const double s = 0.25;
  const BuiltinModel metric = make_model("classical-metric", {{"metric_scale", s}});
  const HamiltonSystem sys = system_for(metric, "kinetic");
  double worst = 0.0;
  for (const auto& [x0, p0] : {std::pair<std::vector<double>, std::vector<double>>{{0.4, -0.6}, {0.9, 0.3}},
                               {{-0.2, 0.1}, {-0.5, 1.1}}, {{1.0, 0.5}, {0.3, -0.7}}}) {
    const Trajectory tr = integrate_hamilton_jacobi(sys, x0, p0, 1.0, 1e-3);
    const auto ref = oracle::conformal_hamilton_rk4(s, x0, p0, 1.0, 1e-3);
    if (ref.size() != tr.size()) return {false, "sample counts differ"};
    for (std::size_t k = 0; k < tr.size(); ++k) {
      std::vector<double> y = tr.x[k];
      y.insert(y.end(), tr.p[k].begin(), tr.p[k].end());
      worst = std::max(worst, max_abs_diff(y, ref[k]));
    }
  }
  const double t = seconds_since(start);
  return {worst <= 1e-6 && t < 5.0, "max state error " + sci(worst) + " (<= 1e-6), " + sci(t) + " s (< 5 s)"};
}

// --- 6: conservation and convergence order ------------------------------------

Outcome conservation() {
  double drift = 0.0, casimir = 0.0, potential_relative = 0.0;
  int potential_escapes = 0;
  for (const auto& mod : all_models()) {
    const int m = mod.algebroid.m(), r = mod.algebroid.r();
    std::vector<double> x0(m, 0.2), p0(r, 0.1);
    p0[0] = -0.08;
    for (const std::string& h : {"kinetic", "cartan"}) {
      const Trajectory tr = integrate_hamilton_jacobi(system_for(mod, h), x0, p0, 10.0, 1e-3);
      drift = std::max(drift, max_energy_drift(tr));
      if (mod.name == "poisson-so3") {
        auto norm = [](const std::vector<double>& p) { return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]); };
        for (const auto& p : tr.p) casimir = std::max(casimir, std::abs(norm(p) - norm(p0)));
      }
    }
    // reported only: the potential runs grow exponentially or escape
    try {
      const Trajectory tr = integrate_hamilton_jacobi(system_for(mod, "potential"), x0, p0, 10.0, 1e-3);
      double scale = 0.0;
      for (double e : tr.energy) scale = std::max(scale, std::abs(e));
      potential_relative = std::max(potential_relative, max_energy_drift(tr) / scale);
    } catch (const IntegrationBlowupError&) {
      ++potential_escapes;
    }
  }

  const BuiltinModel mod = make_model("classical-metric");
  const HamiltonSystem sys = system_for(mod, "kinetic");
  const std::vector<double> x0 = {0.4, -0.6}, p0 = {0.9, 0.3};
  const double dt = 0.01;
  const Trajectory full = integrate_hamilton_jacobi(sys, x0, p0, 1.0, dt);
  const Trajectory half = integrate_hamilton_jacobi(sys, x0, p0, 1.0, dt / 2);
  const Trajectory ref = integrate_hamilton_jacobi(sys, x0, p0, 1.0, dt / 4);
  auto error = [&](const Trajectory& tr, std::size_t stride) {
    double e = 0.0;
    for (std::size_t k = 0; k < full.size(); ++k)
      e = std::max({e, max_abs_diff(tr.x[k * stride], ref.x[k * 4]), max_abs_diff(tr.p[k * stride], ref.p[k * 4])});
    return e;
  };
  const double order = std::log2(error(full, 1) / error(half, 2));

  const bool ok = drift <= 1e-8 && casimir <= 1e-8 && std::abs(order - 4.0) <= 0.2;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", order);
  return {ok, "energy drift " + sci(drift) + " (<= 1e-8), casimir drift " + sci(casimir) + " (<= 1e-8), order " + buf +
                  " (4 +- 0.2); potential runs: relative drift " + sci(potential_relative) + ", " +
                  std::to_string(potential_escapes) + " escaped (reported)"};
}

// --- 7: tensoriality ------------------------------------------------------------

Outcome tensoriality() {
  double semispray_law = 0.0, hamilton_law = 0.0, berwald_law = 0.0, spray_law = 0.0;
  std::uint64_t seed = kSeed + 100;
  for (const auto& mod : all_models()) {
    const int m = mod.algebroid.m(), r = mod.algebroid.r();
    const auto points = phase_probes(m, r, 30, kSeed);
    const FiberChange change = oracle::random_fiber_change(m, r, ++seed);
    const AlgebroidModel model2 = transform_model(mod.algebroid, change);
    const MorphismGH gh2 = transform_morphism(mod.gh, change);

    // semispray connection
    const ExternalForce F{oracle::random_phase_polynomial(m, r, Shape{r, 1, 1}, ++seed, 0.3)};
    const Semispray s =
        Semispray::from_combined(mod.gh, F, oracle::random_phase_polynomial(m, r, Shape{r, 1, 1}, ++seed, 0.5));
    const Semispray s2 =
        Semispray::from_combined(gh2, ExternalForce{vertical_components_in_new_frame(F.F, change)},
                                 oracle::semispray_block_in_new_frame(mod.algebroid, mod.gh, s.combined(), change));
    for (bool with_force : {false, true}) {
      const PhaseConnection expect =
          transform_connection(mod.algebroid, connection_from_semispray(mod.algebroid, s, with_force), change);
      const PhaseConnection got = connection_from_semispray(model2, s2, with_force);
      for (const auto& q : points) semispray_law = std::max(semispray_law, max_abs_diff(got.at(q), expect.at(q)));
    }

    // Hamiltonian connection
    for (const auto& h : hamiltonian_names()) {
      const HamiltonSystem sys = system_for(mod, h, "linear");
      const HamiltonSystem moved{model2, gh2, ExternalForce{vertical_components_in_new_frame(sys.force.F, change)},
                                 HamiltonianField(in_new_momenta(sys.H.H(), change))};
      const PhaseConnection expect = transform_connection(mod.algebroid, connection_from_hamiltonian(sys), change);
      const PhaseConnection got = connection_from_hamiltonian(moved);
      for (const auto& q : points) hamilton_law = std::max(hamilton_law, max_abs_diff(got.at(q), expect.at(q)));
    }

    // Berwald coefficients; the base relation needs Lambda o h = M
    const PhaseConnection conn{oracle::random_phase_polynomial(m, r, Shape{r, r, 1}, ++seed, 0.5)};
    const auto B = berwald_connection(conn);
    const FiberChange diagonal(change.M(), change.M());
    const bool h_is_identity = mod.name != "deformed-translate";
    for (auto [ch, check_base] : {std::pair{&change, false}, std::pair{&diagonal, h_is_identity}}) {
      const auto B2 = berwald_connection(transform_connection(mod.algebroid, conn, *ch));
      for (const auto& q : points) {
        auto [f, b] = oracle::berwald_change_rhs(mod.algebroid, B, *ch, q);
        berwald_law = std::max(berwald_law, max_abs_diff(B2.H_fiber(q), f));
        if (check_base) berwald_law = std::max(berwald_law, max_abs_diff(B2.H_base(q), b));
      }
    }

    // spray coefficients
    const Semispray spray = spray_coefficients(mod.algebroid, mod.gh, conn, zero_force(m, r));
    const Semispray spray2 =
        spray_coefficients(model2, gh2, transform_connection(mod.algebroid, conn, change), zero_force(m, r));
    const Field expect = oracle::semispray_block_in_new_frame(mod.algebroid, mod.gh, spray.combined(), change);
    for (const auto& q : points) {
      const auto G2 = spray2.coefficients()(q), W = expect(q);
      for (int b = 0; b < r; ++b) spray_law = std::max(spray_law, std::abs(-2.0 * G2[b] - W[b]));
    }
  }
  const double worst = std::max({semispray_law, hamilton_law, berwald_law, spray_law});
  return {worst <= 1e-8, "semispray connection " + sci(semispray_law) + ", hamiltonian connection " +
                             sci(hamilton_law) + ", berwald " + sci(berwald_law) + ", spray " + sci(spray_law) +
                             " (<= 1e-8)"};
}

// --- 8: homogeneity ---------------------------------------------------------------

Outcome homogeneity() {
  double euler = 0.0, energy_gap = 0.0;
  bool cartan_ok = true;
  for (const auto& mod : all_models()) {
    const int m = mod.algebroid.m(), r = mod.algebroid.r();
    const Field half_square = make_hamiltonian(mod, "cartan");
    const Field K = make_phase_field(m, r, Shape{}, [half_square](auto x, auto p, auto out) {
      out[0] = sqrt(2.0 * half_square.eval(x, p)[0]);
    });
    const CartanReport rep = cartan_check({K}, kProbes, kSeed);
    euler = std::max(euler, rep.euler_residual);
    cartan_ok = cartan_ok && rep.passed();
    const HamiltonSystem sys = system_for(mod, "cartan");
    for (const auto& q : phase_probes(m, r, kProbes, kSeed))
      energy_gap = std::max(energy_gap, std::abs(energy(sys, q) - half_square(q)[0]));
  }

  const double s = 0.25, dt = 1e-3;
  const BuiltinModel metric = make_model("classical-metric", {{"metric_scale", s}});
  const Trajectory tr = integrate_hamilton_jacobi(system_for(metric, "cartan"), {0.5, 0.1}, {-0.4, 0.8}, 1.0, dt);
  // geodesics of the conformal metric exp(2 phi) I, phi = -1/2 log(1 + s|x|^2)
  double geodesic = 0.0;
  for (std::size_t k = 2; k + 2 < tr.size(); k += 10) {
    const auto v = oracle::five_point_derivative(tr.x, k, dt);
    const auto a = oracle::five_point_second_derivative(tr.x, k, dt);
    const auto& x = tr.x[k];
    const double conf = 1.0 + s * (x[0] * x[0] + x[1] * x[1]);
    const double dphi[2] = {-s * x[0] / conf, -s * x[1] / conf};
    const double dphi_v = dphi[0] * v[0] + dphi[1] * v[1], v2 = v[0] * v[0] + v[1] * v[1];
    for (int i = 0; i < 2; ++i) geodesic = std::max(geodesic, std::abs(a[i] + 2.0 * dphi_v * v[i] - v2 * dphi[i]));
  }
  const bool ok = cartan_ok && euler <= 1e-10 && energy_gap <= 1e-12 && geodesic <= 1e-6;
  return {ok, "euler " + sci(euler) + " (<= 1e-10), energy of K^2/2 " + sci(energy_gap) + " (<= 1e-12), geodesic " +
                  sci(geodesic) + " (<= 1e-6)"};
}

// --- 9: force-split invariance ------------------------------------------------------

Outcome force_split() {
  bool identical = true;
  double deformation = 0.0;
  for (const auto& mod : all_models()) {
    const int m = mod.algebroid.m(), r = mod.algebroid.r();
    std::vector<double> x0(m, 0.2), p0(r, 0.1);
    p0[0] = -0.08;
    const Trajectory bare = integrate_hamilton_jacobi(system_for(mod, "kinetic"), x0, p0, 1.0, 1e-3);
    for (const auto& f : force_names()) {
      const HamiltonSystem sys = system_for(mod, "kinetic", f);
      const Trajectory forced = integrate_hamilton_jacobi(sys, x0, p0, 1.0, 1e-3);
      identical = identical && forced.t == bare.t && forced.x == bare.x && forced.p == bare.p;

      // with and without the force term, against -1/4 gtilde dF/dp computed here
      const Semispray S = canonical_semispray_closed_form(sys);
      const PhaseConnection with = connection_from_semispray(mod.algebroid, S, true);
      const PhaseConnection ring = connection_from_semispray(mod.algebroid, S, false);
      for (const auto& q : phase_probes(m, r, kProbes, kSeed)) {
        const auto gt = mod.gh.gtilde_h()(q), gw = with.at(q), gr = ring.at(q);
        std::vector<std::vector<double>> dF(r);
        for (int e = 0; e < r; ++e) dF[e] = partial<double>(sys.force.F, q.x, q.p, m + e);
        for (int b = 0; b < r; ++b)
          for (int c = 0; c < r; ++c) {
            double phi = 0.0;
            for (int e = 0; e < r; ++e) phi += gt[e * r + c] * dF[e][b];
            deformation = std::max(deformation, std::abs(gr[b * r + c] - gw[b * r + c] + 0.25 * phi));
          }
      }
    }
  }
  return {identical && deformation <= 1e-10, std::string("trajectories ") + (identical ? "bitwise equal" : "differ") +
                                                 ", deformation residual " + sci(deformation) + " (<= 1e-10)"};
}

// --- 10: command line -----------------------------------------------------------------

class ScratchDir {
 public:
  ScratchDir() : path_(fs::temp_directory_path() / ("algh_acceptance_" + std::to_string(::getpid()))) {
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path file = path_ / name;
    std::ofstream(file, std::ios::binary) << text;
    return file;
  }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int cli(const std::string& args, const fs::path& out) {
  const std::string cmd = "'" ALGH_CLI_PATH "' " + args + " > '" + out.string() + "' 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome command_line() {
  ScratchDir dir;
  const fs::path out = dir / "stdout.txt";
  bool reproducible = true, exits = true;
  const auto start = Clock::now();
  for (const auto& info : builtin_models()) {
    const fs::path config = dir.write(info.name + ".json", "{\"model\": \"" + info.name + "\"}");
    exits = exits && cli("check --config '" + config.string() + "'", out) == 0;
    const std::string first = slurp(out);
    exits = exits && cli("check --config '" + config.string() + "'", out) == 0;
    reproducible = reproducible && !first.empty() && slurp(out) == first;
  }
  const double suite_seconds = seconds_since(start) / 2.0;

  const fs::path traj = dir / "traj.csv";
  const fs::path run = dir.write("run.json", R"({"model": "poisson-so3", "model.I2": 2, "model.I3": 3,
      "x0": [0], "p0": [1, 0.01, 0], "t_end": 10, "output": ")" + traj.string() + R"("})");
  exits = exits && cli("integrate --config '" + run.string() + "'", out) == 0;
  const std::string csv = slurp(traj);
  exits = exits && cli("integrate --config '" + run.string() + "'", out) == 0;
  reproducible = reproducible && !csv.empty() && slurp(traj) == csv;

  const fs::path corrupted = dir.write("corrupted.json", R"({"model": "poisson-so3", "model.L312_offset": 0.05})");
  exits = exits && cli("check --config '" + corrupted.string() + "'", out) == 1;
  for (const char* bad : {"{", R"({"unknown": 1})", R"({"probes": 0})", R"({"x0": [0], "p0": [1, 2], "dt": 0})",
                          R"({"model": "no-such-model"})"})
    exits = exits && cli("check --config '" + dir.write("bad.json", bad).string() + "'", out) == 2;

  const bool ok = reproducible && exits && suite_seconds < 60.0;
  return {ok, std::string("byte-reproducible ") + (reproducible ? "yes" : "no") + ", exit codes " +
                  (exits ? "as specified" : "wrong") + ", default suite " + sci(suite_seconds) + " s (< 60 s)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"structure identities", structure_identities},
      {"bracket and curvature consistency", bracket_consistency},
      {"algebroid axioms", algebroid_axioms},
      {"closed-form vs linear-solve semispray", closed_form_vs_solve},
      {"classical reduction", classical_reduction},
      {"conservation and RK4 order", conservation},
      {"tensoriality", tensoriality},
      {"homogeneity and geodesics", homogeneity},
      {"force-split invariance", force_split},
      {"command-line determinism", command_line},
  };
  bool all = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all = all && o.passed;
    std::printf("criterion %2zu %s  %s: %s\n", k + 1, o.passed ? "PASS" : "FAIL", criteria[k].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
