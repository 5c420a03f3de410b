// Command-line front end: models, check, integrate, semispray, curvature.
//
// Exit codes: 0 success, 1 invariant failure, 2 config error,
// 3 I/O error, 4 integration blowup (partial trajectory written).

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "algh/runner.hpp"

namespace {

enum Exit { kOk = 0, kInvariant = 1, kConfig = 2, kIO = 3, kBlowup = 4 };

algh::ModelConfig load(const std::string& path) {
  algh::ModelConfig config = algh::load_config(path);
  if (const char* env = std::getenv("ALGH_SEED")) {
    char* end = nullptr;
    const unsigned long long seed = std::strtoull(env, &end, 10);
    if (*env == '\0' || *end != '\0' || *env == '-') throw algh::ConfigError("ALGH_SEED must be a non-negative integer");
    config.seed = seed;
  }
  return config;
}

int list_models() {
  for (const auto& info : algh::builtin_models()) {
    std::cout << info.name << "  m=" << info.m << " r=" << info.r << "  " << info.summary;
    if (!info.parameters.empty()) {
      std::cout << "  parameters:";
      for (const auto& p : info.parameters) std::cout << ' ' << p;
    }
    std::cout << "\n";
  }
  std::cout << "hamiltonians:";
  for (const auto& h : algh::hamiltonian_names()) std::cout << ' ' << h;
  std::cout << "\nforces:";
  for (const auto& f : algh::force_names()) std::cout << ' ' << f;
  std::cout << "\n";
  return kOk;
}

int run_check(const std::string& path) {
  const algh::RunReport report = algh::run_check(load(path));
  report.print(std::cout);
  return report.passed() ? kOk : kInvariant;
}

void print_summary(std::ostream& out, const algh::IntegrationSummary& s) {
  char line[160];
  std::snprintf(line, sizeof line, "samples %zu  last t %.17g  max energy drift %.3e", s.trajectory.size(),
                s.last_valid_time, s.max_energy_drift);
  out << line << "\n";
  if (s.blown_up) out << "blowup: " << s.message << "\n";
}

int run_integrate(const std::string& path) {
  const algh::ModelConfig config = load(path);
  const algh::IntegrationSummary summary = algh::run_integrate(config);
  if (config.output.empty()) {
    algh::write_trajectory_csv(std::cout, summary.trajectory);
    std::cout.flush();
    if (!std::cout) throw std::ios_base::failure("cannot write the trajectory to stdout");
    print_summary(std::cerr, summary);
  } else {
    std::ofstream file(config.output, std::ios::binary);
    if (!file) throw std::ios_base::failure("cannot open '" + config.output + "' for writing");
    algh::write_trajectory_csv(file, summary.trajectory);
    file.close();
    if (!file) throw std::ios_base::failure("error while writing '" + config.output + "'");
    print_summary(std::cout, summary);
  }
  return summary.blown_up ? kBlowup : kOk;
}

template <class Report>
int run_point_report(const std::string& path, const std::string& at, Report report) {
  const algh::ModelConfig config = load(path);
  const algh::BuiltinModel model = algh::make_model(config.model, config.model_parameters);
  const algh::PhasePoint point = algh::parse_phase_point(at, model.algebroid.m(), model.algebroid.r());
  report(std::cout, config, point);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hamiltonian mechanics on Lie algebroids"};
  app.require_subcommand(1);
  std::string config_path, at;

  auto* models = app.add_subcommand("models", "list the built-in models, Hamiltonians and forces");
  auto* check = app.add_subcommand("check", "run the invariant suite on a configured model");
  check->add_option("--config", config_path, "JSON config file")->required();
  auto* integrate = app.add_subcommand("integrate", "integrate the canonical semispray and write a CSV trajectory");
  integrate->add_option("--config", config_path, "JSON config file")->required();
  auto* semispray = app.add_subcommand("semispray", "print the semispray coefficients at a point");
  semispray->add_option("--config", config_path, "JSON config file")->required();
  semispray->add_option("--at", at, "x1,..,xm,p1,..,pr")->required();
  auto* curvature = app.add_subcommand("curvature", "print the connection curvature at a point");
  curvature->add_option("--config", config_path, "JSON config file")->required();
  curvature->add_option("--at", at, "x1,..,xm,p1,..,pr")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (models->parsed()) return list_models();
    if (check->parsed()) return run_check(config_path);
    if (integrate->parsed()) return run_integrate(config_path);
    if (semispray->parsed()) return run_point_report(config_path, at, algh::print_semispray_report);
    if (curvature->parsed()) return run_point_report(config_path, at, algh::print_curvature_report);
  } catch (const algh::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const algh::ConfigIOError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIO;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIO;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvariant;
  }
  return kConfig;
}
