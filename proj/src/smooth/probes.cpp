#include "algh/smooth/probes.hpp"

#include <cmath>
#include <random>

namespace algh {

std::vector<std::vector<double>> base_probes(int m, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> out(static_cast<std::size_t>(count), std::vector<double>(m));
  for (auto& x : out)
    for (double& v : x) v = u(rng);
  return out;
}

std::vector<PhasePoint> phase_probes(int m, int r, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<PhasePoint> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    PhasePoint q{std::vector<double>(m), std::vector<double>(r)};
    for (double& v : q.x) v = u(rng);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& v : q.p) {
        v = u(rng);
        norm += v * v;
      }
    } while (r > 0 && std::sqrt(norm) < kZeroSectionRadius);
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace algh
