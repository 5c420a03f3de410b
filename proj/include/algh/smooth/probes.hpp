#pragma once

#include <cstdint>
#include <vector>

#include "algh/smooth/field.hpp"

namespace algh {

inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr double kZeroSectionRadius = 0.1;

// x uniform on [-1,1]^m.
std::vector<std::vector<double>> base_probes(int m, int count, std::uint64_t seed);

// x uniform on [-1,1]^m, p uniform on [-1,1]^r with |p| >= 0.1 (rejection).
std::vector<PhasePoint> phase_probes(int m, int r, int count, std::uint64_t seed);

}  // namespace algh
