#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "sounder/arrays.hpp"
#include "sounder/rng.hpp"
#include "sounder/switching.hpp"

namespace testutil {

inline constexpr double kLambda = 1.0;

inline sounder::ArrayModel half_wave_ula(std::size_t m) { return sounder::make_ula(m, kLambda / 2, kLambda); }

/// Sum over antennas of (position index - center) * (slot - center); zero means no phi/nu coupling.
inline double slot_position_correlation(const sounder::SwitchingSequence& seq) {
  const double c = (static_cast<double>(seq.size()) - 1.0) / 2.0;
  double acc = 0.0;
  for (std::size_t m = 0; m < seq.size(); ++m)
    acc += (static_cast<double>(m) - c) * (static_cast<double>(seq.slot_of(m)) - c);
  return acc;
}

/// First permutation (in shuffle order from `seed`) with zero slot/position correlation.
inline sounder::SwitchingSequence decorrelated_sequence(std::size_t m, double dt, std::uint64_t seed = 1) {
  sounder::Rng rng(seed);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    auto s = sounder::random_init(m, dt, 1, rng);
    if (slot_position_correlation(s) == 0.0) return s;
  }
  throw std::runtime_error("no decorrelated permutation found");
}

}  // namespace testutil
