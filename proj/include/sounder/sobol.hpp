// sobol.hpp
// Sobol low-discrepancy points (Joe-Kuo direction numbers, Gray-code order)
// with an optional random digital shift.

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "core.hpp"
#include "rng.hpp"

namespace sounder {

class SobolSequence {
 public:
  static constexpr std::size_t kMaxDimensions = 8;
  static constexpr int kBits = 32;

  // shift_seed == 0 gives the unshifted sequence; any other value applies a
  // per-dimension XOR shift derived from it.
  explicit SobolSequence(std::size_t dimensions, std::uint64_t shift_seed = 0) : dims_(dimensions) {
    require(dimensions >= 1 && dimensions <= kMaxDimensions, "Sobol dimension out of supported range");
    for (std::size_t d = 0; d < dims_; ++d) {
      auto& v = directions_[d];
      if (d == 0) {
        for (int i = 1; i <= kBits; ++i) v[i] = std::uint32_t{1} << (kBits - i);
      } else {
        const auto& p = kPolys[d - 1];
        for (int i = 1; i <= p.degree; ++i) v[i] = p.m[i - 1] << (kBits - i);
        for (int i = p.degree + 1; i <= kBits; ++i) {
          std::uint32_t x = v[i - p.degree] ^ (v[i - p.degree] >> p.degree);
          for (int k = 1; k < p.degree; ++k)
            if ((p.a >> (p.degree - 1 - k)) & 1U) x ^= v[i - k];
          v[i] = x;
        }
      }
      shift_[d] = shift_seed == 0 ? 0U : static_cast<std::uint32_t>(mix_seed(shift_seed, d) >> 32);
    }
  }

  std::size_t dimensions() const { return dims_; }

  /// First n points; points[i][d] in [0, 1).
  std::vector<std::array<double, kMaxDimensions>> generate(std::size_t n) const {
    std::vector<std::array<double, kMaxDimensions>> out(n);
    std::array<std::uint32_t, kMaxDimensions> x{};
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) {
        // Gray code: flip the direction number of the lowest zero bit of i-1.
        std::size_t c = 1;
        std::size_t value = i - 1;
        while (value & 1U) {
          value >>= 1;
          ++c;
        }
        require(c <= static_cast<std::size_t>(kBits), "Sobol sequence exhausted");
        for (std::size_t d = 0; d < dims_; ++d) x[d] ^= directions_[d][c];
      }
      for (std::size_t d = 0; d < dims_; ++d)
        out[i][d] = static_cast<double>(x[d] ^ shift_[d]) * 0x1.0p-32;
    }
    return out;
  }

 private:
  struct Primitive {
    int degree;
    std::uint32_t a;
    std::array<std::uint32_t, 5> m;
  };
  // Dimensions 2..8 of new-joe-kuo-6.21201.
  static constexpr std::array<Primitive, kMaxDimensions - 1> kPolys{{
      {1, 0, {1, 0, 0, 0, 0}},
      {2, 1, {1, 3, 0, 0, 0}},
      {3, 1, {1, 3, 1, 0, 0}},
      {3, 2, {1, 1, 1, 0, 0}},
      {4, 1, {1, 1, 3, 3, 0}},
      {4, 4, {1, 3, 5, 13, 0}},
      {5, 2, {1, 1, 5, 5, 17}},
  }};

  std::size_t dims_;
  std::array<std::array<std::uint32_t, kBits + 1>, kMaxDimensions> directions_{};
  std::array<std::uint32_t, kMaxDimensions> shift_{};
};

}  // namespace sounder
