// core.hpp
// Shared numeric types, error hierarchy and small helpers used by every module.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sounder {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;
using RVector = std::vector<double>;
using IndexSet = std::vector<std::size_t>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Errors. Everything derives from sounder::Error so the CLI can map the two
// families onto exit codes: ConfigError -> 2, NumericError -> 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input, invalid configuration or violated precondition.
struct ConfigError : Error {
  using Error::Error;
};

/// Missing or unreadable input file.
struct FileError : ConfigError {
  using ConfigError::ConfigError;
};

/// A numerically ill-posed request: singular bounds, degenerate bases, etc.
struct NumericError : Error {
  using Error::Error;
};

/// All element gains vanish in the requested direction, so the basis vector has zero norm.
struct DegenerateDirectionError : NumericError {
  using NumericError::NumericError;
};

/// The AOA bound diverges at endfire (sin phi = 0).
struct EndfireSingularityError : NumericError {
  using NumericError::NumericError;
};

/// Centered activation instants are all zero; Doppler carries no information.
struct UnobservableDopplerError : NumericError {
  using NumericError::NumericError;
};

/// The ambiguity main lobe reaches the edge of the sweep grid.
struct GridTooNarrowError : NumericError {
  using NumericError::NumericError;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ConfigError(message);
}

inline double squared_norm(std::span<const Complex> v) {
  double acc = 0.0;
  for (const auto& x : v) acc += std::norm(x);
  return acc;
}

inline double squared_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

// Pairwise (cascade) summation. Result depends only on the input order, never on
// how the values were produced, which is what makes threaded reductions reproducible.
inline double pairwise_sum(std::span<const double> v) {
  constexpr std::size_t kLeaf = 32;
  if (v.size() <= kLeaf) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// 64-bit FNV-1a, used for content hashes in run manifests.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
    v >>= 4;
  }
  return out;
}

}  // namespace sounder
