// signal.hpp
// Narrowband single-path signal model for a switched receive array.
//
// The general dynamic MIMO basis is a four-column matrix, one column per
// (Tx pol, Rx pol) pair, each column
//     ((b_snapshot (x) b_tx (x) b_rx) . a_doppler) (x) b_freq
// Only the vertical-receive SIMO column with a single frequency point is
// executable here: b = b_rx_V . a_doppler, tiled over snapshots.

#pragma once

#include <cmath>
#include <vector>

#include "arrays.hpp"
#include "core.hpp"
#include "rng.hpp"
#include "switching.hpp"

namespace sounder {

/// Full double-directional structural parameters of one path.
struct StructuralParams {
  Direction departure;
  Direction arrival;
  double doppler = 0.0;  // Hz
};

/// Receive-side parameters used by every executable path (single Tx antenna).
struct ReceiveParams {
  Direction arrival;
  double doppler = 0.0;  // Hz
};

/// Complex amplitude r * exp(j psi) of the vertical-vertical path component.
struct PathGain {
  double amplitude = 1.0;
  double phase = 0.0;

  Complex value() const { return std::polar(amplitude, phase); }
};

/// exp(j 2 pi nu eta_i) with eta the centered activation instants.
inline CVector doppler_vector(const SwitchingSequence& seq, double doppler) {
  const RVector eta = eta_vector(seq, true);
  CVector out(eta.size());
  for (std::size_t i = 0; i < eta.size(); ++i) out[i] = std::polar(1.0, kTwoPi * doppler * eta[i]);
  return out;
}

/// Steering vector tiled over snapshots, multiplied elementwise by the Doppler vector.
inline CVector basis(const ArrayModel& array, const SwitchingSequence& seq, const ReceiveParams& mu) {
  require(array.size() == seq.size(), "array and sequence disagree on antenna count");
  const CVector steer = steering_vector(array, mu.arrival);
  CVector out = doppler_vector(seq, mu.doppler);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= steer[i % steer.size()];
  return out;
}

/// Noise-free mean plus circular Gaussian noise of total per-sample variance sigma^2.
inline CVector synthesize(const ArrayModel& array, const SwitchingSequence& seq, const ReceiveParams& mu,
                          const PathGain& gain, double noise_sigma, Rng& rng) {
  require(noise_sigma >= 0.0, "noise sigma must be >= 0");
  require(gain.amplitude >= 0.0, "path amplitude must be >= 0");
  CVector y = basis(array, seq, mu);
  const Complex g = gain.value();
  const double component_sigma = noise_sigma / std::sqrt(2.0);
  for (auto& v : y) {
    v *= g;
    if (noise_sigma > 0.0) {
      const double re = rng.normal();
      const double im = rng.normal();
      v += Complex(component_sigma * re, component_sigma * im);
    }
  }
  return y;
}

/// r^2 * sum |g_m|^2 / (M sigma^2), the per-element average SNR of a synthesized snapshot.
inline double snr(const ArrayModel& array, const Direction& dir, const PathGain& gain, double noise_sigma) {
  require(noise_sigma > 0.0, "SNR needs positive noise sigma");
  const RVector p = element_powers(array, dir);
  double total = 0.0;
  for (double v : p) total += v;
  return gain.amplitude * gain.amplitude * total / (static_cast<double>(array.size()) * noise_sigma * noise_sigma);
}

}  // namespace sounder
