// ambiguity.hpp
// Spatio-temporal ambiguity function, the annealing objective and gridded surfaces.

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "arrays.hpp"
#include "core.hpp"
#include "parallel.hpp"
#include "signal.hpp"
#include "sobol.hpp"
#include "switching.hpp"

namespace sounder {

/// Normalized inner product b(mu)^H b(mu') / (|b(mu)| |b(mu')|).
inline Complex ambiguity_value(const ArrayModel& array, const SwitchingSequence& seq, const ReceiveParams& mu,
                               const ReceiveParams& mu_prime) {
  const CVector b = basis(array, seq, mu);
  const CVector b2 = basis(array, seq, mu_prime);
  const double n1 = squared_norm(b);
  const double n2 = squared_norm(b2);
  if (n1 <= 0.0 || n2 <= 0.0)
    throw DegenerateDirectionError("basis vector has zero norm: every element gain vanishes in this direction");
  Complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < b.size(); ++i) acc += std::conj(b[i]) * b2[i];
  return acc / std::sqrt(n1 * n2);
}

// Integration domain: both arrival directions over the full (azimuth, elevation)
// box and the Doppler difference nu - nu' in [-nu_up, nu_up].
struct Region {
  double nu_up = 0.0;                    // Hz
  bool sine_weighted_elevation = false;  // sample solid angle instead of the plain box

  void validate() const { require(nu_up > 0.0 && std::isfinite(nu_up), "region nu_up must be positive"); }

  double volume() const {
    const double per_direction = sine_weighted_elevation ? 4.0 * kPi : kTwoPi * kPi;
    return per_direction * per_direction * 2.0 * nu_up;
  }
};

/// fraction / (2 delta_t): a share of the switching-rate Nyquist band.
inline double default_nu_up(double delta_t, double fraction = 0.25) {
  require(delta_t > 0.0, "delta_t must be positive");
  require(fraction > 0.0, "nu_up fraction must be positive");
  return fraction / (2.0 * delta_t);
}

struct ObjectiveConfig {
  int power = 6;
  std::size_t samples = 4096;
  std::uint64_t scramble = 0;
  unsigned threads = 1;

  void validate() const {
    require(power >= 2 && power % 2 == 0, "objective power must be an even integer >= 2");
    require(samples >= 1, "objective sample count must be >= 1");
  }
};

struct AmbiguitySample {
  ReceiveParams mu;
  ReceiveParams mu_prime;
};

// Deterministic Sobol points mapped onto the region. nu is pinned at 0 and
// nu' = -(nu - nu'), since |X| only depends on the difference.
inline std::vector<AmbiguitySample> region_samples(const Region& region, const ObjectiveConfig& cfg) {
  region.validate();
  cfg.validate();
  const SobolSequence sobol(5, mix_seed(cfg.scramble, 0x51) | 1U);
  const auto points = sobol.generate(cfg.samples);
  std::vector<AmbiguitySample> out;
  out.reserve(points.size());
  auto elevation = [&](double u) {
    return region.sine_weighted_elevation ? std::acos(std::clamp(1.0 - 2.0 * u, -1.0, 1.0)) : kPi * u;
  };
  for (const auto& p : points) {
    const double delta_nu = region.nu_up * (2.0 * p[4] - 1.0);
    out.push_back({{{kTwoPi * p[0], elevation(p[1])}, 0.0}, {{kTwoPi * p[2], elevation(p[3])}, -delta_nu}});
  }
  return out;
}

struct ObjectiveResult {
  double value = 0.0;
  std::size_t degenerate_samples = 0;
};

// Objective evaluator bound to a fixed sample set and sequence shape (M, delta_t,
// snapshots). Everything that does not depend on the switching order is cached,
// so one evaluation costs O(samples * M * snapshots).
class ObjectiveEvaluator {
 public:
  ObjectiveEvaluator(const ArrayModel& array, std::vector<AmbiguitySample> samples, double volume, int power,
                     std::size_t count, double delta_t, std::size_t snapshots, unsigned threads = 1)
      : samples_(std::move(samples)),
        volume_(volume),
        power_(power),
        count_(count),
        delta_t_(delta_t),
        snapshots_(snapshots),
        threads_(threads) {
    require(array.size() == count, "array and sequence disagree on antenna count");
    require(power_ >= 2 && power_ % 2 == 0, "objective power must be an even integer >= 2");
    require(!samples_.empty(), "objective needs at least one sample");
    const std::size_t n = samples_.size();
    const std::size_t total = count_ * snapshots_;
    weights_.assign(n * count_, Complex{});
    phases_.assign(n * total, Complex{});
    degenerate_.assign(n, 0);
    const double center = (static_cast<double>(total) - 1.0) / 2.0;
    parallel_for(n, threads_, [&](std::size_t i) {
      const auto& s = samples_[i];
      const CVector a = steering_vector(array, s.mu.arrival);
      const CVector b = steering_vector(array, s.mu_prime.arrival);
      const double norm = std::sqrt(squared_norm(a) * squared_norm(b)) * static_cast<double>(snapshots_);
      if (!(norm > 0.0)) {
        degenerate_[i] = 1;
        return;
      }
      for (std::size_t m = 0; m < count_; ++m) weights_[i * count_ + m] = std::conj(a[m]) * b[m] / norm;
      const double dnu = s.mu_prime.doppler - s.mu.doppler;
      for (std::size_t k = 0; k < total; ++k)
        phases_[i * total + k] = std::polar(1.0, kTwoPi * dnu * (static_cast<double>(k) - center) * delta_t_);
    });
  }

  std::size_t sample_count() const { return samples_.size(); }
  double volume() const { return volume_; }
  const std::vector<AmbiguitySample>& samples() const { return samples_; }

  /// |X| at sample i; 0 for degenerate samples.
  double magnitude(const SwitchingSequence& seq, std::size_t i) const {
    if (degenerate_[i]) return 0.0;
    const std::size_t total = count_ * snapshots_;
    const Complex* w = &weights_[i * count_];
    const Complex* ph = &phases_[i * total];
    Complex acc{0.0, 0.0};
    for (std::size_t t = 0; t < snapshots_; ++t) {
      const std::size_t offset = t * count_;
      for (std::size_t m = 0; m < count_; ++m) acc += w[m] * ph[seq.slot_of(m) + offset];
    }
    return std::abs(acc);
  }

  ObjectiveResult evaluate(const SwitchingSequence& seq) const {
    require(seq.size() == count_ && seq.snapshots() == snapshots_ && seq.delta_t() == delta_t_,
            "sequence shape does not match the objective evaluator");
    const std::size_t n = samples_.size();
    RVector terms(n);
    parallel_for(n, threads_, [&](std::size_t i) { terms[i] = std::pow(magnitude(seq, i), power_); });
    ObjectiveResult r;
    r.value = volume_ * pairwise_sum(terms) / static_cast<double>(n);
    for (auto d : degenerate_) r.degenerate_samples += d;
    return r;
  }

 private:
  std::vector<AmbiguitySample> samples_;
  double volume_;
  int power_;
  std::size_t count_;
  double delta_t_;
  std::size_t snapshots_;
  unsigned threads_;
  CVector weights_;
  CVector phases_;
  std::vector<unsigned char> degenerate_;
};

inline ObjectiveEvaluator make_objective(const ArrayModel& array, const SwitchingSequence& shape,
                                         const Region& region, const ObjectiveConfig& cfg) {
  return ObjectiveEvaluator(array, region_samples(region, cfg), region.volume(), cfg.power, shape.size(),
                            shape.delta_t(), shape.snapshots(), cfg.threads);
}

/// QMC estimate of the integral of |X|^P over the region.
inline ObjectiveResult objective(const ArrayModel& array, const SwitchingSequence& seq, const Region& region,
                                 const ObjectiveConfig& cfg) {
  return make_objective(array, seq, region, cfg).evaluate(seq);
}

// Same estimate computed sample by sample through ambiguity_value, without any
// caching. Slow; kept as the reference path for the evaluator.
inline ObjectiveResult objective_direct(const ArrayModel& array, const SwitchingSequence& seq,
                                        const std::vector<AmbiguitySample>& samples, double volume, int power) {
  RVector terms(samples.size());
  ObjectiveResult r;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    try {
      terms[i] = std::pow(std::abs(ambiguity_value(array, seq, samples[i].mu, samples[i].mu_prime)), power);
    } catch (const DegenerateDirectionError&) {
      terms[i] = 0.0;
      ++r.degenerate_samples;
    }
  }
  r.value = volume * pairwise_sum(terms) / static_cast<double>(samples.size());
  return r;
}

// ---------------------------------------------------------------------------

enum class AngleAxis { Eoa, Aoa };

inline std::string to_string(AngleAxis a) { return a == AngleAxis::Eoa ? "eoa" : "aoa"; }

// |X| over (delta nu, angle) with mu fixed. magnitude(ia, id) indexes angle row
// ia and Doppler column id; delta nu = nu - nu' and angles are absolute degrees.
struct AmbiguitySurface {
  ReceiveParams reference;
  AngleAxis axis = AngleAxis::Eoa;
  RVector doppler;    // Hz
  RVector angle_deg;  // degrees
  RVector values;     // |X|, row-major by angle

  static constexpr double kFloorDb = -100.0;

  std::size_t rows() const { return angle_deg.size(); }
  std::size_t cols() const { return doppler.size(); }
  double magnitude(std::size_t ia, std::size_t id) const { return values[ia * doppler.size() + id]; }
  double db(std::size_t ia, std::size_t id) const { return to_db(magnitude(ia, id)); }

  static double to_db(double mag) { return mag > 0.0 ? std::max(kFloorDb, 20.0 * std::log10(mag)) : kFloorDb; }
};

inline void require_sorted_grid(const RVector& grid, const std::string& name) {
  require(!grid.empty(), name + " grid must not be empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    require(grid[i] > grid[i - 1], name + " grid must be strictly increasing");
}

/// Evenly spaced inclusive grid; the point count is rounded from (hi - lo) / step.
inline RVector linear_grid(double lo, double hi, double step) {
  require(step > 0.0 && hi >= lo, "grid requires step > 0 and hi >= lo");
  const auto n = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
  RVector g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + static_cast<double>(i) * step;
  return g;
}

inline AmbiguitySurface ambiguity_surface(const ArrayModel& array, const SwitchingSequence& seq,
                                          const ReceiveParams& mu, const RVector& doppler_grid,
                                          const RVector& angle_grid_deg, AngleAxis axis, unsigned threads = 1) {
  require_sorted_grid(doppler_grid, "Doppler");
  require_sorted_grid(angle_grid_deg, "angle");
  require(array.size() == seq.size(), "array and sequence disagree on antenna count");
  AmbiguitySurface s{mu, axis, doppler_grid, angle_grid_deg, RVector(doppler_grid.size() * angle_grid_deg.size())};

  const CVector ref = basis(array, seq, mu);
  const double ref_norm = std::sqrt(squared_norm(ref));
  if (!(ref_norm > 0.0)) throw DegenerateDirectionError("reference direction has zero basis norm");
  const CVector ref_steer = steering_vector(array, mu.arrival);
  const RVector eta = eta_vector(seq, true);
  const std::size_t count = seq.size();
  const std::size_t total = eta.size();

  parallel_for(angle_grid_deg.size(), threads, [&](std::size_t ia) {
    Direction d = mu.arrival;
    if (axis == AngleAxis::Eoa)
      d.elevation = deg2rad(angle_grid_deg[ia]);
    else
      d.azimuth = deg2rad(angle_grid_deg[ia]);
    const CVector steer = steering_vector(array, d);
    const double norm = std::sqrt(squared_norm(steer) * static_cast<double>(seq.snapshots()));
    if (!(norm > 0.0)) throw DegenerateDirectionError("sweep direction has zero basis norm");
    // conj(b_ref) . steer' without the Doppler factor of mu'.
    CVector w(total);
    for (std::size_t i = 0; i < total; ++i) w[i] = std::conj(ref[i]) * steer[i % count];
    for (std::size_t id = 0; id < doppler_grid.size(); ++id) {
      const double nu_prime = mu.doppler - doppler_grid[id];
      if (d.azimuth == mu.arrival.azimuth && d.elevation == mu.arrival.elevation && nu_prime == mu.doppler) {
        s.values[ia * doppler_grid.size() + id] = 1.0;  // X(mu, mu) = 1 by definition; avoid rounding below 0 dB
        continue;
      }
      Complex acc{0.0, 0.0};
      for (std::size_t i = 0; i < total; ++i) acc += w[i] * std::polar(1.0, kTwoPi * nu_prime * eta[i]);
      s.values[ia * doppler_grid.size() + id] = std::abs(acc) / (ref_norm * norm);
    }
  });
  return s;
}

inline void write_surface_csv(const AmbiguitySurface& s, std::ostream& out) {
  out << "delta_doppler_hz,angle_deg,magnitude_db\n";
  out.precision(17);
  for (std::size_t ia = 0; ia < s.rows(); ++ia)
    for (std::size_t id = 0; id < s.cols(); ++id)
      out << s.doppler[id] << ',' << s.angle_deg[ia] << ',' << s.db(ia, id) << '\n';
}

}  // namespace sounder
