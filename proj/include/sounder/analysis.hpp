// analysis.hpp
// Post-processing of ambiguity surfaces: half-power widths, sidelobe scans,
// effective factor and the three-scheme comparison.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "ambiguity.hpp"
#include "arrays.hpp"
#include "core.hpp"
#include "crlb.hpp"
#include "switching.hpp"

namespace sounder {

inline constexpr double kHalfPowerDb = -3.0;

enum class WidthAxis { Doppler, Eoa, Aoa };

inline std::string to_string(WidthAxis a) {
  switch (a) {
    case WidthAxis::Doppler:
      return "doppler";
    case WidthAxis::Eoa:
      return "eoa";
    case WidthAxis::Aoa:
      return "aoa";
  }
  return "?";
}

struct WidthReport {
  WidthAxis axis = WidthAxis::Doppler;
  double lower = 0.0;  // Hz or degrees
  double upper = 0.0;
  std::string method = "contiguous -3 dB interval through the peak, linear interpolation in dB";

  double width() const { return upper - lower; }
};

struct GridIndex {
  std::size_t angle = 0;
  std::size_t doppler = 0;
};

// Main-lobe peak: the maximum of |X|; ties (within 1e-12) resolve to the
// sample nearest the reference point (delta nu = 0, reference angle).
inline GridIndex surface_peak(const AmbiguitySurface& s) {
  double best = -1.0;
  for (double v : s.values) best = std::max(best, v);
  const double ref_angle =
      rad2deg(s.axis == AngleAxis::Eoa ? s.reference.arrival.elevation : s.reference.arrival.azimuth);
  const double dspan = std::max(1e-300, s.doppler.back() - s.doppler.front());
  const double aspan = std::max(1e-300, s.angle_deg.back() - s.angle_deg.front());
  GridIndex idx;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t ia = 0; ia < s.rows(); ++ia)
    for (std::size_t id = 0; id < s.cols(); ++id) {
      if (s.magnitude(ia, id) < best - 1e-12) continue;
      const double dd = s.doppler[id] / dspan;
      const double da = (s.angle_deg[ia] - ref_angle) / aspan;
      const double dist = dd * dd + da * da;
      if (dist < best_dist) {
        best_dist = dist;
        idx = {ia, id};
      }
    }
  return idx;
}

inline WidthReport half_power_width(const AmbiguitySurface& s, WidthAxis axis) {
  if (axis == WidthAxis::Eoa) require(s.axis == AngleAxis::Eoa, "surface does not sweep EOA");
  if (axis == WidthAxis::Aoa) require(s.axis == AngleAxis::Aoa, "surface does not sweep AOA");
  const GridIndex peak = surface_peak(s);
  require(s.magnitude(peak.angle, peak.doppler) >= 1.0 - 1e-6, "surface does not contain the 0 dB main-lobe peak");

  const bool along_doppler = axis == WidthAxis::Doppler;
  const RVector& x = along_doppler ? s.doppler : s.angle_deg;
  const std::size_t n = x.size();
  const std::size_t p = along_doppler ? peak.doppler : peak.angle;
  auto level = [&](std::size_t i) { return along_doppler ? s.db(peak.angle, i) : s.db(i, peak.doppler); };
  auto crossing = [&](std::size_t inside, std::size_t outside) {
    const double a = level(inside);
    const double b = level(outside);
    const double t = (kHalfPowerDb - a) / (b - a);
    return x[inside] + t * (x[outside] - x[inside]);
  };

  std::size_t hi = p;
  while (hi + 1 < n && level(hi + 1) >= kHalfPowerDb) ++hi;
  std::size_t lo = p;
  while (lo > 0 && level(lo - 1) >= kHalfPowerDb) --lo;
  if (hi + 1 >= n || lo == 0)
    throw GridTooNarrowError("main lobe reaches the edge of the " + to_string(axis) + " grid; widen the sweep");

  WidthReport r;
  r.axis = axis;
  r.lower = crossing(lo, lo - 1);
  r.upper = crossing(hi, hi + 1);
  return r;
}

inline double effective_factor(const ArrayModel& array, const Direction& dir, double threshold_db) {
  return static_cast<double>(effective_elements(array, dir, threshold_db).size()) /
         static_cast<double>(array.size());
}

struct AliasPeak {
  double doppler = 0.0;    // Hz
  double angle_deg = 0.0;  // degrees
  double magnitude = 0.0;  // |X|
  double magnitude_db() const { return AmbiguitySurface::to_db(magnitude); }
};

/// Cells of the -3 dB region 4-connected to the peak.
inline std::vector<unsigned char> main_lobe_mask(const AmbiguitySurface& s) {
  std::vector<unsigned char> mask(s.values.size(), 0);
  const GridIndex peak = surface_peak(s);
  std::queue<GridIndex> frontier;
  frontier.push(peak);
  mask[peak.angle * s.cols() + peak.doppler] = 1;
  while (!frontier.empty()) {
    const GridIndex c = frontier.front();
    frontier.pop();
    const long ia = static_cast<long>(c.angle);
    const long id = static_cast<long>(c.doppler);
    const long moves[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& mv : moves) {
      const long na = ia + mv[0];
      const long nd = id + mv[1];
      if (na < 0 || nd < 0 || na >= static_cast<long>(s.rows()) || nd >= static_cast<long>(s.cols())) continue;
      const std::size_t flat = static_cast<std::size_t>(na) * s.cols() + static_cast<std::size_t>(nd);
      if (mask[flat] || s.db(static_cast<std::size_t>(na), static_cast<std::size_t>(nd)) < kHalfPowerDb) continue;
      mask[flat] = 1;
      frontier.push({static_cast<std::size_t>(na), static_cast<std::size_t>(nd)});
    }
  }
  return mask;
}

// Local maxima (8-neighbourhood, strictly above at least one neighbour) outside
// the main lobe, largest first. The first entry is the peak sidelobe level.
inline std::vector<AliasPeak> alias_scan(const AmbiguitySurface& s) {
  const auto mask = main_lobe_mask(s);
  std::vector<AliasPeak> out;
  const long rows = static_cast<long>(s.rows());
  const long cols = static_cast<long>(s.cols());
  for (long ia = 0; ia < rows; ++ia)
    for (long id = 0; id < cols; ++id) {
      const std::size_t flat = static_cast<std::size_t>(ia * cols + id);
      const double v = s.values[flat];
      if (mask[flat] || v <= 0.0) continue;
      bool is_max = true;
      bool above_some = false;
      bool has_neighbour = false;
      for (long da = -1; da <= 1 && is_max; ++da)
        for (long dd = -1; dd <= 1; ++dd) {
          if (da == 0 && dd == 0) continue;
          const long na = ia + da;
          const long nd = id + dd;
          if (na < 0 || nd < 0 || na >= rows || nd >= cols) continue;
          has_neighbour = true;
          const double w = s.values[static_cast<std::size_t>(na * cols + nd)];
          if (w > v) {
            is_max = false;
            break;
          }
          if (w < v) above_some = true;
        }
      if (is_max && (above_some || !has_neighbour))
        out.push_back({s.doppler[static_cast<std::size_t>(id)], s.angle_deg[static_cast<std::size_t>(ia)], v});
    }
  std::stable_sort(out.begin(), out.end(), [](const AliasPeak& a, const AliasPeak& b) {
    return a.magnitude > b.magnitude;
  });
  return out;
}

/// Peak sidelobe level |X| (0 when the surface has a single lobe).
inline double peak_sidelobe(const AmbiguitySurface& s) {
  const auto peaks = alias_scan(s);
  return peaks.empty() ? 0.0 : peaks.front().magnitude;
}

// ---------------------------------------------------------------------------

struct NamedSequence {
  std::string name;
  SwitchingSequence sequence;
};

struct CompareSettings {
  ReceiveParams reference;
  RVector doppler_grid;
  RVector angle_grid_deg;
  AngleAxis axis = AngleAxis::Eoa;
  double threshold_db = -10.0;
  double amplitude = 1.0;
  double sigma = 0.1;
  unsigned threads = 1;
};

struct SchemeReport {
  std::string name;
  AmbiguitySurface surface;
  WidthReport doppler_width;
  WidthReport angle_width;
  double peak_sidelobe = 0.0;
  std::vector<AliasPeak> top_sidelobes;
  double crlb_nu_full = 0.0;       // Hz^2, centered eta over all antennas
  double crlb_nu_effective = 0.0;  // Hz^2, eta over the effective elements only
};

struct ComparisonReport {
  std::vector<SchemeReport> schemes;  // sequential, random, hybrid
  IndexSet effective;
  double xi = 0.0;
  double inverse_xi = 0.0;
  double broadening_ratio = 0.0;    // hybrid / random Doppler width
  double angle_width_ratio = 0.0;   // hybrid / random angle width
  double broadening_vs_inverse_xi = 0.0;
  double angle_grid_step = 0.0;

  const SchemeReport& scheme(const std::string& name) const {
    for (const auto& s : schemes)
      if (s.name == name) return s;
    throw ConfigError("no scheme named " + name);
  }
};

inline SchemeReport analyse_scheme(const ArrayModel& array, const NamedSequence& named, const CompareSettings& cfg,
                                   const IndexSet& effective) {
  SchemeReport r{named.name,
                 ambiguity_surface(array, named.sequence, cfg.reference, cfg.doppler_grid, cfg.angle_grid_deg,
                                   cfg.axis, cfg.threads),
                 {},
                 {},
                 0.0,
                 {},
                 0.0,
                 0.0};
  r.doppler_width = half_power_width(r.surface, WidthAxis::Doppler);
  r.angle_width = half_power_width(r.surface, cfg.axis == AngleAxis::Eoa ? WidthAxis::Eoa : WidthAxis::Aoa);
  auto peaks = alias_scan(r.surface);
  r.peak_sidelobe = peaks.empty() ? 0.0 : peaks.front().magnitude;
  if (peaks.size() > 10) peaks.resize(10);
  r.top_sidelobes = std::move(peaks);
  r.crlb_nu_full = crlb_doppler(eta_vector(named.sequence, true), cfg.amplitude, cfg.sigma);
  r.crlb_nu_effective = crlb_doppler(eta_subset_centered(named.sequence, effective), cfg.amplitude, cfg.sigma);
  return r;
}

// Sequences are expected in the order sequential, random, hybrid; ratios are
// hybrid over random.
inline ComparisonReport compare_schemes(const ArrayModel& array, const std::vector<NamedSequence>& sequences,
                                        const CompareSettings& cfg) {
  require(sequences.size() == 3, "comparison needs exactly three sequences (sequential, random, hybrid)");
  for (const auto& s : sequences) {
    require(s.sequence.size() == sequences.front().sequence.size() &&
                s.sequence.delta_t() == sequences.front().sequence.delta_t(),
            "all compared sequences must share M and delta_t");
    require(s.sequence.size() == array.size(), "sequence " + s.name + " does not match the array size");
  }
  ComparisonReport out;
  out.effective = effective_elements(array, cfg.reference.arrival, cfg.threshold_db);
  require(!out.effective.empty(), "no effective elements at the reference direction");
  out.xi = static_cast<double>(out.effective.size()) / static_cast<double>(array.size());
  out.inverse_xi = 1.0 / out.xi;
  for (const auto& s : sequences) out.schemes.push_back(analyse_scheme(array, s, cfg, out.effective));
  const auto& rnd = out.schemes[1];
  const auto& hyb = out.schemes[2];
  out.broadening_ratio = hyb.doppler_width.width() / rnd.doppler_width.width();
  out.angle_width_ratio = hyb.angle_width.width() / rnd.angle_width.width();
  out.broadening_vs_inverse_xi = out.broadening_ratio / out.inverse_xi;
  out.angle_grid_step =
      cfg.angle_grid_deg.size() > 1 ? cfg.angle_grid_deg[1] - cfg.angle_grid_deg[0] : 0.0;
  return out;
}

}  // namespace sounder
