// arrays.hpp
// Antenna array geometry, element radiation patterns and array response vectors.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"

namespace sounder {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

/// Azimuth phi (radians, periodic) and elevation theta in [0, pi], measured from +z.
struct Direction {
  double azimuth = 0.0;
  double elevation = kPi / 2;

  static Direction from_degrees(double az_deg, double el_deg) { return {deg2rad(az_deg), deg2rad(el_deg)}; }

  Vec3 unit_vector() const {
    const double s = std::sin(elevation);
    return {s * std::cos(azimuth), s * std::sin(azimuth), std::cos(elevation)};
  }
};

inline void validate(const Direction& dir) {
  if (!std::isfinite(dir.azimuth) || !std::isfinite(dir.elevation))
    throw ConfigError("direction has non-finite components");
  if (dir.elevation < 0.0 || dir.elevation > kPi)
    throw ConfigError("elevation " + std::to_string(dir.elevation) + " rad outside [0, pi]");
}

inline double wrap_azimuth(double az) {
  double a = std::fmod(az, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

enum class Polarization { V, H };
enum class PatternKind { Omni, SyntheticPatch, Tabulated };

/// Complex gains on a rectangular (azimuth, elevation) grid; gain(ia, ie) = gains[ia * elevation.size() + ie].
struct PatternTable {
  RVector azimuth;    // radians, strictly increasing, within [0, 2pi)
  RVector elevation;  // radians, strictly increasing, within [0, pi]
  CVector gains;

  void validate() const {
    require(azimuth.size() >= 2 && elevation.size() >= 2, "pattern table needs at least 2 samples per axis");
    require(gains.size() == azimuth.size() * elevation.size(), "pattern table is not rectangular");
    for (std::size_t i = 1; i < azimuth.size(); ++i)
      require(azimuth[i] > azimuth[i - 1], "pattern azimuth grid must be strictly increasing");
    for (std::size_t i = 1; i < elevation.size(); ++i)
      require(elevation[i] > elevation[i - 1], "pattern elevation grid must be strictly increasing");
    require(azimuth.front() >= 0.0 && azimuth.back() < kTwoPi, "pattern azimuth grid must lie in [0, 360) deg");
    require(elevation.front() >= 0.0 && elevation.back() <= kPi + 1e-12,
            "pattern elevation grid must lie in [0, 180] deg");
  }

  Complex at(std::size_t ia, std::size_t ie) const { return gains[ia * elevation.size() + ie]; }

  // Bilinear in (azimuth, elevation). Azimuth wraps through 2pi; elevation
  // queries outside the sampled span are rejected.
  Complex interpolate(const Direction& dir) const {
    const double el = dir.elevation;
    if (el < elevation.front() - 1e-12 || el > elevation.back() + 1e-12)
      throw ConfigError("elevation query outside tabulated pattern grid");
    auto ie_hi = static_cast<std::size_t>(std::upper_bound(elevation.begin(), elevation.end(), el) - elevation.begin());
    ie_hi = std::clamp<std::size_t>(ie_hi, 1, elevation.size() - 1);
    const std::size_t ie_lo = ie_hi - 1;
    const double te = std::clamp((el - elevation[ie_lo]) / (elevation[ie_hi] - elevation[ie_lo]), 0.0, 1.0);

    const double az = wrap_azimuth(dir.azimuth);
    std::size_t ia_lo = 0;
    std::size_t ia_hi = 0;
    double span = 0.0;
    double offset = 0.0;
    if (az < azimuth.front() || az >= azimuth.back()) {
      ia_lo = azimuth.size() - 1;
      ia_hi = 0;
      span = azimuth.front() + kTwoPi - azimuth.back();
      offset = az >= azimuth.back() ? az - azimuth.back() : az + kTwoPi - azimuth.back();
    } else {
      ia_hi = static_cast<std::size_t>(std::upper_bound(azimuth.begin(), azimuth.end(), az) - azimuth.begin());
      ia_lo = ia_hi - 1;
      span = azimuth[ia_hi] - azimuth[ia_lo];
      offset = az - azimuth[ia_lo];
    }
    const double ta = std::clamp(offset / span, 0.0, 1.0);
    const Complex low = (1.0 - te) * at(ia_lo, ie_lo) + te * at(ia_lo, ie_hi);
    const Complex high = (1.0 - te) * at(ia_hi, ie_lo) + te * at(ia_hi, ie_hi);
    return (1.0 - ta) * low + ta * high;
  }
};

class ElementPattern {
 public:
  static ElementPattern omni(Polarization pol = Polarization::V) { return ElementPattern(PatternKind::Omni, pol); }

  /// max(0, cos psi)^q with psi the angle to `boresight`. q = 0 is the ideal half-space sector.
  static ElementPattern synthetic_patch(double exponent, Vec3 boresight, Polarization pol = Polarization::V) {
    require(exponent >= 0.0 && std::isfinite(exponent), "patch exponent must be >= 0");
    const double n = std::sqrt(dot(boresight, boresight));
    require(n > 0.0, "patch boresight must be non-zero");
    ElementPattern p(PatternKind::SyntheticPatch, pol);
    p.exponent_ = exponent;
    p.boresight_ = (1.0 / n) * boresight;
    return p;
  }

  static ElementPattern tabulated(std::shared_ptr<const PatternTable> table, Polarization pol = Polarization::V) {
    require(table != nullptr, "tabulated pattern requires a table");
    table->validate();
    ElementPattern p(PatternKind::Tabulated, pol);
    p.table_ = std::move(table);
    return p;
  }

  PatternKind kind() const { return kind_; }
  Polarization polarization() const { return pol_; }
  double exponent() const { return exponent_; }
  Vec3 boresight() const { return boresight_; }
  const PatternTable* table() const { return table_.get(); }

  Complex gain(const Direction& dir) const {
    switch (kind_) {
      case PatternKind::Omni:
        return {1.0, 0.0};
      case PatternKind::SyntheticPatch: {
        const double c = dot(dir.unit_vector(), boresight_);
        // Grazing incidence (|cos psi| at rounding level) counts as back hemisphere.
        if (c <= kGrazingTolerance) return {0.0, 0.0};
        return {exponent_ == 0.0 ? 1.0 : std::pow(c, exponent_), 0.0};
      }
      case PatternKind::Tabulated:
        return table_->interpolate(dir);
    }
    return {0.0, 0.0};
  }

  static constexpr double kGrazingTolerance = 1e-12;

 private:
  ElementPattern(PatternKind kind, Polarization pol) : kind_(kind), pol_(pol) {}

  PatternKind kind_;
  Polarization pol_;
  double exponent_ = 0.0;
  Vec3 boresight_{1.0, 0.0, 0.0};
  std::shared_ptr<const PatternTable> table_;
};

struct Element {
  Vec3 position;  // meters
  ElementPattern pattern;
};

// Immutable after construction. `groups` is the geometry's natural partition
// into contiguous index ranges (one per panel/side); empty for plain arrays.
class ArrayModel {
 public:
  ArrayModel(std::vector<Element> elements, double wavelength, std::vector<IndexSet> groups = {})
      : elements_(std::move(elements)), wavelength_(wavelength), groups_(std::move(groups)) {
    require(!elements_.empty(), "array needs at least one element");
    require(wavelength_ > 0.0 && std::isfinite(wavelength_), "wavelength must be positive");
  }

  std::size_t size() const { return elements_.size(); }
  double wavelength() const { return wavelength_; }
  double wavenumber() const { return kTwoPi / wavelength_; }
  const std::vector<Element>& elements() const { return elements_; }
  const Element& operator[](std::size_t m) const { return elements_[m]; }
  const std::vector<IndexSet>& groups() const { return groups_; }

  ArrayModel with_patterns(const std::vector<ElementPattern>& patterns) const {
    require(patterns.size() == elements_.size(), "pattern count does not match element count");
    auto copy = elements_;
    for (std::size_t m = 0; m < copy.size(); ++m) copy[m].pattern = patterns[m];
    return ArrayModel(std::move(copy), wavelength_, groups_);
  }

 private:
  std::vector<Element> elements_;
  double wavelength_;
  std::vector<IndexSet> groups_;
};

inline ArrayModel make_ula(std::size_t count, double spacing, double wavelength) {
  require(count >= 1, "ULA needs at least one element");
  require(spacing > 0.0, "ULA spacing must be positive");
  require(wavelength > 0.0, "wavelength must be positive");
  std::vector<Element> elements;
  elements.reserve(count);
  const double center = (static_cast<double>(count) - 1.0) / 2.0;
  for (std::size_t m = 0; m < count; ++m)
    elements.push_back({{(static_cast<double>(m) - center) * spacing, 0.0, 0.0}, ElementPattern::omni()});
  return ArrayModel(std::move(elements), wavelength);
}

/// Apothem that makes adjacent panel edges touch.
inline double touching_panel_radius(std::size_t panels, std::size_t cols, double spacing) {
  return static_cast<double>(cols) * spacing / (2.0 * std::tan(kPi / static_cast<double>(panels)));
}

// Vertical rows x cols panels on a regular polygon; panel p faces outward at
// azimuth 2*pi*p/panels and its center sits `radius` from the z axis. Elements
// are panel-major, row-major within a panel; each panel is one group.
inline ArrayModel make_octagonal(std::size_t panels, std::size_t rows, std::size_t cols, double spacing,
                                 double radius, double wavelength, double patch_exponent) {
  require(panels >= 3, "polygonal array needs at least 3 panels");
  require(rows * cols >= 1, "panel needs at least one element");
  require(spacing > 0.0, "element spacing must be positive");
  require(radius > 0.0, "array radius must be positive");
  std::vector<Element> elements;
  std::vector<IndexSet> groups;
  elements.reserve(panels * rows * cols);
  const double row_center = (static_cast<double>(rows) - 1.0) / 2.0;
  const double col_center = (static_cast<double>(cols) - 1.0) / 2.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double az = kTwoPi * static_cast<double>(p) / static_cast<double>(panels);
    const Vec3 normal{std::cos(az), std::sin(az), 0.0};
    const Vec3 tangent{-std::sin(az), std::cos(az), 0.0};
    const Vec3 up{0.0, 0.0, 1.0};
    const auto pattern = ElementPattern::synthetic_patch(patch_exponent, normal);
    IndexSet group;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const Vec3 pos = radius * normal + ((static_cast<double>(c) - col_center) * spacing) * tangent +
                         ((static_cast<double>(r) - row_center) * spacing) * up;
        group.push_back(elements.size());
        elements.push_back({pos, pattern});
      }
    }
    groups.push_back(std::move(group));
  }
  return ArrayModel(std::move(elements), wavelength, std::move(groups));
}

/// Entry m = g_m(dir) * exp(j k <u(dir), p_m>).
inline CVector steering_vector(const ArrayModel& array, const Direction& dir) {
  validate(dir);
  const Vec3 u = dir.unit_vector();
  const double k = array.wavenumber();
  CVector out(array.size());
  for (std::size_t m = 0; m < array.size(); ++m) {
    const auto& e = array[m];
    out[m] = e.pattern.gain(dir) * std::polar(1.0, k * dot(u, e.position));
  }
  return out;
}

inline RVector element_powers(const ArrayModel& array, const Direction& dir) {
  validate(dir);
  RVector p(array.size());
  for (std::size_t m = 0; m < array.size(); ++m) p[m] = std::norm(array[m].pattern.gain(dir));
  return p;
}

/// Elements whose power is within `threshold_db` (<= 0) of the strongest element.
inline IndexSet effective_elements(const ArrayModel& array, const Direction& dir, double threshold_db) {
  require(threshold_db <= 0.0, "effective-element threshold must be <= 0 dB");
  const RVector p = element_powers(array, dir);
  const double peak = *std::max_element(p.begin(), p.end());
  IndexSet out;
  if (peak <= 0.0) return out;
  const double floor = peak * std::pow(10.0, threshold_db / 10.0);
  for (std::size_t m = 0; m < p.size(); ++m)
    if (p[m] >= floor) out.push_back(m);
  return out;
}

// ---------------------------------------------------------------------------
// Pattern file: CSV `element,pol,azimuth_deg,elevation_deg,re,im`, one complete
// rectangular grid per (element, pol).

using PatternKey = std::pair<std::size_t, Polarization>;

inline Polarization parse_polarization(const std::string& s) {
  if (s == "V" || s == "v") return Polarization::V;
  if (s == "H" || s == "h") return Polarization::H;
  throw ConfigError("unknown polarization '" + s + "'");
}

inline std::map<PatternKey, std::shared_ptr<const PatternTable>> read_pattern_csv(std::istream& in,
                                                                                  const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(origin + ": empty pattern file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "element,pol,azimuth_deg,elevation_deg,re,im")
    throw ConfigError(origin + ": unexpected pattern header '" + line + "'");

  struct Raw {
    std::map<std::pair<double, double>, Complex> samples;
  };
  std::map<PatternKey, Raw> raw;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<std::string> cells;
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    const std::string where = origin + ":" + std::to_string(lineno);
    if (cells.size() != 6) throw ConfigError(where + ": expected 6 columns");
    try {
      const auto element = static_cast<std::size_t>(std::stoull(cells[0]));
      const auto pol = parse_polarization(cells[1]);
      const double az = std::stod(cells[2]);
      const double el = std::stod(cells[3]);
      const Complex g{std::stod(cells[4]), std::stod(cells[5])};
      auto [it, inserted] = raw[{element, pol}].samples.emplace(std::make_pair(az, el), g);
      if (!inserted) throw ConfigError(where + ": duplicate grid sample");
    } catch (const std::logic_error&) {
      throw ConfigError(where + ": malformed number");
    }
  }

  std::map<PatternKey, std::shared_ptr<const PatternTable>> out;
  for (const auto& [key, r] : raw) {
    std::set<double> azs;
    std::set<double> els;
    for (const auto& [ae, g] : r.samples) {
      azs.insert(ae.first);
      els.insert(ae.second);
    }
    if (r.samples.size() != azs.size() * els.size())
      throw ConfigError(origin + ": grid for element " + std::to_string(key.first) + " is incomplete");
    auto table = std::make_shared<PatternTable>();
    for (double a : azs) table->azimuth.push_back(deg2rad(a));
    for (double e : els) table->elevation.push_back(deg2rad(e));
    for (double a : azs)
      for (double e : els) table->gains.push_back(r.samples.at({a, e}));
    table->validate();
    out.emplace(key, std::move(table));
  }
  return out;
}

inline std::map<PatternKey, std::shared_ptr<const PatternTable>> load_pattern_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open pattern file: " + path);
  return read_pattern_csv(in, path);
}

/// Replaces each element's pattern with its tabulated `pol` grid; every element must be present.
inline ArrayModel apply_pattern_tables(const ArrayModel& array,
                                       const std::map<PatternKey, std::shared_ptr<const PatternTable>>& tables,
                                       Polarization pol = Polarization::V) {
  std::vector<ElementPattern> patterns;
  patterns.reserve(array.size());
  for (std::size_t m = 0; m < array.size(); ++m) {
    auto it = tables.find({m, pol});
    if (it == tables.end()) throw ConfigError("pattern file has no grid for element " + std::to_string(m));
    patterns.push_back(ElementPattern::tabulated(it->second, pol));
  }
  return array.with_patterns(patterns);
}

}  // namespace sounder
