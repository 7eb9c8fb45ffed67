#include <gtest/gtest.h>

#include "helpers.hpp"
#include "sounder/analysis.hpp"

using namespace sounder;

namespace {

constexpr double kDt = 1e-5;

double dirichlet(std::size_t m, double x) {
  if (std::abs(std::sin(kPi * x)) < 1e-12) return 1.0;  // integer x: the kernel peaks
  return std::abs(std::sin(kPi * static_cast<double>(m) * x) / (static_cast<double>(m) * std::sin(kPi * x)));
}

// Full width where the periodic sinc first drops to 1/sqrt(2), by bisection.
double dirichlet_half_power_width(std::size_t m) {
  double lo = 0.0;
  double hi = 1.0 / static_cast<double>(m);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (dirichlet(m, mid) > std::pow(10.0, kHalfPowerDb / 20.0) ? lo : hi) = mid;
  }
  return 2.0 * lo;
}

ArrayModel octagon() {
  const double s = 0.5;
  return make_octagonal(8, 4, 4, s, touching_panel_radius(8, 4, s), 1.0, 2.0);
}

}  // namespace

TEST(HalfPower, DirichletDopplerWidth) {
  for (std::size_t m : {8U, 16U, 64U}) {
    const auto a = testutil::half_wave_ula(m);
    const double bw = 1.0 / (static_cast<double>(m) * kDt);
    const auto surf = ambiguity_surface(a, sequential(m, kDt), {Direction::from_degrees(90, 90), 0.0},
                                        linear_grid(-bw, bw, bw / 400), {90.0}, AngleAxis::Aoa);
    const auto w = half_power_width(surf, WidthAxis::Doppler);
    const double expected = dirichlet_half_power_width(m) / kDt;
    EXPECT_NEAR(w.width(), expected, 1e-3 * expected) << "M=" << m;
    EXPECT_NEAR(w.width() * static_cast<double>(m) * kDt, 0.886, 0.01);
    EXPECT_NEAR(w.lower, -w.upper, 1e-9 * expected);
  }
}

TEST(HalfPower, ClippedLobeRaises) {
  const auto a = testutil::half_wave_ula(8);
  const auto surf = ambiguity_surface(a, sequential(8, kDt), {Direction::from_degrees(90, 90), 0.0},
                                      linear_grid(-500, 500, 100), {90.0}, AngleAxis::Aoa);
  EXPECT_THROW(half_power_width(surf, WidthAxis::Doppler), GridTooNarrowError);
  EXPECT_THROW(half_power_width(surf, WidthAxis::Eoa), ConfigError);
}

TEST(HalfPower, MissingPeakRaises) {
  const auto a = testutil::half_wave_ula(8);
  const auto surf = ambiguity_surface(a, sequential(8, kDt), {Direction::from_degrees(90, 90), 0.0},
                                      linear_grid(1000, 5000, 100), {90.0}, AngleAxis::Aoa);
  EXPECT_THROW(half_power_width(surf, WidthAxis::Doppler), ConfigError);
}

TEST(AliasScan, SingleLobeIsEmpty) {
  const auto a = testutil::half_wave_ula(8);
  const auto surf = ambiguity_surface(a, sequential(8, kDt), {Direction::from_degrees(90, 90), 0.0},
                                      linear_grid(-1000, 1000, 50), {88.0, 89.0, 90.0, 91.0, 92.0}, AngleAxis::Aoa);
  EXPECT_TRUE(alias_scan(surf).empty());
  EXPECT_EQ(peak_sidelobe(surf), 0.0);
}

TEST(AliasScan, SequentialUlaRidgeAtPredictedPoint) {
  // Broadside reference, probe at 60 deg: the n = 1 ridge sits at
  // (nu - nu') dt = -(1 - cos(60 deg) / 2) = -0.75.
  const std::size_t m = 16;
  const auto a = testutil::half_wave_ula(m);
  const auto seq = sequential(m, kDt);
  const auto surf = ambiguity_surface(a, seq, {Direction::from_degrees(90, 90), 0.0},
                                      linear_grid(-0.8 / kDt, 0.8 / kDt, 0.005 / kDt), linear_grid(30, 150, 0.5),
                                      AngleAxis::Aoa);
  const auto peaks = alias_scan(surf);
  ASSERT_FALSE(peaks.empty());
  EXPECT_GE(peaks.front().magnitude, 0.99);
  bool found = false;
  for (const auto& p : peaks)
    if (std::abs(p.angle_deg - 60.0) < 1e-9 && std::abs(p.doppler * kDt + 0.75) < 1e-9) found = p.magnitude >= 0.99;
  EXPECT_TRUE(found);
  const auto mask = main_lobe_mask(surf);
  const std::size_t ia = 60;   // 60 deg
  const std::size_t id = 10;   // -0.75 / dt
  EXPECT_EQ(mask[ia * surf.cols() + id], 0);
}

TEST(Effective, Factors) {
  EXPECT_EQ(effective_factor(testutil::half_wave_ula(6), Direction::from_degrees(30, 60), -10.0), 1.0);
  const double s = 0.5;
  const auto square = make_octagonal(4, 1, 8, s, touching_panel_radius(4, 8, s), 1.0, 0.0);
  EXPECT_EQ(effective_factor(square, Direction::from_degrees(0, 90), -10.0), 0.25);
  EXPECT_EQ(effective_factor(octagon(), Direction::from_degrees(0, 90), -10.0), 3.0 / 8.0);
}

TEST(Compare, IdenticalSequencesGiveUnitRatios) {
  const auto a = octagon();
  Rng rng(1);
  const auto s = hybrid_init(128, 12.5e-6, 1, a.groups(), rng);
  CompareSettings cfg;
  cfg.reference = {Direction::from_degrees(180, 90), 0.0};
  cfg.doppler_grid = linear_grid(-3000, 3000, 10);
  cfg.angle_grid_deg = linear_grid(50, 130, 1);
  const auto rep = compare_schemes(a, {{"sequential", s}, {"random", s}, {"hybrid", s}}, cfg);
  EXPECT_EQ(rep.broadening_ratio, 1.0);
  EXPECT_EQ(rep.angle_width_ratio, 1.0);
  EXPECT_EQ(rep.xi, 3.0 / 8.0);
  EXPECT_EQ(rep.inverse_xi, 8.0 / 3.0);
}

TEST(Compare, HybridBroaderThanRandomAndCrlbOrdered) {
  const auto a = octagon();
  const double dt = 12.5e-6;
  Rng rng(2);
  const auto seq = sequential(128, dt, 1, a.groups());
  const auto rnd = random_init(128, dt, 1, rng);
  const auto hyb = hybrid_init(128, dt, 1, a.groups(), rng);
  CompareSettings cfg;
  cfg.reference = {Direction::from_degrees(180, 90), 0.0};
  cfg.doppler_grid = linear_grid(-3000, 3000, 5);
  cfg.angle_grid_deg = linear_grid(45, 135, 0.5);
  const auto rep = compare_schemes(a, {{"sequential", seq}, {"random", rnd}, {"hybrid", hyb}}, cfg);
  EXPECT_GT(rep.broadening_ratio, 1.5);
  EXPECT_GE(rep.scheme("hybrid").crlb_nu_effective, rep.scheme("random").crlb_nu_full);
  // |X| at zero Doppler offset does not depend on the switching order.
  EXPECT_EQ(rep.scheme("hybrid").angle_width.width(), rep.scheme("random").angle_width.width());
  EXPECT_THROW(rep.scheme("missing"), ConfigError);
}

TEST(Compare, RequiresThreeMatchingSequences) {
  const auto a = testutil::half_wave_ula(4);
  CompareSettings cfg;
  const auto s = sequential(4, kDt);
  EXPECT_THROW(compare_schemes(a, {{"a", s}, {"b", s}}, cfg), ConfigError);
  EXPECT_THROW(compare_schemes(a, {{"a", s}, {"b", s}, {"c", sequential(4, 2 * kDt)}}, cfg), ConfigError);
}

TEST(Compare, OctagonEoaHalfPowerWidth) {
  // Frozen value for the synthetic q = 2 panels (4 rows at half-wave spacing).
  const auto a = octagon();
  Rng rng(3);
  const auto s = random_init(128, 12.5e-6, 1, rng);
  const auto surf = ambiguity_surface(a, s, {Direction::from_degrees(180, 90), 0.0}, linear_grid(-3000, 3000, 10),
                                      linear_grid(45, 135, 0.5), AngleAxis::Eoa);
  const auto w = half_power_width(surf, WidthAxis::Eoa);
  EXPECT_NEAR(w.width(), 26.199, 0.01);
  EXPECT_NEAR(w.lower + w.upper, 180.0, 1e-9);
}
