#include <gtest/gtest.h>

#include <sstream>

#include "helpers.hpp"
#include "sounder/ambiguity.hpp"
#include "sounder/anneal.hpp"

using namespace sounder;

namespace {

// Independent ambiguity oracle: explicit sum with an arbitrary time origin.
double ambiguity_with_offset(const ArrayModel& array, const SwitchingSequence& seq, const ReceiveParams& mu,
                             const ReceiveParams& mu2, double t0) {
  const std::size_t m = seq.size();
  Complex acc{0.0, 0.0};
  double n1 = 0.0;
  double n2 = 0.0;
  for (std::size_t t = 0; t < seq.snapshots(); ++t)
    for (std::size_t a = 0; a < m; ++a) {
      const double time = t0 + static_cast<double>(seq.slot_of(a) + t * m) * seq.delta_t();
      const auto& e = array[a];
      const Complex b1 = e.pattern.gain(mu.arrival) *
                         std::exp(Complex(0, array.wavenumber() * dot(mu.arrival.unit_vector(), e.position) +
                                                 kTwoPi * mu.doppler * time));
      const Complex b2 = e.pattern.gain(mu2.arrival) *
                         std::exp(Complex(0, array.wavenumber() * dot(mu2.arrival.unit_vector(), e.position) +
                                                 kTwoPi * mu2.doppler * time));
      acc += std::conj(b1) * b2;
      n1 += std::norm(b1);
      n2 += std::norm(b2);
    }
  return std::abs(acc) / std::sqrt(n1 * n2);
}

ReceiveParams random_params(Rng& rng, double nu_span) {
  return {{kTwoPi * rng.uniform01(), kPi * rng.uniform01()}, nu_span * (2.0 * rng.uniform01() - 1.0)};
}

double dirichlet(std::size_t m, double x) {
  const double den = static_cast<double>(m) * std::sin(kPi * x);
  if (std::abs(std::sin(kPi * x)) < 1e-12) return 1.0;  // integer x: the kernel peaks
  return std::abs(std::sin(kPi * static_cast<double>(m) * x) / den);
}

}  // namespace

TEST(Ambiguity, SelfProductIsOne) {
  Rng rng(1);
  const auto a = testutil::half_wave_ula(9);
  const auto s = random_init(9, 1e-5, 2, rng);
  for (int i = 0; i < 50; ++i) {
    const auto mu = random_params(rng, 5000);
    const Complex x = ambiguity_value(a, s, mu, mu);
    EXPECT_NEAR(x.real(), 1.0, 1e-12);
    EXPECT_NEAR(x.imag(), 0.0, 1e-12);
  }
}

TEST(Ambiguity, BoundedSymmetricAndMatchesOracle) {
  Rng rng(2);
  const double sp = 0.5;
  const auto oct = make_octagonal(8, 2, 2, sp, touching_panel_radius(8, 2, sp), 1.0, 2.0);
  const auto ula = testutil::half_wave_ula(6);
  for (int i = 0; i < 300; ++i) {
    const auto& a = (i % 2) ? oct : ula;
    const auto s = random_init(a.size(), 1e-5, 1 + rng.uniform_index(2), rng);
    const auto mu = random_params(rng, 20000);
    const auto mu2 = random_params(rng, 20000);
    double x = 0.0;
    double y = 0.0;
    try {
      x = std::abs(ambiguity_value(a, s, mu, mu2));
      y = std::abs(ambiguity_value(a, s, mu2, mu));
    } catch (const DegenerateDirectionError&) {
      continue;
    }
    EXPECT_LE(x, 1.0 + 1e-12);
    EXPECT_NEAR(x, y, 1e-12);
    EXPECT_NEAR(x, ambiguity_with_offset(a, s, mu, mu2, 0.0), 1e-10);
    EXPECT_NEAR(x, ambiguity_with_offset(a, s, mu, mu2, 0.37), 1e-10);
  }
}

TEST(Ambiguity, DegenerateDirectionRaises) {
  const double sp = 0.5;
  const auto oct = make_octagonal(4, 1, 2, sp, 1.0, 1.0, 2.0);
  const ReceiveParams up{{0.0, 0.0}, 0.0};  // zenith: every panel sees grazing incidence
  EXPECT_THROW(ambiguity_value(oct, sequential(8, 1e-5), up, up), DegenerateDirectionError);
}

TEST(Ambiguity, DirichletZero) {
  const double dt = 1e-5;
  const std::size_t m = 8;
  const ReceiveParams mu{Direction::from_degrees(90, 90), 0.0};
  const ReceiveParams mu2{Direction::from_degrees(90, 90), 1.0 / (static_cast<double>(m) * dt)};
  EXPECT_NEAR(std::abs(ambiguity_value(testutil::half_wave_ula(m), sequential(m, dt), mu, mu2)), 0.0, 1e-12);
}

TEST(Ambiguity, DopplerCutIsDirichletKernel) {
  const double dt = 2e-5;
  for (std::size_t m : {4U, 8U, 13U}) {
    const auto a = testutil::half_wave_ula(m);
    const auto s = sequential(m, dt);
    const ReceiveParams mu{Direction::from_degrees(90, 90), 0.0};
    for (int i = 0; i <= 200; ++i) {
      const double dnu = (-1.0 + 0.01 * i) / dt;
      const double x = std::abs(ambiguity_value(a, s, mu, {mu.arrival, -dnu}));
      EXPECT_NEAR(x, dirichlet(m, dnu * dt), 1e-9);
    }
  }
}

TEST(Ambiguity, SequentialUlaAliasPoint) {
  // Half-wave ULA, broadside reference: cos(phi') * pi per element is undone
  // by 2 pi (nu' - nu) dt per slot when (nu' - nu) dt = n - cos(phi') / 2.
  const double dt = 1e-5;
  const auto a = testutil::half_wave_ula(16);
  const auto s = sequential(16, dt);
  const ReceiveParams mu{Direction::from_degrees(90, 90), 0.0};
  for (double phi_deg : {30.0, 60.0, 75.0, 120.0})
    for (int n : {-1, 0, 1}) {
      const double shift = (n - std::cos(deg2rad(phi_deg)) / 2.0) / dt;
      const ReceiveParams mu2{Direction::from_degrees(phi_deg, 90), shift};
      EXPECT_NEAR(std::abs(ambiguity_value(a, s, mu, mu2)), 1.0, 1e-9) << phi_deg << " " << n;
    }
}

TEST(Objective, SingleSelfSampleGivesVolume) {
  const auto a = testutil::half_wave_ula(5);
  const auto s = sequential(5, 1e-5);
  const ReceiveParams mu{Direction::from_degrees(40, 70), 0.0};
  const ObjectiveEvaluator f(a, {{mu, mu}}, 123.0, 6, 5, 1e-5, 1);
  EXPECT_NEAR(f.evaluate(s).value, 123.0, 1e-10);
}

TEST(Objective, HigherPowerNeverIncreases) {
  Rng rng(4);
  const auto a = testutil::half_wave_ula(8);
  const auto s = random_init(8, 1e-5, 1, rng);
  const Region region{default_nu_up(1e-5), false};
  double previous = std::numeric_limits<double>::infinity();
  for (int p : {2, 4, 6, 8}) {
    const double v = objective(a, s, region, {p, 1024, 3, 1}).value;
    EXPECT_LE(v, previous);
    previous = v;
  }
}

TEST(Objective, CachedEvaluatorMatchesDirectPath) {
  Rng rng(5);
  const double sp = 0.5;
  const auto oct = make_octagonal(8, 2, 2, sp, touching_panel_radius(8, 2, sp), 1.0, 2.0);
  const auto s = random_init(oct.size(), 1e-5, 2, rng);
  const Region region{default_nu_up(1e-5), true};
  const ObjectiveConfig cfg{6, 512, 9, 1};
  const auto f = make_objective(oct, s, region, cfg);
  const auto cached = f.evaluate(s);
  const auto direct = objective_direct(oct, s, region_samples(region, cfg), region.volume(), 6);
  EXPECT_NEAR(cached.value, direct.value, 1e-10 * direct.value);
  EXPECT_EQ(cached.degenerate_samples, direct.degenerate_samples);
}

TEST(Objective, ThreadCountDoesNotChangeBits) {
  Rng rng(6);
  const auto a = testutil::half_wave_ula(16);
  const auto s = random_init(16, 1e-5, 1, rng);
  const Region region{default_nu_up(1e-5), false};
  const double one = objective(a, s, region, {6, 2048, 0, 1}).value;
  for (unsigned t : {2U, 3U, 4U}) EXPECT_EQ(objective(a, s, region, {6, 2048, 0, t}).value, one);
}

TEST(Objective, RejectsBadConfig) {
  const auto a = testutil::half_wave_ula(4);
  const auto s = sequential(4, 1e-5);
  EXPECT_THROW(objective(a, s, {0.0, false}, {}), ConfigError);
  EXPECT_THROW(objective(a, s, {100.0, false}, {5, 16, 0, 1}), ConfigError);
  EXPECT_THROW(objective(a, s, {100.0, false}, {6, 0, 0, 1}), ConfigError);
  const auto f = make_objective(a, s, {100.0, false}, {6, 16, 0, 1});
  EXPECT_THROW(f.evaluate(sequential(4, 2e-5)), ConfigError);
}

TEST(Objective, OptimizedRandomBeatsSequentialOnUla) {
  const double dt = 1e-5;
  const auto a = testutil::half_wave_ula(16);
  const auto seq = sequential(16, dt);
  const auto f = make_objective(a, seq, {default_nu_up(dt), false}, {6, 2048, 0, 1});
  Rng rng(7);
  AnnealConfig cfg;
  cfg.k_max = 200;
  cfg.seed = 8;
  const auto result = anneal(random_init(16, dt, 1, rng), cfg, f);
  EXPECT_LT(f.evaluate(result.sequence).value, f.evaluate(seq).value);
}

TEST(Surface, ReferenceSampleIsZeroDb) {
  Rng rng(9);
  const double sp = 0.5;
  const auto oct = make_octagonal(8, 4, 4, sp, touching_panel_radius(8, 4, sp), 1.0, 2.0);
  const auto s = random_init(oct.size(), 1e-5, 1, rng);
  const ReceiveParams mu{Direction::from_degrees(180, 90), 150.0};
  const auto surf = ambiguity_surface(oct, s, mu, linear_grid(-200, 200, 50), linear_grid(80, 100, 1), AngleAxis::Eoa);
  EXPECT_NEAR(surf.magnitude(10, 4), 1.0, 1e-12);
  EXPECT_NEAR(surf.db(10, 4), 0.0, 1e-10);
  for (double v : surf.values) EXPECT_LE(v, 1.0 + 1e-12);
}

TEST(Surface, MatchesPointwiseAmbiguity) {
  Rng rng(10);
  const auto a = testutil::half_wave_ula(7);
  const auto s = random_init(7, 1e-5, 2, rng);
  const ReceiveParams mu{Direction::from_degrees(70, 90), 100.0};
  const RVector dg = linear_grid(-3000, 3000, 500);
  const RVector ag = linear_grid(10, 170, 20);
  const auto surf = ambiguity_surface(a, s, mu, dg, ag, AngleAxis::Aoa, 2);
  for (std::size_t ia = 0; ia < ag.size(); ++ia)
    for (std::size_t id = 0; id < dg.size(); ++id) {
      const ReceiveParams mu2{Direction::from_degrees(ag[ia], 90), mu.doppler - dg[id]};
      EXPECT_NEAR(surf.magnitude(ia, id), std::abs(ambiguity_value(a, s, mu, mu2)), 1e-12);
    }
}

TEST(Surface, SymmetricUnderSwap) {
  Rng rng(11);
  const auto a = testutil::half_wave_ula(6);
  const auto s = random_init(6, 1e-5, 1, rng);
  const ReceiveParams mu{Direction::from_degrees(90, 90), 0.0};
  const RVector dg = linear_grid(-1000, 1000, 250);
  const auto surf = ambiguity_surface(a, s, mu, dg, {40.0}, AngleAxis::Aoa);
  for (std::size_t id = 0; id < dg.size(); ++id) {
    // Swapping roles: reference at (40 deg, -dnu) probing back at mu.
    const ReceiveParams other{Direction::from_degrees(40, 90), -dg[id]};
    const auto back = ambiguity_surface(a, s, other, {-dg[id]}, {90.0}, AngleAxis::Aoa);
    EXPECT_NEAR(surf.magnitude(0, id), back.magnitude(0, 0), 1e-12);
  }
}

TEST(Surface, GridValidationAndCsv) {
  const auto a = testutil::half_wave_ula(3);
  const auto s = sequential(3, 1e-5);
  const ReceiveParams mu{Direction::from_degrees(90, 90), 0.0};
  EXPECT_THROW(ambiguity_surface(a, s, mu, {1.0, 0.0}, {90.0}, AngleAxis::Aoa), ConfigError);
  EXPECT_THROW(ambiguity_surface(a, s, mu, {}, {90.0}, AngleAxis::Aoa), ConfigError);
  EXPECT_EQ(linear_grid(-1, 1, 0.5), (RVector{-1, -0.5, 0, 0.5, 1}));
  const auto surf = ambiguity_surface(a, s, mu, {0.0, 10.0}, {90.0}, AngleAxis::Aoa);
  std::ostringstream out;
  write_surface_csv(surf, out);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "delta_doppler_hz,angle_deg,magnitude_db");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}
