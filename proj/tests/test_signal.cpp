#include <gtest/gtest.h>

#include "helpers.hpp"
#include "sounder/signal.hpp"

using namespace sounder;

TEST(DopplerVector, ZeroDopplerIsAllOnes) {
  Rng rng(1);
  const auto s = random_init(12, 1e-4, 2, rng);
  for (const auto& v : doppler_vector(s, 0.0)) EXPECT_EQ(v, Complex(1.0, 0.0));
}

TEST(DopplerVector, Unimodular) {
  Rng rng(2);
  const auto s = random_init(20, 3e-5, 3, rng);
  for (const auto& v : doppler_vector(s, 1234.5)) EXPECT_NEAR(std::abs(v), 1.0, 1e-14);
}

TEST(DopplerVector, TwoSlotQuarterTurn) {
  const CVector d = doppler_vector(sequential(2, 1e-3), 250.0);
  EXPECT_NEAR(std::arg(d[0]), -kPi / 4, 1e-12);
  EXPECT_NEAR(std::arg(d[1]), kPi / 4, 1e-12);
}

TEST(Basis, ZeroDopplerIsTiledSteering) {
  const auto a = testutil::half_wave_ula(5);
  const Direction dir = Direction::from_degrees(70, 80);
  const CVector steer = steering_vector(a, dir);
  const CVector b = basis(a, sequential(5, 1e-5, 3), {dir, 0.0});
  ASSERT_EQ(b.size(), 15U);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(b[i], steer[i % 5]);
}

TEST(Basis, BroadsideZeroDopplerAllOnes) {
  const CVector b = basis(testutil::half_wave_ula(8), sequential(8, 1e-5), {Direction::from_degrees(90, 90), 0.0});
  for (const auto& v : b) {
    EXPECT_NEAR(v.real(), 1.0, 1e-12);
    EXPECT_NEAR(v.imag(), 0.0, 1e-12);
  }
}

TEST(Basis, NormIsPatternEnergyTimesSnapshots) {
  const double s = 0.5;
  const auto a = make_octagonal(8, 2, 2, s, touching_panel_radius(8, 2, s), 1.0, 2.0);
  Rng rng(3);
  const auto seq = random_init(a.size(), 1e-5, 3, rng);
  for (int trial = 0; trial < 20; ++trial) {
    const Direction dir{kTwoPi * rng.uniform01(), kPi * rng.uniform01()};
    double energy = 0.0;
    for (double p : element_powers(a, dir)) energy += p;
    EXPECT_NEAR(squared_norm(basis(a, seq, {dir, 800.0 * rng.uniform01()})), 3.0 * energy, 1e-10);
  }
}

TEST(Basis, SizeMismatchRejected) {
  EXPECT_THROW(basis(testutil::half_wave_ula(4), sequential(5, 1e-5), {}), ConfigError);
}

TEST(Synthesize, NoiselessEqualsScaledBasis) {
  const auto a = testutil::half_wave_ula(6);
  Rng rng(4);
  const auto seq = random_init(6, 1e-5, 1, rng);
  const ReceiveParams mu{Direction::from_degrees(60, 90), 300.0};
  const PathGain g{0.7, 1.1};
  const CVector y = synthesize(a, seq, mu, g, 0.0, rng);
  const CVector b = basis(a, seq, mu);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_EQ(y[i], g.value() * b[i]);
}

TEST(Synthesize, NoiseVarianceMatchesSigma) {
  const auto a = testutil::half_wave_ula(4);
  const auto seq = sequential(4, 1e-5);
  const ReceiveParams mu{Direction::from_degrees(60, 90), 0.0};
  const PathGain g{1.0, 0.0};
  const double sigma = 0.3;
  const CVector mean = basis(a, seq, mu);
  Rng rng(5);
  const int draws = 10000;
  std::vector<double> var(4, 0.0);
  for (int d = 0; d < draws; ++d) {
    const CVector y = synthesize(a, seq, mu, g, sigma, rng);
    for (std::size_t i = 0; i < 4; ++i) var[i] += std::norm(y[i] - mean[i]);
  }
  for (double v : var) EXPECT_NEAR(v / draws, sigma * sigma, 0.05 * sigma * sigma);
}

TEST(Synthesize, SnrDefinition) {
  const double s = 0.5;
  const auto a = make_octagonal(8, 1, 2, s, touching_panel_radius(8, 2, s), 1.0, 2.0);
  const Direction dir = Direction::from_degrees(10, 90);
  const PathGain g{2.0, 0.0};
  const double sigma = 0.5;
  double energy = 0.0;
  for (double p : element_powers(a, dir)) energy += p;
  EXPECT_NEAR(snr(a, dir, g, sigma), 4.0 * energy / (16.0 * 0.25), 1e-12);
  // Empirical SNR from synthesized data agrees with the definition.
  Rng rng(6);
  const auto seq = sequential(a.size(), 1e-5);
  const CVector mean = basis(a, seq, {dir, 0.0});
  double signal = 0.0;
  for (const auto& v : mean) signal += std::norm(g.value() * v);
  double noise = 0.0;
  const int draws = 4000;
  for (int d = 0; d < draws; ++d) {
    const CVector y = synthesize(a, seq, {dir, 0.0}, g, sigma, rng);
    for (std::size_t i = 0; i < y.size(); ++i) noise += std::norm(y[i] - g.value() * mean[i]);
  }
  noise /= draws;
  EXPECT_NEAR(signal / noise, snr(a, dir, g, sigma), 0.03 * snr(a, dir, g, sigma));
}
