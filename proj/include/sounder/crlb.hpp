// crlb.hpp
// Cramer-Rao bounds for AOA and Doppler of a single path seen by a receive array.
//
// Closed forms for the centered omni ULA, plus a numeric Fisher information
// pipeline (finite-difference Jacobian of the noise-free mean) that does not
// share any code path with them.

#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <sstream>
#include <string>

#include "arrays.hpp"
#include "core.hpp"
#include "signal.hpp"
#include "switching.hpp"

namespace sounder {

/// Single-path parameters [phi, nu, r, psi].
struct ParamVector {
  double azimuth = kPi / 2;  // rad
  double doppler = 0.0;      // Hz
  double amplitude = 1.0;
  double phase = 0.0;  // rad
};

inline constexpr std::array<const char*, 4> kParamNames{"phi", "nu", "r", "psi"};

/// sigma^2 * 6 / (r^2 M (M^2 - 1)) * (lambda / (2 pi d sin phi))^2.
inline double crlb_aoa(std::size_t count, double spacing, double wavelength, double azimuth, double amplitude,
                       double sigma) {
  require(count >= 2, "AOA bound needs at least two elements");
  require(spacing > 0.0 && wavelength > 0.0, "spacing and wavelength must be positive");
  require(amplitude > 0.0, "path amplitude must be positive");
  const double s = std::sin(azimuth);
  if (std::abs(s) < 1e-12) throw EndfireSingularityError("AOA bound diverges at endfire (sin phi = 0)");
  const double m = static_cast<double>(count);
  const double scale = wavelength / (kTwoPi * spacing * s);
  return sigma * sigma * 6.0 / (amplitude * amplitude * m * (m * m - 1.0)) * scale * scale;
}

/// (1/8) * (sigma / (r pi |eta|))^2 for centered activation instants eta.
inline double crlb_doppler(std::span<const double> eta_centered, double amplitude, double sigma) {
  require(amplitude > 0.0, "path amplitude must be positive");
  const double norm = std::sqrt(squared_norm(eta_centered));
  if (!(norm > 0.0)) throw UnobservableDopplerError("all activation instants coincide; Doppler is unobservable");
  const double x = sigma / (amplitude * kPi * norm);
  return x * x / 8.0;
}

struct FisherInfo {
  Eigen::Matrix4d fim;
  Eigen::MatrixXcd jacobian;  // rows: samples, cols: [phi, nu, r, psi]
};

// Noise-free mean r e^{j psi} (b_rx . a_nu) for an arrival at (phi, elevation).
inline CVector mean_signal(const ArrayModel& array, const SwitchingSequence& seq, const ParamVector& theta,
                           double elevation) {
  CVector s = basis(array, seq, {{theta.azimuth, elevation}, theta.doppler});
  const Complex g = std::polar(theta.amplitude, theta.phase);
  for (auto& v : s) v *= g;
  return s;
}

/// Central-difference steps: phi 1e-6 rad, nu 1e-3/|eta| Hz, r 1e-6 r, psi 1e-6 rad.
inline std::array<double, 4> fd_steps(const SwitchingSequence& seq, const ParamVector& theta) {
  const RVector eta = eta_vector(seq, true);
  const double norm = std::sqrt(squared_norm(eta));
  return {1e-6, norm > 0.0 ? 1e-3 / norm : 1e-3, 1e-6 * theta.amplitude, 1e-6};
}

// F = (2 / sigma^2) Re{D^H D} with D the central-difference Jacobian.
inline FisherInfo compute_fim(const ArrayModel& array, const SwitchingSequence& seq, const ParamVector& theta,
                              double sigma, double elevation = kPi / 2) {
  require(sigma > 0.0, "noise sigma must be positive");
  require(theta.amplitude > 0.0, "path amplitude must be positive");
  const auto steps = fd_steps(seq, theta);
  const std::size_t n = seq.size() * seq.snapshots();
  FisherInfo out;
  out.jacobian.resize(static_cast<Eigen::Index>(n), 4);
  for (int p = 0; p < 4; ++p) {
    ParamVector plus = theta;
    ParamVector minus = theta;
    double* fields_plus[] = {&plus.azimuth, &plus.doppler, &plus.amplitude, &plus.phase};
    double* fields_minus[] = {&minus.azimuth, &minus.doppler, &minus.amplitude, &minus.phase};
    *fields_plus[p] += steps[static_cast<std::size_t>(p)];
    *fields_minus[p] -= steps[static_cast<std::size_t>(p)];
    const CVector sp = mean_signal(array, seq, plus, elevation);
    const CVector sm = mean_signal(array, seq, minus, elevation);
    for (std::size_t i = 0; i < n; ++i)
      out.jacobian(static_cast<Eigen::Index>(i), p) = (sp[i] - sm[i]) / (2.0 * steps[static_cast<std::size_t>(p)]);
  }
  const Eigen::Matrix4d raw = (2.0 / (sigma * sigma)) * (out.jacobian.adjoint() * out.jacobian).real();
  out.fim = 0.5 * (raw + raw.transpose());
  return out;
}

/// max over i != j of |F_ij| / sqrt(F_ii F_jj): the largest parameter coupling, unit-free.
inline double off_diagonal_ratio(const Eigen::Matrix4d& fim) {
  double worst = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) {
        const double d = std::sqrt(fim(i, i) * fim(j, j));
        if (d > 0.0) worst = std::max(worst, std::abs(fim(i, j)) / d);
      }
  return worst;
}

struct CRLBResult {
  ParamVector params;
  std::array<double, 4> variance{};             // full-inverse diagonal [phi, nu, r, psi]
  std::array<double, 4> reciprocal_diagonal{};  // 1 / F_ii (the diagonal-only shortcut)
  Eigen::Matrix4d fim;
  double off_diag_ratio = 0.0;

  double var_phi() const { return variance[0]; }
  double var_nu() const { return variance[1]; }
  double var_r() const { return variance[2]; }
  double var_psi() const { return variance[3]; }
};

/// The FIM has a (near) null direction; `null_space` names the confounded combination.
struct SingularFimError : NumericError {
  SingularFimError(const std::string& what, std::string combination)
      : NumericError(what), null_space(std::move(combination)) {}
  std::string null_space;
};

// Correlation-normalized eigenvalues below this are treated as a null space.
inline constexpr double kFimSingularTolerance = 1e-8;

inline CRLBResult fim_numeric(const ArrayModel& array, const SwitchingSequence& seq, const ParamVector& theta,
                              double sigma, double elevation = kPi / 2) {
  const FisherInfo info = compute_fim(array, seq, theta, sigma, elevation);
  const Eigen::Matrix4d& F = info.fim;
  CRLBResult r;
  r.params = theta;
  r.fim = F;
  r.off_diag_ratio = off_diagonal_ratio(F);

  Eigen::Vector4d scale;
  for (int i = 0; i < 4; ++i) {
    if (!(F(i, i) > 0.0)) {
      throw SingularFimError("FIM has zero information on " + std::string(kParamNames[static_cast<std::size_t>(i)]),
                             kParamNames[static_cast<std::size_t>(i)]);
    }
    scale(i) = 1.0 / std::sqrt(F(i, i));
    r.reciprocal_diagonal[static_cast<std::size_t>(i)] = 1.0 / F(i, i);
  }
  const Eigen::Matrix4d corr = scale.asDiagonal() * F * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(corr);
  if (eig.eigenvalues()(0) < kFimSingularTolerance) {
    const Eigen::Vector4d v = eig.eigenvectors().col(0);
    std::ostringstream combo;
    combo.precision(4);
    bool first = true;
    for (int i = 0; i < 4; ++i) {
      if (std::abs(v(i)) < 1e-3) continue;
      // Express the null vector in physical units: d theta_i = v_i / sqrt(F_ii).
      combo << (first ? "" : " + ") << v(i) * scale(i) << "*d" << kParamNames[static_cast<std::size_t>(i)];
      first = false;
    }
    throw SingularFimError("FIM is singular; confounded parameter combination: " + combo.str(), combo.str());
  }
  // Invert in correlation form; F's diagonal spans many decades (rad vs Hz).
  const Eigen::Matrix4d inv = scale.asDiagonal() * corr.inverse() * scale.asDiagonal();
  for (int i = 0; i < 4; ++i) r.variance[static_cast<std::size_t>(i)] = inv(i, i);
  return r;
}

/// Minimum eigenvalue of the symmetrized FIM, for the PSD check.
inline double fim_min_eigenvalue(const Eigen::Matrix4d& fim) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(fim);
  return eig.eigenvalues()(0);
}

}  // namespace sounder
