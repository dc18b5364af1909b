#pragma once

// Test-only oracles, independent of the library paths they check:
//  - a long-double evaluation of the entropy kernel,
//  - random physical two-mode covariances with a KNOWN symplectic spectrum
//    (Williamson form conjugated by a random symplectic),
//  - a dense eta-scan that brackets the sudden-death root without bisection.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>

#include "oamcv/channel.hpp"
#include "oamcv/gaussian.hpp"
#include "oamcv/philox.hpp"

namespace testutil {

/// Independent high-precision evaluation of the entropy kernel, in bits.
inline long double hp_g(long double nu) {
  if (nu <= 1.0L) return 0.0L;
  const long double up = (nu + 1) / 2;
  const long double dn = (nu - 1) / 2;
  return up * std::log2(up) - dn * std::log2(dn);
}

/// Deterministic uniform generator for test data (Philox-backed).
class TestRng {
 public:
  explicit TestRng(std::uint64_t seed, std::uint32_t stream = 0xFEEDu)
      : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)}, stream_(stream) {}

  /// Uniform in [0, 1).
  double uniform() {
    const auto out = oamcv::Philox4x32::block(
        {std::uint32_t(index_), std::uint32_t(index_ >> 32), stream_, 0xA5A5A5A5u}, key_);
    ++index_;
    const std::uint64_t bits = (std::uint64_t(out[1]) << 32) | out[0];
    return double(bits >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  oamcv::Philox4x32::Key key_;
  std::uint32_t stream_;
  std::uint64_t index_ = 0;
};

inline Eigen::Matrix2d rotation2(double theta) {
  Eigen::Matrix2d r;
  r << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
  return r;
}

/// Random symplectic on two modes: per-mode rotations, a beamsplitter and
/// per-mode squeezers.
inline Eigen::Matrix4d random_symplectic(TestRng& rng) {
  const auto mode_rotations = [](double t1, double t2) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    m.block<2, 2>(0, 0) = rotation2(t1);
    m.block<2, 2>(2, 2) = rotation2(t2);
    return m;
  };
  const auto beamsplitter = [](double tau) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    const double c = std::cos(tau);
    const double s = std::sin(tau);
    m.block<2, 2>(0, 0) = c * Eigen::Matrix2d::Identity();
    m.block<2, 2>(0, 2) = s * Eigen::Matrix2d::Identity();
    m.block<2, 2>(2, 0) = -s * Eigen::Matrix2d::Identity();
    m.block<2, 2>(2, 2) = c * Eigen::Matrix2d::Identity();
    return m;
  };
  const double two_pi = 2.0 * 3.14159265358979323846;
  Eigen::Vector4d squeeze;
  const double r1 = rng.uniform(-0.8, 0.8);
  const double r2 = rng.uniform(-0.8, 0.8);
  squeeze << std::exp(r1), std::exp(-r1), std::exp(r2), std::exp(-r2);
  return mode_rotations(rng.uniform(0, two_pi), rng.uniform(0, two_pi)) *
         beamsplitter(rng.uniform(0, two_pi)) * squeeze.asDiagonal() *
         mode_rotations(rng.uniform(0, two_pi), rng.uniform(0, two_pi));
}

/// Random physical two-mode covariance with known symplectic spectrum
/// {nu1, nu2} (each drawn from [1, 3]), via V = S diag(nu) S^T.
inline Eigen::Matrix4d random_physical_cov(TestRng& rng, double* nu1_out = nullptr,
                                           double* nu2_out = nullptr) {
  const double nu1 = rng.uniform(1.0, 3.0);
  const double nu2 = rng.uniform(1.0, 3.0);
  if (nu1_out) *nu1_out = std::min(nu1, nu2);
  if (nu2_out) *nu2_out = std::max(nu1, nu2);
  Eigen::Vector4d d;
  d << nu1, nu1, nu2, nu2;
  const Eigen::Matrix4d s = random_symplectic(rng);
  return s * d.asDiagonal() * s.transpose();
}

/// Brackets the PPT = 1 crossing by a dense eta scan (step-sized, no
/// bisection); nullopt when no crossing is found in (0, 1].
inline std::optional<std::pair<double, double>> dense_scan_bracket(const oamcv::EprParams& epr,
                                                                   double delta, double step) {
  const auto source = oamcv::initial_state(epr);
  const auto ppt_at = [&](double eta) {
    return oamcv::ppt_value(oamcv::apply_channel(source, oamcv::ChannelParams(eta, delta)));
  };
  double prev_eta = step;
  double prev = ppt_at(prev_eta);
  for (double eta = 2 * step; eta <= 1.0 + step / 2; eta += step) {
    const double clamped = std::min(eta, 1.0);
    const double cur = ppt_at(clamped);
    if ((prev >= 1.0) != (cur >= 1.0)) {
      return std::make_pair(prev_eta, clamped);
    }
    prev_eta = clamped;
    prev = cur;
  }
  return std::nullopt;
}

}  // namespace testutil
