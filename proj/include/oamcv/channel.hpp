#pragma once

// EPR source parameterized by measured correlation variances, the one-sided
// lossy/noisy channel acting on the Pr mode, and the bisection solver for the
// entanglement sudden-death boundary.

#include <cmath>
#include <optional>

#include "oamcv/errors.hpp"
#include "oamcv/gaussian.hpp"

namespace oamcv {

/// Source pair variances in shot-noise units: V (correlated quadratures)
/// and V' (anti-correlated). V V' >= 1 by the uncertainty principle, with
/// equality only for pure states.
template <class Scalar>
struct EprParamsT {
  Scalar v_corr;
  Scalar v_anti;

  EprParamsT(Scalar v_corr_in, Scalar v_anti_in) : v_corr(v_corr_in), v_anti(v_anti_in) {
    if (!(v_corr > 0) || !(v_anti > 0)) {
      throw UnphysicalSource("source variances must be positive");
    }
    if (v_corr * v_anti < Scalar(1) - Scalar(1e-6)) {
      throw UnphysicalSource("V V' < 1 violates the uncertainty principle");
    }
  }
};

using EprParams = EprParamsT<double>;

/// One-sided channel on the Pr mode: transmission efficiency eta in [0, 1]
/// and excess noise delta >= 0 (shot-noise units).
template <class Scalar>
struct ChannelParamsT {
  Scalar eta;
  Scalar delta;

  ChannelParamsT(Scalar eta_in, Scalar delta_in) : eta(eta_in), delta(delta_in) {
    if (!(eta >= 0 && eta <= 1)) {
      throw DomainError("transmission efficiency must be in [0, 1]");
    }
    if (!(delta >= 0)) {
      throw DomainError("excess noise must be >= 0");
    }
  }
};

using ChannelParams = ChannelParamsT<double>;

/// Convert measured correlation / anti-correlation levels in dB to variances:
/// V = 10^(dB/10).
template <class Scalar>
EprParamsT<Scalar> epr_from_db(Scalar corr_db, Scalar anti_db) {
  return EprParamsT<Scalar>(std::pow(Scalar(10), corr_db / 10),
                            std::pow(Scalar(10), anti_db / 10));
}

/// Two-mode source covariance, mode order (Conj, Pr):
/// A = B = ((V+V')/2) I, C = ((V'-V)/2) Z, zero displacement.
template <class Scalar>
GaussianStateT<Scalar> initial_state(const EprParamsT<Scalar>& epr) {
  const Scalar a = (epr.v_corr + epr.v_anti) / 2;
  const Scalar c = (epr.v_anti - epr.v_corr) / 2;
  MatrixX<Scalar> cov = MatrixX<Scalar>::Zero(4, 4);
  cov.diagonal().setConstant(a);
  cov(0, 2) = cov(2, 0) = c;
  cov(1, 3) = cov(3, 1) = -c;
  return GaussianStateT<Scalar>(cov);
}

/// Channel map on the Pr mode (mode index 1): B -> eta B + (1-eta)(1+delta) I,
/// C -> sqrt(eta) C, A unchanged; Pr displacement scales by sqrt(eta).
/// At eta = 1, delta = 0 this is the identity bit-for-bit.
template <class Scalar>
GaussianStateT<Scalar> apply_channel(const GaussianStateT<Scalar>& state,
                                     const ChannelParamsT<Scalar>& ch) {
  if (state.n_modes() != 2) {
    throw DimensionMismatch("channel acts on two-mode states");
  }
  if (!is_physical(state)) {
    throw NonPhysicalCovariance("channel input must be physical");
  }
  const Scalar root_eta = std::sqrt(ch.eta);
  const Scalar noise = (1 - ch.eta) * (1 + ch.delta);
  MatrixX<Scalar> cov = state.cov();
  cov.template block<2, 2>(2, 2) =
      ch.eta * state.cov().template block<2, 2>(2, 2) + noise * Matrix2<Scalar>::Identity();
  cov.template block<2, 2>(0, 2) *= root_eta;
  cov.template block<2, 2>(2, 0) *= root_eta;
  VectorX<Scalar> disp = state.displacement();
  disp.template tail<2>() *= root_eta;
  return GaussianStateT<Scalar>(disp, cov);
}

/// Transmission efficiency eta* where the PPT value crosses 1 for the given
/// excess noise, located by bisection on [1e-9, 1] to |d eta| <= 1e-6.
/// Returns nullopt when the state stays entangled for every eta in (0, 1]
/// (a lossy but noiseless channel). The PPT value is required to be monotone
/// non-increasing in eta on a coarse grid before bisecting.
template <class Scalar>
std::optional<Scalar> sudden_death_threshold(const EprParamsT<Scalar>& epr, Scalar delta) {
  if (!(delta >= 0)) {
    throw DomainError("excess noise must be >= 0");
  }
  const auto source = initial_state(epr);
  const auto ppt_at = [&](Scalar eta) {
    return ppt_value(apply_channel(source, ChannelParamsT<Scalar>(eta, delta)));
  };

  Scalar lo = Scalar(1e-9);
  Scalar hi = Scalar(1);
  if (ppt_at(hi) >= 1) {
    throw NotEntangledAtUnity("source is not entangled at eta = 1");
  }

  // Guard the bracketing assumption.
  constexpr int kGridPoints = 21;
  Scalar prev = ppt_at(lo);
  for (int k = 1; k < kGridPoints; ++k) {
    const Scalar eta =
        std::min(lo + (hi - lo) * Scalar(k) / Scalar(kGridPoints - 1), Scalar(1));
    const Scalar cur = ppt_at(eta);
    if (cur > prev + Scalar(1e-10)) {
      throw NumericalError("PPT value is not monotone in eta; bisection bracket invalid");
    }
    prev = cur;
  }

  if (ppt_at(lo) < 1) {
    return std::nullopt;
  }
  while (hi - lo > Scalar(1e-6)) {
    const Scalar mid = (lo + hi) / 2;
    if (ppt_at(mid) >= 1) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return (lo + hi) / 2;
}

}  // namespace oamcv
