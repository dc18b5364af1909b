#pragma once

// Gaussian states as displacement vector + covariance matrix, and the pure
// functions on them: symplectic spectra, von Neumann entropy, the thermal
// reference state, relative-entropy coherence, the two-mode PPT value and
// physicality checks. All variances are in shot-noise units (vacuum = 1),
// quadrature ordering (X1, Y1, X2, Y2, ...) with X = a + a^dag,
// Y = (a - a^dag)/i. Entropies and coherence are in bits.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <utility>

#include "oamcv/errors.hpp"

namespace oamcv {

template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

/// Symplectic eigenvalues below 1 - kPhysicalityTol are treated as unphysical;
/// values inside the tolerance band are clamped to 1 (pure modes sit exactly
/// on the boundary).
inline constexpr double kPhysicalityTol = 1e-9;

/// Relative tolerance used to pair the 2n moduli of eig(Omega V) into n
/// symplectic values.
inline constexpr double kPairingTol = 1e-8;

/// Symplectic form for n modes: direct sum of [[0, 1], [-1, 0]] blocks.
template <class Scalar>
MatrixX<Scalar> omega_matrix(Eigen::Index n_modes) {
  MatrixX<Scalar> omega = MatrixX<Scalar>::Zero(2 * n_modes, 2 * n_modes);
  for (Eigen::Index k = 0; k < n_modes; ++k) {
    omega(2 * k, 2 * k + 1) = Scalar(1);
    omega(2 * k + 1, 2 * k) = Scalar(-1);
  }
  return omega;
}

/// N-mode Gaussian state. The covariance matrix is symmetrized on
/// construction; physicality is checked by the operations that require it,
/// not by the constructor, so unphysical matrices (e.g. raw statistical
/// estimates) can be represented and queried.
template <class Scalar>
class GaussianStateT {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  template <class DerivedC>
  explicit GaussianStateT(const Eigen::MatrixBase<DerivedC>& cov)
      : GaussianStateT(Vector::Zero(cov.rows()), cov) {}

  template <class DerivedD, class DerivedC>
  GaussianStateT(const Eigen::MatrixBase<DerivedD>& displacement,
                 const Eigen::MatrixBase<DerivedC>& cov)
      : displacement_(displacement) {
    if (cov.rows() != cov.cols() || cov.rows() < 2 || cov.rows() % 2 != 0) {
      throw DimensionMismatch("covariance matrix must be 2n x 2n with n >= 1");
    }
    if (displacement_.size() != cov.rows()) {
      throw DimensionMismatch("displacement length must match 2n");
    }
    cov_ = ((cov + cov.transpose()) / Scalar(2)).eval();
  }

  static GaussianStateT vacuum(Eigen::Index n_modes) {
    return GaussianStateT(Matrix::Identity(2 * n_modes, 2 * n_modes));
  }

  Eigen::Index n_modes() const { return cov_.rows() / 2; }
  const Vector& displacement() const { return displacement_; }
  const Matrix& cov() const { return cov_; }

  /// 2x2 covariance block coupling modes i and j (0-based).
  Matrix2<Scalar> mode_block(Eigen::Index i, Eigen::Index j) const {
    if (i < 0 || j < 0 || i >= n_modes() || j >= n_modes()) {
      throw DimensionMismatch("mode index out of range");
    }
    return cov_.template block<2, 2>(2 * i, 2 * j);
  }

 private:
  Vector displacement_;
  Matrix cov_;
};

using GaussianState = GaussianStateT<double>;

/// Symplectic spectrum: n values, ascending, clamped to [1, inf).
template <class Scalar>
struct SymplecticSpectrumT {
  VectorX<Scalar> values;
};

using SymplecticSpectrum = SymplecticSpectrumT<double>;

namespace detail {

// Moduli of the eigenvalues of Omega*V (purely imaginary pairs +/- i nu in
// exact arithmetic), deduplicated from 2n to n by pairing adjacent sorted
// values. No physicality check; this is the generic path used as the oracle
// everywhere.
template <class Scalar>
VectorX<Scalar> symplectic_moduli(const MatrixX<Scalar>& cov) {
  const Eigen::Index n = cov.rows() / 2;
  const MatrixX<Scalar> omega_v = omega_matrix<Scalar>(n) * cov;
  Eigen::EigenSolver<MatrixX<Scalar>> solver(omega_v, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigen-decomposition of Omega*V failed to converge");
  }
  VectorX<Scalar> moduli = solver.eigenvalues().cwiseAbs();
  std::sort(moduli.begin(), moduli.end());
  VectorX<Scalar> values(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Scalar lo = moduli(2 * k);
    const Scalar hi = moduli(2 * k + 1);
    if (hi - lo > Scalar(kPairingTol) * std::max(Scalar(1), hi)) {
      throw NumericalError("eigenvalues of Omega*V do not pair into +/- i nu");
    }
    values(k) = (lo + hi) / Scalar(2);
  }
  return values;
}

template <class Scalar>
VectorX<Scalar> validate_and_clamp(VectorX<Scalar> values) {
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (values(k) < Scalar(1) - Scalar(kPhysicalityTol)) {
      throw NonPhysicalCovariance("symplectic eigenvalue below 1: covariance is unphysical");
    }
    values(k) = std::max(values(k), Scalar(1));
  }
  return values;
}

}  // namespace detail

/// Symplectic eigenvalues via eigen-decomposition of Omega*V (any n).
template <class Scalar>
SymplecticSpectrumT<Scalar> symplectic_eigenvalues(const GaussianStateT<Scalar>& state) {
  return {detail::validate_and_clamp(detail::symplectic_moduli(state.cov()))};
}

/// Two-mode closed form: with Delta = DetA + DetB + 2 DetC the spectrum is
/// sqrt((Delta -/+ sqrt(Delta^2 - 4 DetV)) / 2). Must agree with the generic
/// path to 1e-9; the generic path is the oracle.
template <class Scalar>
SymplecticSpectrumT<Scalar> symplectic_eigenvalues_closed_form(const GaussianStateT<Scalar>& state) {
  if (state.n_modes() != 2) {
    throw DimensionMismatch("closed-form symplectic spectrum requires exactly 2 modes");
  }
  const Scalar det_a = state.mode_block(0, 0).determinant();
  const Scalar det_b = state.mode_block(1, 1).determinant();
  const Scalar det_c = state.mode_block(0, 1).determinant();
  const Scalar det_v = state.cov().determinant();
  const Scalar delta = det_a + det_b + 2 * det_c;
  const Scalar disc = std::max(delta * delta - 4 * det_v, Scalar(0));
  const Scalar root = std::sqrt(disc);
  VectorX<Scalar> values(2);
  values(0) = std::sqrt(std::max((delta - root) / 2, Scalar(0)));
  values(1) = std::sqrt((delta + root) / 2);
  return {detail::validate_and_clamp(std::move(values))};
}

/// g(nu) = ((nu+1)/2) log2((nu+1)/2) - ((nu-1)/2) log2((nu-1)/2);
/// the entropy contribution of one symplectic eigenvalue, in bits.
/// g(1) = 0 (the 0 log 0 limit).
template <class Scalar>
Scalar g_entropy(Scalar nu) {
  if (nu < Scalar(1) - Scalar(kPhysicalityTol)) {
    throw DomainError("g_entropy requires nu >= 1");
  }
  if (nu <= Scalar(1)) {
    return Scalar(0);
  }
  const Scalar up = (nu + 1) / 2;
  const Scalar dn = (nu - 1) / 2;
  return up * std::log2(up) - dn * std::log2(dn);
}

/// Von Neumann entropy in bits: sum of g over the symplectic spectrum.
template <class Scalar>
Scalar von_neumann_entropy(const GaussianStateT<Scalar>& state) {
  const auto spectrum = symplectic_eigenvalues(state);
  Scalar total = 0;
  for (Eigen::Index k = 0; k < spectrum.values.size(); ++k) {
    total += g_entropy(spectrum.values(k));
  }
  return total;
}

/// Closest thermal reference: diagonal covariance, zero displacement, with
/// per-mode variance (V_xx + V_yy + xbar_x^2 + xbar_y^2) / 2.
template <class Scalar>
GaussianStateT<Scalar> thermal_reference(const GaussianStateT<Scalar>& state) {
  const Eigen::Index n = state.n_modes();
  MatrixX<Scalar> cov = MatrixX<Scalar>::Zero(2 * n, 2 * n);
  const auto& v = state.cov();
  const auto& d = state.displacement();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Scalar vth =
        (v(2 * k, 2 * k) + v(2 * k + 1, 2 * k + 1) + d(2 * k) * d(2 * k) +
         d(2 * k + 1) * d(2 * k + 1)) /
        2;
    cov(2 * k, 2 * k) = vth;
    cov(2 * k + 1, 2 * k + 1) = vth;
  }
  return GaussianStateT<Scalar>(cov);
}

/// Relative entropy of coherence in bits: S(thermal reference) - S(state).
/// Zero exactly for thermal product states; tiny negative round-off is
/// clamped to 0.
template <class Scalar>
Scalar relative_entropy_coherence(const GaussianStateT<Scalar>& state) {
  const Scalar c = von_neumann_entropy(thermal_reference(state)) - von_neumann_entropy(state);
  return std::max(c, Scalar(0));
}

/// PPT value of a two-mode state: the smaller symplectic eigenvalue of the
/// partially transposed covariance, sqrt((Gamma - sqrt(Gamma^2 - 4 DetV))/2)
/// with Gamma = DetA + DetB - 2 DetC. Entangled iff < 1; smaller means
/// stronger entanglement.
template <class Scalar>
Scalar ppt_value(const GaussianStateT<Scalar>& state) {
  if (state.n_modes() != 2) {
    throw DimensionMismatch("PPT value requires exactly 2 modes");
  }
  const Scalar det_a = state.mode_block(0, 0).determinant();
  const Scalar det_b = state.mode_block(1, 1).determinant();
  const Scalar det_c = state.mode_block(0, 1).determinant();
  const Scalar det_v = state.cov().determinant();
  const Scalar gamma = det_a + det_b - 2 * det_c;
  Scalar disc = gamma * gamma - 4 * det_v;
  if (disc < Scalar(-1e-6)) {
    throw NumericalError("PPT discriminant negative beyond tolerance");
  }
  disc = std::max(disc, Scalar(0));
  Scalar inner = (gamma - std::sqrt(disc)) / 2;
  if (inner < Scalar(-kPhysicalityTol)) {
    throw NumericalError("PPT value squared negative beyond tolerance");
  }
  return std::sqrt(std::max(inner, Scalar(0)));
}

/// True iff every symplectic eigenvalue is >= 1 - 1e-9 (V + i Omega >= 0).
/// Never throws; malformed spectra report false.
template <class Scalar>
bool is_physical(const GaussianStateT<Scalar>& state) {
  VectorX<Scalar> moduli;
  try {
    moduli = detail::symplectic_moduli(state.cov());
  } catch (const Error&) {
    return false;
  }
  return (moduli.array() >= Scalar(1) - Scalar(kPhysicalityTol)).all();
}

}  // namespace oamcv
