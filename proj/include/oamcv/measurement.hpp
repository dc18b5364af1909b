#pragma once

// Synthetic homodyne records and covariance re-estimation, mirroring how the
// covariance matrix and its error bars are reconstructed from measured data.
// Only one quadrature per mode is sampled jointly (commuting observables);
// intra-mode X-Y covariances are fixed to zero by construction, since the
// channel model has none and measuring them would need rotated local
// oscillators.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oamcv/errors.hpp"
#include "oamcv/gaussian.hpp"
#include "oamcv/philox.hpp"

namespace oamcv {

/// Which (Conj, Pr) quadrature pair the two homodyne detectors measure
/// jointly. First letter = Conj quadrature, second = Pr quadrature.
enum class QuadraturePair : std::uint32_t { XX = 0, YY = 1, XY = 2, YX = 3 };

inline constexpr std::array<QuadraturePair, 4> kAllQuadraturePairs{
    QuadraturePair::XX, QuadraturePair::YY, QuadraturePair::XY, QuadraturePair::YX};

constexpr const char* to_string(QuadraturePair pair) {
  switch (pair) {
    case QuadraturePair::XX: return "xx";
    case QuadraturePair::YY: return "yy";
    case QuadraturePair::XY: return "xy";
    case QuadraturePair::YX: return "yx";
  }
  return "??";
}

inline std::optional<QuadraturePair> quadrature_pair_from_string(std::string_view name) {
  for (const auto pair : kAllQuadraturePairs) {
    if (name == to_string(pair)) return pair;
  }
  return std::nullopt;
}

/// Row indices of the jointly measured quadratures in a two-mode covariance
/// (X_C = 0, Y_C = 1, X_P = 2, Y_P = 3).
constexpr std::pair<int, int> quadrature_indices(QuadraturePair pair) {
  switch (pair) {
    case QuadraturePair::XX: return {0, 2};
    case QuadraturePair::YY: return {1, 3};
    case QuadraturePair::XY: return {0, 3};
    case QuadraturePair::YX: return {1, 2};
  }
  return {0, 2};
}

/// Joint records for one quadrature pair. Column 0 = Conj, column 1 = Pr, in
/// shot-noise units. Regenerating with the same seed reproduces the samples
/// bit-for-bit.
struct QuadratureSampleSet {
  QuadraturePair pair = QuadraturePair::XX;
  Eigen::Matrix<double, Eigen::Dynamic, 2> samples;
  std::uint64_t seed = 0;

  Eigen::Index n() const { return samples.rows(); }
};

/// Draw n joint homodyne samples from the bivariate normal whose covariance
/// is the pair-selected 2x2 submatrix of the state. The stream is derived
/// from (seed, pair id), so the four pairs are independent and any subset can
/// be regenerated in isolation.
inline QuadratureSampleSet sample_pair(const GaussianState& state, QuadraturePair pair,
                                       Eigen::Index n, std::uint64_t seed) {
  if (state.n_modes() != 2) {
    throw DimensionMismatch("sampling requires a two-mode state");
  }
  if (state.displacement().cwiseAbs().maxCoeff() != 0.0) {
    throw DomainError("sampling requires zero displacement");
  }
  if (n < 2) {
    throw TooFewSamples("need at least 2 samples");
  }
  if (!is_physical(state)) {
    throw NonPhysicalCovariance("sampling requires a physical state");
  }

  const auto [i, j] = quadrature_indices(pair);
  const double v1 = state.cov()(i, i);
  const double v2 = state.cov()(j, j);
  const double c = state.cov()(i, j);
  const double mean = (v1 + v2) / 2;
  const double lambda_min = mean - std::sqrt((v1 - v2) * (v1 - v2) / 4 + c * c);
  if (lambda_min < -1e-9) {
    throw DegenerateSubmatrix("quadrature submatrix is not positive semidefinite");
  }

  // Cholesky factor with clamping of round-off negatives.
  const double l00 = std::sqrt(std::max(v1, 0.0));
  const double l10 = l00 > 0 ? c / l00 : 0.0;
  const double l11 = std::sqrt(std::max(v2 - l10 * l10, 0.0));

  QuadratureSampleSet set;
  set.pair = pair;
  set.seed = seed;
  set.samples.resize(n, 2);
  const NormalPairStream stream(seed, static_cast<std::uint32_t>(pair));
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto [z1, z2] = stream(static_cast<std::uint64_t>(k));
    set.samples(k, 0) = l00 * z1;
    set.samples(k, 1) = l10 * z1 + l11 * z2;
  }
  return set;
}

/// Mean of a series together with one standard deviation of its block means:
/// the series is split into `blocks` contiguous chunks (remainder dropped)
/// and the spread is taken across the chunk means.
struct BlockStats {
  double mean = 0;
  double block_std = 0;
};

inline BlockStats block_statistics(std::span<const double> samples, int blocks) {
  if (blocks < 2) {
    throw TooFewSamples("block statistics need at least 2 blocks");
  }
  const std::size_t m = samples.size() / static_cast<std::size_t>(blocks);
  if (m < 1) {
    throw TooFewSamples("fewer samples than blocks");
  }
  std::vector<double> block_means(static_cast<std::size_t>(blocks));
  for (int b = 0; b < blocks; ++b) {
    double sum = 0;
    for (std::size_t k = b * m; k < (b + 1) * m; ++k) sum += samples[k];
    block_means[static_cast<std::size_t>(b)] = sum / double(m);
  }
  double mean = 0;
  for (const double bm : block_means) mean += bm;
  mean /= blocks;
  double ss = 0;
  for (const double bm : block_means) ss += (bm - mean) * (bm - mean);
  return {mean, std::sqrt(ss / (blocks - 1))};
}

/// Reconstructed state plus per-entry standard errors. `inflation` is the
/// isotropic noise added to restore physicality when the raw estimate dips
/// just below the boundary (0 when no projection was needed).
struct CovarianceEstimate {
  GaussianState state;
  Eigen::Matrix4d cov_std_error;
  bool projected = false;
  double inflation = 0;
};

/// Raw statistical violations no worse than this are repaired by projection;
/// anything deeper is surfaced as UnphysicalEstimate.
inline constexpr double kProjectionWindow = 0.02;

namespace detail {

inline double min_symplectic_modulus(const Eigen::Matrix4d& cov) {
  return symplectic_moduli<double>(cov).minCoeff();
}

// Smallest t >= 0 such that cov + t I is physical. The minimal symplectic
// eigenvalue is monotone in t (and superadditive, so t = 1 - nu_min is an
// upper bound); bisect and return the physical end of the bracket.
inline double minimal_isotropic_inflation(const Eigen::Matrix4d& cov, double nu_min) {
  double lo = 0.0;
  double hi = (1.0 - nu_min) + 1e-9;
  for (int iter = 0; iter < 60 && hi - lo > 1e-13; ++iter) {
    const double mid = (lo + hi) / 2;
    const Eigen::Matrix4d trial = cov + mid * Eigen::Matrix4d::Identity();
    if (min_symplectic_modulus(trial) >= 1.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace detail

namespace detail {

struct RawEstimate {
  Eigen::Vector4d disp;
  Eigen::Matrix4d cov;
  Eigen::Matrix4d se;
};

inline RawEstimate raw_estimate(const std::vector<QuadratureSampleSet>& sets, int blocks) {
  std::array<const QuadratureSampleSet*, 4> by_pair{};
  for (const auto& set : sets) {
    auto*& slot = by_pair[static_cast<std::size_t>(set.pair)];
    if (slot != nullptr) {
      throw MissingPair(std::string("duplicate sample set for pair ") + to_string(set.pair));
    }
    slot = &set;
  }
  for (const auto pair : kAllQuadraturePairs) {
    const auto* set = by_pair[static_cast<std::size_t>(pair)];
    if (set == nullptr) {
      throw MissingPair(std::string("missing sample set for pair ") + to_string(pair));
    }
    if (set->n() < 100) {
      throw TooFewSamples("covariance estimation needs at least 100 samples per pair");
    }
  }

  // Each quadrature appears in two pair sets: (set, column) for rows 0..3.
  const std::array<std::array<std::pair<QuadraturePair, int>, 2>, 4> appearances{{
      {{{QuadraturePair::XX, 0}, {QuadraturePair::XY, 0}}},  // X_C
      {{{QuadraturePair::YY, 0}, {QuadraturePair::YX, 0}}},  // Y_C
      {{{QuadraturePair::XX, 1}, {QuadraturePair::YX, 1}}},  // X_P
      {{{QuadraturePair::YY, 1}, {QuadraturePair::XY, 1}}},  // Y_P
  }};

  const auto column = [&](QuadraturePair pair, int col) {
    return by_pair[static_cast<std::size_t>(pair)]->samples.col(col);
  };

  Eigen::Vector4d disp = Eigen::Vector4d::Zero();
  Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d se = Eigen::Matrix4d::Zero();

  std::vector<double> products;
  const auto block_se = [&](const auto& x, const auto& y) {
    const Eigen::Index n = x.size();
    products.resize(static_cast<std::size_t>(n));
    const double mx = x.mean();
    const double my = y.mean();
    for (Eigen::Index k = 0; k < n; ++k) {
      products[static_cast<std::size_t>(k)] = (x(k) - mx) * (y(k) - my);
    }
    const BlockStats stats = block_statistics(products, blocks);
    return stats.block_std / std::sqrt(double(blocks));
  };

  for (int q = 0; q < 4; ++q) {
    double mean_sum = 0;
    double var_sum = 0;
    double se_sq = 0;
    for (const auto& [pair, col] : appearances[static_cast<std::size_t>(q)]) {
      const auto x = column(pair, col);
      const Eigen::Index n = x.size();
      const double mean = x.mean();
      mean_sum += mean;
      var_sum += (x.array() - mean).square().sum() / double(n - 1);
      const double s = block_se(x, x);
      se_sq += s * s;
    }
    disp(q) = mean_sum / 2;
    cov(q, q) = var_sum / 2;
    se(q, q) = std::sqrt(se_sq) / 2;
  }

  for (const auto pair : kAllQuadraturePairs) {
    const auto [i, j] = quadrature_indices(pair);
    const auto x = column(pair, 0);
    const auto y = column(pair, 1);
    const Eigen::Index n = x.size();
    const double cxy =
        ((x.array() - x.mean()) * (y.array() - y.mean())).sum() / double(n - 1);
    cov(i, j) = cov(j, i) = cxy;
    se(i, j) = se(j, i) = block_se(x, y);
  }

  return {disp, cov, se};
}

}  // namespace detail

/// Rebuild the two-mode covariance from the four pair sample sets. Diagonal
/// entries average the two estimates available per quadrature, cross-mode
/// entries come from the pair covariances, intra-mode X-Y entries are zero by
/// construction. Standard errors come from block statistics on the centered
/// product series. Small statistical physicality violations (symplectic
/// eigenvalue in [1 - 0.02, 1)) are repaired by the minimal isotropic
/// inflation; deeper ones indicate a bug upstream and error out.
inline CovarianceEstimate estimate_covariance(const std::vector<QuadratureSampleSet>& sets,
                                              int blocks = 10) {
  const auto [disp, cov, se] = detail::raw_estimate(sets, blocks);
  CovarianceEstimate est{GaussianState(disp, cov), se, false, 0.0};
  const double nu_min = detail::min_symplectic_modulus(cov);
  if (nu_min < 1.0) {
    if (nu_min < 1.0 - kProjectionWindow) {
      throw UnphysicalEstimate("estimated covariance is unphysical beyond the projection window");
    }
    const double t = detail::minimal_isotropic_inflation(cov, nu_min);
    est.state = GaussianState(disp, cov + t * Eigen::Matrix4d::Identity());
    est.projected = true;
    est.inflation = t;
  }
  return est;
}

/// CSV export, columns index,q_conj,q_pr. Values are printed with 17
/// significant digits so a read-back reproduces the doubles exactly.
inline void write_samples_csv(const QuadratureSampleSet& set, std::ostream& out) {
  out << "index,q_conj,q_pr\n";
  char buf[128];
  for (Eigen::Index k = 0; k < set.n(); ++k) {
    std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g\n", static_cast<long long>(k),
                  set.samples(k, 0), set.samples(k, 1));
    out << buf;
  }
}

inline void write_samples_csv(const QuadratureSampleSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  write_samples_csv(set, out);
  if (!out.good()) {
    throw IoError("write failed: " + path);
  }
}

inline QuadratureSampleSet read_samples_csv(std::istream& in, QuadraturePair pair) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("index,", 0) != 0) {
    throw IoError("sample CSV must start with an index,q_conj,q_pr header");
  }
  std::vector<std::pair<double, double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw IoError("malformed sample CSV row: " + line);
    }
    rows.emplace_back(std::stod(line.substr(c1 + 1, c2 - c1 - 1)), std::stod(line.substr(c2 + 1)));
  }
  QuadratureSampleSet set;
  set.pair = pair;
  set.seed = 0;  // unknown for externally provided data
  set.samples.resize(static_cast<Eigen::Index>(rows.size()), 2);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    set.samples(static_cast<Eigen::Index>(k), 0) = rows[k].first;
    set.samples(static_cast<Eigen::Index>(k), 1) = rows[k].second;
  }
  return set;
}

inline QuadratureSampleSet read_samples_csv(const std::string& path, QuadraturePair pair) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open for reading: " + path);
  }
  return read_samples_csv(in, pair);
}

}  // namespace oamcv
