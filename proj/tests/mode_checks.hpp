#pragma once

// Shared checkers for the beam renderer: fringe counting along horizontal
// cuts (the fork order shows up as the count difference just above vs just
// below the beam center) and the accumulated phase winding around a centered
// pixel loop.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "oamcv/modes.hpp"

namespace testutil {

/// Strict local maxima along one row, columns (col_lo, col_hi) exclusive.
inline int count_strict_maxima(const Eigen::MatrixXd& img, int row, int col_lo, int col_hi) {
  int count = 0;
  for (int i = col_lo + 1; i < col_hi; ++i) {
    if (img(row, i) > img(row, i - 1) && img(row, i) > img(row, i + 1)) ++count;
  }
  return count;
}

/// Fringe maxima above center minus below center, counted over a window whose
/// edges sit a quarter period away from a fringe crest (so the count is
/// insensitive to edge effects). Equals the signed topological charge for
/// modest |l|.
inline int fork_fringe_difference(const oamcv::FieldGrid& field, const Eigen::MatrixXd& img,
                                  double tilt) {
  const double sx = 2.0 * field.extent / field.width;
  const double sy = 2.0 * field.extent / field.height;
  const int cx = field.width / 2;
  const int cy = field.height / 2;
  // tilt * W / extent = 4.25 fringe cycles from center to window edge
  const int half_cols = int(std::lround(4.25 * field.extent / tilt / sx));
  const int row_off = std::max(1, int(std::lround(0.25 / sy)));
  const int above = count_strict_maxima(img, cy + row_off, cx - half_cols, cx + half_cols);
  const int below = count_strict_maxima(img, cy - row_off, cx - half_cols, cx + half_cols);
  return above - below;
}

/// Sum of wrapped phase differences around a centered square pixel loop of
/// Chebyshev radius k, counterclockwise; 2 pi l for a clean vortex.
inline double phase_winding(const oamcv::FieldGrid& field, int k) {
  const int cx = field.width / 2;
  const int cy = field.height / 2;
  std::vector<std::complex<double>> loop;
  for (int i = -k; i < k; ++i) loop.push_back(field.values(cy - k, cx + i));
  for (int j = -k; j < k; ++j) loop.push_back(field.values(cy + j, cx + k));
  for (int i = k; i > -k; --i) loop.push_back(field.values(cy + k, cx + i));
  for (int j = k; j > -k; --j) loop.push_back(field.values(cy + j, cx - k));
  double total = 0;
  for (std::size_t m = 0; m < loop.size(); ++m) {
    total += std::arg(loop[(m + 1) % loop.size()] * std::conj(loop[m]));
  }
  return total;
}

}  // namespace testutil
