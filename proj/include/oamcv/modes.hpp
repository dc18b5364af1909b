#pragma once

// Laguerre-Gaussian (p = 0) beam rendering and plane-wave interference,
// enough to show the donut profiles and the fork dislocations that reveal the
// topological charge. Qualitative by design: the ideal LG mode stands in for
// the vortex-phase-plate output, and no propagation physics is modeled.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <ostream>
#include <string>

#include "oamcv/errors.hpp"

namespace oamcv {

/// Complex field sampled on a centered grid. Pixel (col i, row j) sits at
/// x = (i - width/2) * (2 extent / width), y = (j - height/2) * ..., so the
/// origin falls exactly on a pixel; for even sizes the window is asymmetric
/// by one pixel. extent is the half-width in beam-waist units.
struct FieldGrid {
  int width = 0;
  int height = 0;
  double extent = 0;
  Eigen::MatrixXcd values;  // (row, col) = (y index, x index)

  double x(int i) const { return (i - width / 2) * (2.0 * extent / width); }
  double y(int j) const { return (j - height / 2) * (2.0 * extent / height); }
};

/// Ideal LG mode with radial index 0: amplitude ~ (r sqrt(2)/w)^|l|
/// exp(-r^2/w^2) exp(i l phi), normalized so the analytic peak amplitude
/// is 1. l = 0 peaks at the center; l != 0 has an exact zero there and a
/// ring maximum at r = w sqrt(|l|/2).
inline FieldGrid lg_field(int l, double waist, int width, int height, double extent) {
  if (width < 16 || height < 16) {
    throw DomainError("grid must be at least 16 x 16 pixels");
  }
  if (!(extent > 0)) {
    throw DomainError("grid extent must be positive");
  }
  if (!(waist > 0)) {
    throw DomainError("beam waist must be positive");
  }
  const int abs_l = std::abs(l);
  const double peak = abs_l == 0 ? 1.0 : std::pow(double(abs_l), abs_l / 2.0) * std::exp(-abs_l / 2.0);
  FieldGrid grid{width, height, extent, Eigen::MatrixXcd(height, width)};
  for (int j = 0; j < height; ++j) {
    const double y = grid.y(j);
    for (int i = 0; i < width; ++i) {
      const double x = grid.x(i);
      const double r = std::hypot(x, y);
      const double amp =
          std::pow(r * std::numbers::sqrt2 / waist, abs_l) * std::exp(-r * r / (waist * waist));
      const double phi = std::atan2(y, x);
      grid.values(j, i) = std::polar(amp / peak, l * phi);
    }
  }
  return grid;
}

/// |field|^2 per pixel.
inline Eigen::MatrixXd intensity(const FieldGrid& field) {
  return field.values.cwiseAbs2();
}

/// Interference with a tilted plane wave exp(i 2 pi tilt x / extent):
/// |field + plane_amp exp(...)|^2. tilt is in fringe cycles per extent unit,
/// so 2*tilt fringes span the full width. For l != 0 the pattern carries a
/// fork of order |l| at the beam center.
inline Eigen::MatrixXd interference(const FieldGrid& field, double tilt, double plane_amp) {
  if (!(plane_amp > 0)) {
    throw DomainError("plane-wave amplitude must be positive");
  }
  Eigen::MatrixXd out(field.height, field.width);
  for (int i = 0; i < field.width; ++i) {
    const std::complex<double> plane =
        std::polar(plane_amp, 2.0 * std::numbers::pi * tilt * field.x(i) / field.extent);
    for (int j = 0; j < field.height; ++j) {
      out(j, i) = std::norm(field.values(j, i) + plane);
    }
  }
  return out;
}

/// Plain PGM (magic P2), maxval 255, linear scaling from [0, max]; an
/// all-zero grid maps to all-zero pixels. Rows are written in storage order
/// (row 0 first) and lines are kept within 70 characters. Byte-exact for
/// identical input.
inline void write_pgm(const Eigen::MatrixXd& img, std::ostream& out) {
  if (!img.allFinite() || img.minCoeff() < 0) {
    throw DomainError("PGM input must be finite and non-negative");
  }
  double max = img.maxCoeff();
  if (max <= 0) max = 1;
  out << "P2\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  std::string line;
  char buf[16];
  for (Eigen::Index j = 0; j < img.rows(); ++j) {
    for (Eigen::Index i = 0; i < img.cols(); ++i) {
      std::snprintf(buf, sizeof(buf), "%ld", std::lround(255.0 * img(j, i) / max));
      if (!line.empty() && line.size() + 1 + std::strlen(buf) > 70) {
        out << line << '\n';
        line.clear();
      }
      if (!line.empty()) line += ' ';
      line += buf;
    }
    out << line << '\n';
    line.clear();
  }
}

inline void write_pgm(const Eigen::MatrixXd& img, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  write_pgm(img, out);
  if (!out.good()) {
    throw IoError("write failed: " + path);
  }
}

}  // namespace oamcv
