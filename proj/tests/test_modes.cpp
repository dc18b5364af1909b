#include "doctest.h"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <string>

#include "mode_checks.hpp"
#include "oamcv/modes.hpp"

using namespace oamcv;

TEST_SUITE("modes") {

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(lg_field(1, 1.0, 8, 64, 3.0), DomainError);
  CHECK_THROWS_AS(lg_field(1, 1.0, 64, 8, 3.0), DomainError);
  CHECK_THROWS_AS(lg_field(1, 1.0, 64, 64, 0.0), DomainError);
  CHECK_THROWS_AS(lg_field(1, -1.0, 64, 64, 3.0), DomainError);
}

TEST_CASE("fundamental mode peaks at the center") {
  const auto field = lg_field(0, 1.0, 65, 65, 3.0);
  const Eigen::MatrixXd img = intensity(field);
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  img.maxCoeff(&r, &c);
  CHECK(r == 32);
  CHECK(c == 32);
  CHECK(img(32, 32) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("vortex modes vanish at the center and ring at w sqrt(l/2)") {
  for (int l : {1, 2, 3}) {
    const auto field = lg_field(l, 1.0, 512, 512, 3.0);
    const double peak = field.values.cwiseAbs().maxCoeff();
    CHECK(std::abs(field.values(256, 256)) < 1e-12 * peak);

    // scan the +x axis for the ring radius
    double best = -1;
    double best_x = 0;
    for (int i = 256; i < 512; ++i) {
      const double a = std::abs(field.values(256, i));
      if (a > best) {
        best = a;
        best_x = field.x(i);
      }
    }
    const double pixel = 2.0 * 3.0 / 512;
    CHECK(std::abs(best_x - std::sqrt(l / 2.0)) <= pixel);
  }
}

TEST_CASE("opposite charges have identical intensity") {
  const auto plus = lg_field(2, 1.0, 128, 128, 3.0);
  const auto minus = lg_field(-2, 1.0, 128, 128, 3.0);
  CHECK((intensity(plus).array() == intensity(minus).array()).all());
}

TEST_CASE("phase winding equals 2 pi l") {
  for (int l = -5; l <= 5; ++l) {
    const auto field = lg_field(l, 1.0, 129, 129, 3.0);
    const double winding = testutil::phase_winding(field, 32);
    CHECK(std::abs(winding - 2.0 * std::numbers::pi * l) < 1e-6);
  }
}

TEST_CASE("interference forks carry |l| extra fringes above center") {
  for (int l : {0, 1, 2}) {
    const auto field = lg_field(l, 1.0, 512, 512, 3.0);
    const Eigen::MatrixXd img = interference(field, 8.0, 1.0);
    CHECK(testutil::fork_fringe_difference(field, img, 8.0) == l);
  }
  // negative charge forks the other way
  const auto field = lg_field(-1, 1.0, 512, 512, 3.0);
  const Eigen::MatrixXd img = interference(field, 8.0, 1.0);
  CHECK(testutil::fork_fringe_difference(field, img, 8.0) == -1);
}

TEST_CASE("mirror symmetry: -l is the vertical mirror of +l") {
  const int size = 129;  // odd, so every row has an exact mirror partner
  for (int l : {1, 2}) {
    const auto plus = lg_field(l, 1.0, size, size, 3.0);
    const auto minus = lg_field(-l, 1.0, size, size, 3.0);
    const Eigen::MatrixXd ip = interference(plus, 8.0, 1.0);
    const Eigen::MatrixXd im = interference(minus, 8.0, 1.0);
    for (int j = 0; j < size; ++j) {
      for (int i = 0; i < size; ++i) {
        CHECK(std::abs(im(j, i) - ip(size - 1 - j, i)) < 1e-12);
      }
    }
  }
}

TEST_CASE("total intensity is invariant under a phase-only tilt") {
  const auto field = lg_field(2, 1.0, 128, 128, 3.0);
  FieldGrid tilted = field;
  for (int j = 0; j < tilted.height; ++j) {
    for (int i = 0; i < tilted.width; ++i) {
      tilted.values(j, i) *= std::polar(1.0, 5.0 * tilted.x(i));
    }
  }
  const double before = intensity(field).sum();
  const double after = intensity(tilted).sum();
  CHECK(std::abs(after - before) < 1e-12 * before);
}

TEST_CASE("PGM output is byte-exact") {
  Eigen::MatrixXd img(2, 2);
  img << 0, 1, 1, 0;
  std::stringstream out;
  write_pgm(img, out);
  CHECK(out.str() == "P2\n2 2\n255\n0 255\n255 0\n");

  Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(2, 3);
  std::stringstream zout;
  write_pgm(zeros, zout);
  CHECK(zout.str() == "P2\n3 2\n255\n0 0 0\n0 0 0\n");

  Eigen::MatrixXd bad(1, 2);
  bad << -1, 1;
  std::stringstream sink;
  CHECK_THROWS_AS(write_pgm(bad, sink), DomainError);
}

TEST_CASE("PGM lines stay within 70 characters and scale to 255") {
  const auto field = lg_field(1, 1.0, 64, 64, 3.0);
  std::stringstream out;
  write_pgm(intensity(field), out);
  std::string line;
  bool saw_255 = false;
  int line_no = 0;
  while (std::getline(out, line)) {
    CHECK(line.size() <= 70);
    if (line_no > 2 && line.find("255") != std::string::npos) saw_255 = true;
    ++line_no;
  }
  CHECK(saw_255);
}

TEST_CASE("rendered vortex intensity is zero at the central pixel") {
  const auto field = lg_field(1, 1.0, 64, 64, 3.0);
  const Eigen::MatrixXd img = intensity(field);
  CHECK(img(32, 32) == 0.0);
}

}  // TEST_SUITE
