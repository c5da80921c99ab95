#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

#include "gpdyn/errors.hpp"
#include "gpdyn/lvc_model.hpp"

using namespace gpdyn;

namespace {

Eigen::Matrix2d diabatic_matrix(const ModelParams& p, Vec2 r) {
  const DiabaticMatrix v = diabatic_potential(p, r);
  Eigen::Matrix2d m;
  m << v.v11, v.v12, v.v12, v.v22;
  return m;
}

// Columns of U(theta) straight from the rotation, as Eigen vectors.
Eigen::Vector2d column(const ModelParams& p, Vec2 r, int c) {
  const auto col = FrameRotation(mixing_angle(p, r)).column(c);
  return {col[0], col[1]};
}

std::vector<Vec2> sample_points(int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  std::vector<Vec2> pts;
  while (static_cast<int>(pts.size()) < n) {
    Vec2 r{u(gen), u(gen)};
    if (norm(r) > 0.05) pts.push_back(r);
  }
  return pts;
}

}  // namespace

TEST_CASE("diabatic potential closed form") {
  ModelParams p;
  const DiabaticMatrix v = diabatic_potential(p, {0.3, -0.7});
  CHECK(v.v11 == doctest::Approx(2.0 * (0.8 * 0.8 + 0.49)).epsilon(1e-15));
  CHECK(v.v22 == doctest::Approx(2.0 * (0.2 * 0.2 + 0.49)).epsilon(1e-15));
  CHECK(v.v12 == doctest::Approx(-2.8).epsilon(1e-15));
}

TEST_CASE("surfaces agree with a dense eigensolver") {
  for (const ModelParams& p : {ModelParams{}, ModelParams{2.0, 3.0, 4.0, 1.0, 1.0}, ModelParams{1.3, 0.4, 0.9, 2.0, 1.0}}) {
    for (Vec2 r : sample_points(200, 7)) {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(diabatic_matrix(p, r));
      const SurfacePair s = adiabatic_surfaces(p, r);
      const double scale = std::max(1.0, std::abs(es.eigenvalues()(1)));
      CHECK(std::abs(s.lower - es.eigenvalues()(0)) < 1e-12 * scale);
      CHECK(std::abs(s.upper - es.eigenvalues()(1)) < 1e-12 * scale);
      CHECK(s.lower <= s.upper);
    }
  }
}

TEST_CASE("column 0 carries the upper surface, column 1 the lower") {
  ModelParams p;
  for (Vec2 r : sample_points(200, 11)) {
    const Eigen::Matrix2d v = diabatic_matrix(p, r);
    const AdiabaticData ad = adiabatic_data(p, r);
    const Eigen::Vector2d up = column(p, r, kUpperColumn);
    const Eigen::Vector2d lo = column(p, r, kLowerColumn);
    CHECK((v * up - ad.w_plus * up).norm() < 1e-12 * std::max(1.0, ad.w_plus));
    CHECK((v * lo - ad.w_minus * lo).norm() < 1e-12 * std::max(1.0, ad.w_plus));
    CHECK(ad.surface(kUpperColumn) == ad.w_plus);
    CHECK(ad.surface(kLowerColumn) == ad.w_minus);
  }
}

TEST_CASE("mixing angle diagonalises the potential") {
  ModelParams p;
  for (Vec2 r : sample_points(100, 3)) {
    const FrameRotation u(mixing_angle(p, r));
    const auto m = u.matrix();
    Eigen::Matrix2d U;
    U << m[0][0], m[0][1], m[1][0], m[1][1];
    const Eigen::Matrix2d d = U.transpose() * diabatic_matrix(p, r) * U;
    CHECK(std::abs(d(0, 1)) < 1e-12 * std::max(1.0, d.norm()));
  }
}

TEST_CASE("mixing angle winds once around the intersection") {
  ModelParams p;
  double acc = 0.0;
  double prev = mixing_angle(p, {1.0, 0.0});
  for (int k = 1; k <= 720; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / 720;
    const double th = mixing_angle(p, {std::cos(phi), std::sin(phi)});
    double step = th - prev;
    step -= 2.0 * std::numbers::pi * std::round(step / (2.0 * std::numbers::pi));
    acc += step;
    prev = th;
  }
  CHECK(acc == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-12));
}

TEST_CASE("couplings match finite differences of the eigenvectors") {
  ModelParams p;
  const double h = 1e-5;
  for (Vec2 r : sample_points(60, 5)) {
    if (std::abs(r.y) < 0.05 && r.x < 0.0) continue;  // keep the stencil off the branch cut
    const AdiabaticData ad = adiabatic_data(p, r);
    const Eigen::Vector2d psi1 = column(p, r, 0);
    const Eigen::Vector2d dx2 = (column(p, {r.x + h, r.y}, 1) - column(p, {r.x - h, r.y}, 1)) / (2 * h);
    const Eigen::Vector2d dy2 = (column(p, {r.x, r.y + h}, 1) - column(p, {r.x, r.y - h}, 1)) / (2 * h);
    CHECK(ad.d1.x == doctest::Approx(psi1.dot(dx2)).epsilon(1e-6));
    CHECK(ad.d1.y == doctest::Approx(psi1.dot(dy2)).epsilon(1e-6));

    const double hh = 1e-4;
    const Eigen::Vector2d c = column(p, r, 1);
    const Eigen::Vector2d lap = (column(p, {r.x + hh, r.y}, 1) + column(p, {r.x - hh, r.y}, 1) +
                                 column(p, {r.x, r.y + hh}, 1) + column(p, {r.x, r.y - hh}, 1) - 4.0 * c) /
                                (hh * hh);
    CHECK(std::abs(ad.d2 - psi1.dot(lap)) < 1e-4 * std::max(1.0, std::abs(ad.d2)));

    // K = hbar^2/2M <grad psi_i | grad psi_j>, diagonal for a real 2x2 rotation.
    const Eigen::Vector2d dx1 = (column(p, {r.x + h, r.y}, 0) - column(p, {r.x - h, r.y}, 0)) / (2 * h);
    const Eigen::Vector2d dy1 = (column(p, {r.x, r.y + h}, 0) - column(p, {r.x, r.y - h}, 0)) / (2 * h);
    const double k11 = 0.5 * (dx1.squaredNorm() + dy1.squaredNorm());
    const double k12 = 0.5 * (dx1.dot(dx2) + dy1.dot(dy2));
    CHECK(ad.k11 == doctest::Approx(k11).epsilon(1e-6));
    CHECK(ad.k22 == doctest::Approx(ad.k11));
    CHECK(std::abs(ad.k12) < 1e-12);
    CHECK(std::abs(k12) < 1e-6);
  }
}

TEST_CASE("coupling magnitude grows like 1/(2r) on the isotropic cone") {
  // 2c = w^2 a makes theta the polar angle.
  ModelParams p{2.0, 1.0, 2.0, 1.0, 1.0};
  for (double r : {1e-3, 1e-2, 0.1, 1.0}) {
    const AdiabaticData ad = adiabatic_data(p, {r * std::cos(0.4), r * std::sin(0.4)});
    CHECK(norm(ad.d1) == doctest::Approx(0.5 / r).epsilon(1e-12));
    CHECK(std::abs(ad.d2) < 1e-9 / (r * r));
  }
}

TEST_CASE("fast path agrees with the full evaluation") {
  ModelParams p{2.0, 3.0, 4.0, 1.0, 1.0};
  for (Vec2 r : sample_points(100, 9)) {
    const AdiabaticData ad = adiabatic_data(p, r);
    const LocalSurfaces ls = local_surfaces(p, r);
    const auto grads = adiabatic_gradients(p, r);
    CHECK(ls.w[kUpperColumn] == doctest::Approx(ad.w_plus).epsilon(1e-14));
    CHECK(ls.w[kLowerColumn] == doctest::Approx(ad.w_minus).epsilon(1e-14));
    CHECK(ls.d1.x == doctest::Approx(ad.d1.x).epsilon(1e-12));
    CHECK(ls.d1.y == doctest::Approx(ad.d1.y).epsilon(1e-12));
    for (int c = 0; c < 2; ++c) {
      CHECK(ls.grad[c].x == doctest::Approx(grads[c].x).epsilon(1e-14));
      // Finite-difference check of the surface gradient.
      const double h = 1e-6;
      const double fx = (local_surfaces(p, {r.x + h, r.y}).w[c] - local_surfaces(p, {r.x - h, r.y}).w[c]) / (2 * h);
      const double fy = (local_surfaces(p, {r.x, r.y + h}).w[c] - local_surfaces(p, {r.x, r.y - h}).w[c]) / (2 * h);
      CHECK(grads[c].x == doctest::Approx(fx).epsilon(1e-6));
      CHECK(grads[c].y == doctest::Approx(fy).epsilon(1e-6));
    }
    CHECK_FALSE(ls.singular);
  }
}

TEST_CASE("intersection point is singular") {
  ModelParams p;
  CHECK_THROWS_AS(mixing_angle(p, {0.0, 0.0}), SingularPointError);
  CHECK_THROWS_AS(adiabatic_data(p, {0.0, 0.0}), SingularPointError);
  CHECK(local_surfaces(p, {0.0, 0.0}).singular);
  const SurfacePair s = adiabatic_surfaces(p, {0.0, 0.0});
  CHECK(s.lower == s.upper);
}

TEST_CASE("degenerate parameters have vanishing couplings") {
  for (const ModelParams& p : {ModelParams{2.0, 0.0, 0.0, 1.0, 1.0}, ModelParams{2.0, 1.0, 0.0, 1.0, 1.0},
                               ModelParams{2.0, 0.0, 1.5, 1.0, 1.0}}) {
    CHECK(p.degenerate());
    for (Vec2 r : {Vec2{0.0, 0.0}, Vec2{0.4, -1.2}, Vec2{-2.0, 0.5}}) {
      const AdiabaticData ad = adiabatic_data(p, r);
      CHECK(ad.d1 == Vec2{});
      CHECK(ad.d2 == 0.0);
      CHECK(ad.k11 == 0.0);
    }
  }
}

TEST_CASE("frame rotation basics") {
  const State2 v{Complex(0.6, 0.1), Complex(-0.3, 0.7)};
  const State2 id = FrameRotation(0.0).apply_to_state(v);
  CHECK(id[0] == v[0]);
  CHECK(id[1] == v[1]);

  const State2 flipped = FrameRotation(2.0 * std::numbers::pi).apply_to_state(v);
  CHECK(std::abs(flipped[0] + v[0]) < 1e-15);
  CHECK(std::abs(flipped[1] + v[1]) < 1e-15);

  const FrameRotation u(0.83);
  const State2 back = u.inverse_to_state(u.apply_to_state(v));
  CHECK(std::abs(back[0] - v[0]) < 1e-15);
  CHECK(std::abs(back[1] - v[1]) < 1e-15);

  const State2 a = u.apply_to_state(v);
  CHECK(std::norm(a[0]) + std::norm(a[1]) == doctest::Approx(std::norm(v[0]) + std::norm(v[1])).epsilon(1e-15));

  Density2 rho{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) rho[i][j] = v[i] * std::conj(v[j]);
  const Density2 ra = u.apply_to_density(rho);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(std::abs(ra[i][j] - a[i] * std::conj(a[j])) < 1e-15);
  CHECK(std::abs(ra[0][0] + ra[1][1] - rho[0][0] - rho[1][1]) < 1e-15);
}

TEST_CASE("model validation names the field") {
  ModelParams p;
  p.omega = -2.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("model.omega"), ConfigError);
  p = {};
  p.mass = 0.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("model.mass"), ConfigError);
  p = {};
  p.c = std::nan("");
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("model.c"), ConfigError);
}
