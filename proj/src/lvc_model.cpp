#include "gpdyn/lvc_model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gpdyn/errors.hpp"

namespace gpdyn {

namespace {

void require_positive(double value, const char* field) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(std::string("model.") + field + " must be a finite positive number (got " +
                      std::to_string(value) + ")");
  }
}

void require_finite(double value, const char* field) {
  if (!std::isfinite(value)) {
    throw ConfigError(std::string("model.") + field + " must be finite");
  }
}

bool at_intersection(Vec2 r) { return r.x == 0.0 && r.y == 0.0; }

}  // namespace

void ModelParams::validate() const {
  require_positive(omega, "omega");
  require_positive(mass, "mass");
  require_positive(hbar, "hbar");
  require_finite(a, "a");
  require_finite(c, "c");
}

DiabaticMatrix diabatic_potential(const ModelParams& p, Vec2 r) {
  const double half_w2 = 0.5 * p.omega * p.omega;
  const double xl = r.x + 0.5 * p.a;
  const double xr = r.x - 0.5 * p.a;
  const double y2 = r.y * r.y;
  return {half_w2 * (xl * xl + y2), p.c * r.y, half_w2 * (xr * xr + y2)};
}

SurfacePair adiabatic_surfaces(const ModelParams& p, Vec2 r) {
  const DiabaticMatrix v = diabatic_potential(p, r);
  const double mean = 0.5 * (v.v11 + v.v22);
  const double half_gap = 0.5 * std::hypot(v.v11 - v.v22, 2.0 * v.v12);
  return {mean - half_gap, mean + half_gap};
}

std::array<Vec2, 2> adiabatic_gradients(const ModelParams& p, Vec2 r) {
  const double w2 = p.omega * p.omega;
  const Vec2 grad_mean{w2 * r.x, w2 * r.y};
  const double ax = p.angle_coeff_x();
  const double by = p.angle_coeff_y();
  const double rho = std::hypot(ax * r.x, by * r.y);
  Vec2 grad_half_gap;
  if (rho > 0.0) {
    grad_half_gap = Vec2{ax * ax * r.x, by * by * r.y} * (0.5 / rho);
  }
  return {grad_mean + grad_half_gap, grad_mean - grad_half_gap};
}

double mixing_angle(const ModelParams& p, Vec2 r) {
  if (!p.degenerate() && at_intersection(r)) {
    throw SingularPointError("undefined angle at conical intersection");
  }
  const double u = p.angle_coeff_y() * r.y;
  const double v = p.angle_coeff_x() * r.x;
  if (u == 0.0 && v == 0.0) {
    return 0.0;  // on a degenerate seam
  }
  const double theta = std::atan2(u, v);
  // atan2 returns -pi for (-0, negative); fold onto the closed end of (-pi, pi].
  return theta == -std::numbers::pi ? std::numbers::pi : theta;
}

AdiabaticData adiabatic_data(const ModelParams& p, Vec2 r) {
  if (!p.degenerate() && at_intersection(r)) {
    throw SingularPointError("coupling singular at conical intersection");
  }
  AdiabaticData out;
  const SurfacePair w = adiabatic_surfaces(p, r);
  out.w_minus = w.lower;
  out.w_plus = w.upper;
  out.theta = mixing_angle(p, r);
  if (p.degenerate()) {
    return out;  // theta is piecewise constant: couplings vanish
  }

  const double ax = p.angle_coeff_x();
  const double by = p.angle_coeff_y();
  const double rho2 = ax * ax * r.x * r.x + by * by * r.y * r.y;
  const double ab = ax * by;
  out.grad_theta = Vec2{-r.y, r.x} * (ab / rho2);
  const double lap_theta = 2.0 * ab * r.x * r.y * (ax * ax - by * by) / (rho2 * rho2);

  out.d1 = -0.5 * out.grad_theta;
  out.d2 = -0.5 * lap_theta;
  const double k = p.hbar * p.hbar / (8.0 * p.mass) * dot(out.grad_theta, out.grad_theta);
  out.k11 = k;
  out.k22 = k;
  out.k12 = 0.0;
  return out;
}

LocalSurfaces local_surfaces(const ModelParams& p, Vec2 r) {
  LocalSurfaces out;
  const double w2 = p.omega * p.omega;
  const double mean = 0.5 * w2 * (r.x * r.x + r.y * r.y + 0.25 * p.a * p.a);
  const Vec2 grad_mean{w2 * r.x, w2 * r.y};
  const double ax = p.angle_coeff_x();
  const double by = p.angle_coeff_y();
  const double u = ax * r.x;
  const double v = by * r.y;
  const double rho2 = u * u + v * v;
  const double rho = std::sqrt(rho2);
  out.w = {mean + 0.5 * rho, mean - 0.5 * rho};
  Vec2 grad_half_gap;
  if (rho > 0.0) {
    grad_half_gap = Vec2{ax * u, by * v} * (0.5 / rho);
    if (!p.degenerate()) {
      // d1 = -grad(theta)/2 with grad(theta) = ax by (-y, x) / rho^2
      out.d1 = Vec2{r.y, -r.x} * (0.5 * ax * by / rho2);
    }
  } else if (!p.degenerate()) {
    out.singular = true;
  }
  out.grad = {grad_mean + grad_half_gap, grad_mean - grad_half_gap};
  return out;
}

FrameRotation::FrameRotation(double theta)
    : theta_(theta), c_(std::cos(0.5 * theta)), s_(std::sin(0.5 * theta)) {}

std::array<std::array<double, 2>, 2> FrameRotation::matrix() const {
  return {{{c_, -s_}, {s_, c_}}};
}

State2 FrameRotation::apply_to_state(const State2& dia) const {
  return {c_ * dia[0] + s_ * dia[1], -s_ * dia[0] + c_ * dia[1]};
}

State2 FrameRotation::inverse_to_state(const State2& adi) const {
  return {c_ * adi[0] - s_ * adi[1], s_ * adi[0] + c_ * adi[1]};
}

Density2 FrameRotation::apply_to_density(const Density2& rho) const {
  const std::array<std::array<double, 2>, 2> vecs{column(0), column(1)};
  Density2 out{};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      Complex acc{0.0, 0.0};
      for (int k = 0; k < 2; ++k) {
        for (int l = 0; l < 2; ++l) {
          acc += vecs[i][k] * rho[k][l] * vecs[j][l];
        }
      }
      out[i][j] = acc;
    }
  }
  return out;
}

}  // namespace gpdyn
