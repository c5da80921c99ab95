#include "gpdyn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "gpdyn/errors.hpp"

namespace gpdyn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMaxStep = 0.5 * std::numbers::pi;
constexpr double kMinClearance = 1e-6;

// Closest approach of a circle (centre, radius) to the origin.
double clearance(std::complex<double> centre, double radius) { return std::abs(std::abs(centre) - radius); }

double unwrap_step(double prev_raw, double raw) {
  double step = raw - prev_raw;
  step -= kTwoPi * std::round(step / kTwoPi);
  if (std::abs(step) >= kMaxStep) {
    std::ostringstream msg;
    msg << "mixing angle jumps by " << step << " rad between samples; increase contour.n_phi";
    throw ConfigError(msg.str());
  }
  return step;
}

ContourTrace trace_circle(const ModelParams& params, std::complex<double> centre, double radius, double sign,
                          int n_phi) {
  ContourTrace t;
  t.phi.reserve(n_phi + 1);
  t.points.reserve(n_phi + 1);
  t.theta.reserve(n_phi + 1);
  double prev_raw = 0.0;
  double acc = 0.0;
  for (int k = 0; k <= n_phi; ++k) {
    const double phi = kTwoPi * k / n_phi;
    const std::complex<double> z = centre + sign * 0.5 * radius * std::polar(1.0, phi);
    const Vec2 pt{z.real(), z.imag()};
    const double raw = mixing_angle(params, pt);
    if (k == 0) {
      acc = raw;
    } else {
      acc += unwrap_step(prev_raw, raw);
    }
    prev_raw = raw;
    t.phi.push_back(phi);
    t.points.push_back(pt);
    t.theta.push_back(acc);
  }
  t.winding = static_cast<int>(std::lround((t.theta.back() - t.theta.front()) / kTwoPi));
  return t;
}

}  // namespace

void ContourSpec::validate() const {
  if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("contour.r must be >= 0");
  if (!std::isfinite(d) || !std::isfinite(z_c.real()) || !std::isfinite(z_c.imag())) {
    throw ConfigError("contour.z_c and contour.d must be finite");
  }
  if (n_phi < 16) throw ConfigError("contour.n_phi must be >= 16");
  for (double sign : {-1.0, 1.0}) {
    if (clearance(z_c + sign * 0.5 * d, 0.5 * r) < kMinClearance) {
      throw ConfigError(std::string("contour z") + (sign < 0 ? "(-s)" : "(+s)") +
                        " passes through the conical intersection");
    }
  }
}

WindingResult contour_winding(const ModelParams& params, const ContourSpec& spec) {
  params.validate();
  spec.validate();
  WindingResult out;
  out.minus = trace_circle(params, spec.z_c - 0.5 * spec.d, spec.r, -1.0, spec.n_phi);
  out.plus = trace_circle(params, spec.z_c + 0.5 * spec.d, spec.r, 1.0, spec.n_phi);
  out.winding_minus = out.minus.winding;
  out.winding_plus = out.plus.winding;
  return out;
}

int polyline_winding(const ModelParams& params, std::span<const Vec2> closed, std::vector<double>* theta) {
  if (closed.size() < 3) throw ConfigError("polyline needs at least three points");
  double prev_raw = mixing_angle(params, closed[0]);
  double acc = prev_raw;
  if (theta != nullptr) {
    theta->clear();
    theta->push_back(acc);
  }
  for (std::size_t k = 1; k <= closed.size(); ++k) {
    const double raw = mixing_angle(params, closed[k % closed.size()]);
    acc += unwrap_step(prev_raw, raw);
    prev_raw = raw;
    if (theta != nullptr) theta->push_back(acc);
  }
  return static_cast<int>(std::lround((acc - mixing_angle(params, closed[0])) / kTwoPi));
}

double Gaussian1D::operator()(double x) const {
  const double u = (x - center) / width;
  return amplitude * std::exp(-u * u);
}

void InterferenceSpec::validate() const {
  if (!(g1.width > 0.0) || !(g2.width > 0.0)) throw ConfigError("interference widths must be positive");
}

std::vector<double> interference_demo(const InterferenceSpec& spec, std::span<const double> axis) {
  spec.validate();
  std::vector<double> out;
  out.reserve(axis.size());
  for (double x : axis) {
    const double a = spec.g1(x);
    const double b = spec.g2(x);
    switch (spec.mode) {
      case InterferenceMode::constructive:
        out.push_back((a + b) * (a + b));
        break;
      case InterferenceMode::destructive:
        out.push_back((a - b) * (a - b));
        break;
      case InterferenceMode::none:
        out.push_back(a * a + b * b);
        break;
    }
  }
  return out;
}

AxisProfile on_axis_profile(const DensityField& density) {
  const Grid2D& g = density.grid;
  const double fy = (0.0 - g.y_min) / g.dy() - 0.5;  // fractional row index of y = 0
  if (fy < 0.0 || fy > g.ny - 1) throw ConfigError("y = 0 lies outside the density grid");
  int j0 = static_cast<int>(std::floor(fy));
  double frac = fy - j0;
  if (std::abs(frac) < 1e-9) {
    frac = 0.0;
  } else if (std::abs(frac - 1.0) < 1e-9) {
    ++j0;
    frac = 0.0;
  }
  const int j1 = std::min(j0 + 1, g.ny - 1);
  AxisProfile prof;
  prof.x.resize(g.nx);
  prof.value.resize(g.nx);
  for (int i = 0; i < g.nx; ++i) {
    prof.x[i] = g.x(i);
    const double a = density.total[g.index(i, j0)];
    const double b = density.total[g.index(i, j1)];
    prof.value[i] = frac == 0.0 ? a : (1.0 - frac) * a + frac * b;
  }
  return prof;
}

double nodal_metric(const DensityField& density, const NodalWindow& window) {
  const Grid2D& g = density.grid;
  if (!(window.x_hi > window.x_lo)) throw ConfigError("nodal window is empty");
  const AxisProfile prof = on_axis_profile(density);
  double on_max = -std::numeric_limits<double>::infinity();
  double off_max = -std::numeric_limits<double>::infinity();
  bool any_x = false;
  for (int i = 0; i < g.nx; ++i) {
    const double x = g.x(i);
    if (x < window.x_lo || x > window.x_hi) continue;
    any_x = true;
    on_max = std::max(on_max, prof.value[i]);
    for (int j = 0; j < g.ny; ++j) {
      if (std::abs(g.y(j)) > window.off_axis) off_max = std::max(off_max, density.total[g.index(i, j)]);
    }
  }
  if (!any_x || !std::isfinite(off_max)) throw ConfigError("nodal window contains no grid nodes");
  if (!(off_max > 0.0)) throw ConfigError("no off-axis density inside the nodal window");
  return on_max / off_max;
}

double on_axis_peak(const DensityField& density, double x_lo, double x_hi) {
  const AxisProfile prof = on_axis_profile(density);
  double best = -std::numeric_limits<double>::infinity();
  double where = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < prof.x.size(); ++i) {
    if (prof.x[i] < x_lo || prof.x[i] > x_hi) continue;
    if (prof.value[i] > best) {
      best = prof.value[i];
      where = prof.x[i];
    }
  }
  if (std::isnan(where)) throw ConfigError("peak window contains no grid nodes");
  return where;
}

}  // namespace gpdyn
