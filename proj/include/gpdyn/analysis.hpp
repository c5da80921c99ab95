#pragma once

#include <complex>
#include <span>
#include <vector>

#include "gpdyn/grid.hpp"
#include "gpdyn/lvc_model.hpp"

namespace gpdyn {

// Pair of circles z(+/-s)(phi) = z_c +/- (d + r e^{i phi}) / 2 in the nuclear
// plane, traversed for phi in [0, 2 pi].
struct ContourSpec {
  std::complex<double> z_c{1.0, 0.0};
  double d = 10.0;
  double r = 9.0;
  int n_phi = 360;

  void validate() const;
};

struct ContourTrace {
  std::vector<double> phi;
  std::vector<Vec2> points;
  std::vector<double> theta;  // continuously unwrapped mixing angle
  int winding = 0;
};

struct WindingResult {
  int winding_minus = 0;  // contour z(-s)
  int winding_plus = 0;   // contour z(+s)
  ContourTrace minus;
  ContourTrace plus;
};

// Accumulated change of the mixing angle along the two contours, in units of
// 2 pi. Unwrapping follows the nearest branch and refuses steps with
// |d theta| >= pi/2 (raise n_phi instead of risking an aliased winding).
WindingResult contour_winding(const ModelParams& params, const ContourSpec& spec);

// Same accumulation along an explicit closed polyline (first point is not
// repeated at the end). Optionally returns the unwrapped trace.
int polyline_winding(const ModelParams& params, std::span<const Vec2> closed, std::vector<double>* theta = nullptr);

struct Gaussian1D {
  double center = 0.0;
  double width = 1.0;  // g(x) = amplitude * exp(-(x - center)^2 / width^2)
  double amplitude = 1.0;

  double operator()(double x) const;
};

enum class InterferenceMode { constructive, destructive, none };

struct InterferenceSpec {
  Gaussian1D g1{-1.5, 1.0, 1.0};
  Gaussian1D g2{1.5, 1.0, 1.0};
  InterferenceMode mode = InterferenceMode::destructive;

  void validate() const;
};

// constructive |g1 + g2|^2, destructive |g1 - g2|^2, none |g1|^2 + |g2|^2.
std::vector<double> interference_demo(const InterferenceSpec& spec, std::span<const double> axis);

struct NodalWindow {
  double x_lo = 1.0;
  double x_hi = 4.0;
  double off_axis = 0.3;  // |y| beyond this counts as off-axis
};

struct AxisProfile {
  std::vector<double> x;
  std::vector<double> value;
};

// Total density along y = 0, taken from a y = 0 row when the grid has one and
// interpolated linearly between the straddling rows otherwise.
AxisProfile on_axis_profile(const DensityField& density);

// max on-axis total density / max off-axis total density inside the window.
// Small values signal a nodal line; >= 1 an on-axis peak.
double nodal_metric(const DensityField& density, const NodalWindow& window = {});

// x position of the on-axis maximum within [x_lo, x_hi].
double on_axis_peak(const DensityField& density, double x_lo, double x_hi);

}  // namespace gpdyn
