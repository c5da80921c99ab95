#pragma once

// Two-state linear vibronic coupling model with a conical intersection at
// the origin. Everything here is closed form and pure.
//
// Conventions used throughout the library:
//
//   V11 = w^2/2 [(x + a/2)^2 + y^2],  V22 = w^2/2 [(x - a/2)^2 + y^2],
//   V12 = c y,
//   theta = atan2(2 V12, V11 - V22)  in (-pi, pi].
//
// The rotation U(theta) has columns psi_1 = (cos t/2, sin t/2) and
// psi_2 = (-sin t/2, cos t/2). With this branch of theta, psi_1 is the
// eigenvector of the UPPER surface W+ and psi_2 belongs to the LOWER surface
// W- (checked numerically in the unit tests). Adiabatic arrays everywhere in
// the library are indexed by column: 0 -> psi_1 (W+), 1 -> psi_2 (W-).
//
// Derivative coupling sign: d1 = <psi_1 | grad psi_2> = -grad(theta)/2, so
// <psi_2 | grad psi_1> = +grad(theta)/2 = -d1.

#include <array>
#include <complex>

#include "gpdyn/vec2.hpp"

namespace gpdyn {

struct ModelParams {
  double omega = 2.0;
  double a = 1.0;
  double c = 4.0;
  double mass = 1.0;
  double hbar = 1.0;

  // Throws ConfigError naming the offending field.
  void validate() const;

  // Coefficients of the mixing-angle arguments: V11 - V22 = ax * x and
  // 2 V12 = by * y.
  double angle_coeff_x() const { return omega * omega * a; }
  double angle_coeff_y() const { return 2.0 * c; }
  // True when a = 0 or c = 0: the intersection degenerates into a seam (or
  // the surfaces never split) and the couplings vanish identically.
  bool degenerate() const { return angle_coeff_x() == 0.0 || angle_coeff_y() == 0.0; }
};

struct DiabaticMatrix {
  double v11 = 0.0;
  double v12 = 0.0;
  double v22 = 0.0;
};

struct SurfacePair {
  double lower = 0.0;
  double upper = 0.0;
};

// Column index of each surface in adiabatic arrays.
inline constexpr int kUpperColumn = 0;
inline constexpr int kLowerColumn = 1;

struct AdiabaticData {
  double w_minus = 0.0;
  double w_plus = 0.0;
  double theta = 0.0;
  Vec2 grad_theta;
  Vec2 d1;          // <psi_1 | grad psi_2>
  double d2 = 0.0;  // <psi_1 | lap psi_2>
  double k11 = 0.0;
  double k12 = 0.0;
  double k22 = 0.0;

  // Energy of the surface carried by adiabatic column 0 or 1.
  double surface(int column) const { return column == kUpperColumn ? w_plus : w_minus; }
};

DiabaticMatrix diabatic_potential(const ModelParams& p, Vec2 r);
SurfacePair adiabatic_surfaces(const ModelParams& p, Vec2 r);

// Gradients of the surfaces, indexed by adiabatic column (W+, W-). At the
// intersection point the cone term has no gradient and only the smooth mean
// part is returned.
std::array<Vec2, 2> adiabatic_gradients(const ModelParams& p, Vec2 r);

// Principal-branch mixing angle. Throws SingularPointError at the CI of a
// non-degenerate model.
double mixing_angle(const ModelParams& p, Vec2 r);

// Surfaces, mixing angle, couplings and the K matrix at one point. Throws
// SingularPointError at the CI of a non-degenerate model.
AdiabaticData adiabatic_data(const ModelParams& p, Vec2 r);

// Same quantities as adiabatic_data; kept as the named entry point for the
// coupling fields.
inline AdiabaticData derivative_couplings(const ModelParams& p, Vec2 r) { return adiabatic_data(p, r); }

// Surfaces, their gradients and d1 without the mixing angle itself; the
// hot path of the trajectory solver. Column-indexed like AdiabaticData.
// `singular` is set at the CI of a non-degenerate model (d1 left at zero).
struct LocalSurfaces {
  std::array<double, 2> w{};
  std::array<Vec2, 2> grad{};
  Vec2 d1;
  bool singular = false;
};

LocalSurfaces local_surfaces(const ModelParams& p, Vec2 r);

using Complex = std::complex<double>;
using State2 = std::array<Complex, 2>;
using Density2 = std::array<std::array<Complex, 2>, 2>;

// Rotation between the diabatic basis {|1>, |2>} and the adiabatic basis.
class FrameRotation {
 public:
  explicit FrameRotation(double theta);

  double theta() const { return theta_; }
  // U(theta) in diabatic rows, column order of the defining matrix.
  std::array<std::array<double, 2>, 2> matrix() const;

  // Diabatic amplitudes -> adiabatic amplitudes (<psi_1|v>, <psi_2|v>),
  // i.e. U^T v.
  State2 apply_to_state(const State2& diabatic) const;
  // Adiabatic amplitudes -> diabatic amplitudes, U a.
  State2 inverse_to_state(const State2& adiabatic) const;
  // U^T rho U: rho_adi[i][j] = <psi_i| rho |psi_j>.
  Density2 apply_to_density(const Density2& diabatic) const;

  // Diabatic components of adiabatic column 0 or 1.
  std::array<double, 2> column(int index) const {
    return index == 0 ? std::array<double, 2>{c_, s_} : std::array<double, 2>{-s_, c_};
  }

 private:
  double theta_;
  double c_;
  double s_;
};

inline FrameRotation frame_rotation(double theta) { return FrameRotation(theta); }

}  // namespace gpdyn
