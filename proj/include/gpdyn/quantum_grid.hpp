#pragma once

// Exact quantum reference dynamics on a spectral grid.

#include <string>
#include <vector>

#include "gpdyn/fft.hpp"
#include "gpdyn/grid.hpp"
#include "gpdyn/lvc_model.hpp"

namespace gpdyn {

// Gaussian packet exp(-|r - r0|^2 / sigma^2) exp(i p0.r / hbar). With
// sigma = sqrt(2/omega) and M = 1 this is the harmonic ground state.
struct PacketSpec {
  Vec2 center{-0.5, 0.0};
  Vec2 momentum{2.5, 0.0};
  double sigma = 1.0;
  int component = 0;  // array component holding the packet
  Representation representation = Representation::diabatic;
};

WavefunctionField init_gaussian_packet(const ModelParams& params, const Grid2D& grid, const PacketSpec& spec);

struct BoundaryGuard {
  double tolerance = 1e-10;  // max probability allowed in the edge band
  int band = 4;              // edge band width in nodes
  int check_interval = 25;   // steps between checks
};

// Probability in the outer band of `band` nodes on every side.
double boundary_probability(const WavefunctionField& field, int band);

// Strang split-operator propagator for the diabatic two-component TDSE:
// half kinetic step, exact 2x2 potential exponential, half kinetic step.
class DiabaticPropagator {
 public:
  DiabaticPropagator(const ModelParams& params, const Grid2D& grid, double dt, BoundaryGuard guard = {});

  // Advances `field` by n_steps. Throws RuntimeAbort when the edge band
  // picks up more than guard.tolerance probability.
  void step(WavefunctionField& field, long n_steps) const;

  double dt() const { return dt_; }

 private:
  void check_boundary(const WavefunctionField& field) const;

  ModelParams params_;
  Grid2D grid_;
  double dt_;
  BoundaryGuard guard_;
  Fft2D fft_;
  ComplexBuffer kinetic_half_;  // includes the inverse FFT scale
  ComplexBuffer pot_diag1_;
  ComplexBuffer pot_diag2_;
  ComplexBuffer pot_offdiag_;
};

WavefunctionField propagate_diabatic(WavefunctionField field, const ModelParams& params, double dt, long n_steps,
                                     BoundaryGuard guard = {});

struct AdiabaticOptions {
  double coupling_cap = 1e6;     // bound on |grad theta| at any node
  double norm_tolerance = 1e-6;  // allowed |norm - norm0| over the propagator lifetime
  bool zero_couplings = false;   // drop tau entirely (decoupled surfaces)
  double stability_factor = 2.0; // initial RK4 substep: h * E_max / hbar <= factor
  // Norm budget: each step may lose at most norm_tolerance * |dt| / horizon;
  // a step over budget is repeated with twice the substeps (up to the cap).
  double horizon = 3.0;
  int max_substeps = 64;
  // The 1/r^2 diagonal correction gives a packet sitting on the intersection
  // a thin high-momentum tail that reaches the edges early (~1e-4 of the
  // probability on the default grid), so the edge tolerance here is looser.
  BoundaryGuard guard{1e-3};
};

// Coupled-channel propagator for the adiabatic equations with single-valued
// (periodic) components, i.e. without the geometric phase. Explicit RK4 with
// spectral derivatives; the first-derivative coupling is applied in the
// skew-symmetric form (g.grad + div g)/2 so the discrete generator stays
// anti-Hermitian.
class AdiabaticPropagator {
 public:
  AdiabaticPropagator(const ModelParams& params, const Grid2D& grid, double dt, AdiabaticOptions options = {});

  void step(WavefunctionField& field, long n_steps);

  int substeps() const { return substeps_; }
  int refinements() const { return refinements_; }
  double spectral_bound() const { return spectral_bound_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  using Pair = std::array<ComplexBuffer, 2>;
  // rhs = -(i/hbar) H psi
  void time_derivative(const Pair& psi, Pair& rhs);
  void check_norm(const WavefunctionField& field) const;
  void check_boundary(const WavefunctionField& field) const;

  ModelParams params_;
  Grid2D grid_;
  double dt_;
  AdiabaticOptions options_;
  Fft2D fft_;
  int substeps_ = 1;
  int refinements_ = 0;
  double spectral_bound_ = 0.0;
  std::vector<double> kinetic_;   // hbar^2 k^2 / 2M
  std::vector<double> kx_;
  std::vector<double> ky_;
  std::array<std::vector<double>, 2> potential_;  // W + K per column
  std::vector<double> gx_;
  std::vector<double> gy_;
  bool coupled_ = true;
  double reference_norm_ = -1.0;
  std::vector<std::string> warnings_;
  // Scratch for time_derivative and the RK4 stages.
  Pair spec_, acc_, extra_;
  ComplexBuffer grad_x_, grad_y_, flux_x_, flux_y_;
  Pair k1_, k2_, k3_, k4_, stage_, saved_;
};

WavefunctionField propagate_adiabatic_nogp(WavefunctionField field, const ModelParams& params, double dt,
                                           long n_steps, AdiabaticOptions options = {});

// Pointwise rotation of a diabatic field into the adiabatic frame using the
// principal-branch mixing angle at every node.
WavefunctionField to_adiabatic(const WavefunctionField& diabatic, const ModelParams& params);

DensityField to_density(const WavefunctionField& field);

// Integral of the total density over x < 0; cells straddling x = 0 are split
// linearly.
double left_fraction(const DensityField& density);

struct Moments {
  Vec2 position;
  Vec2 momentum;
  Vec2 position_variance;
};

Moments moments(const WavefunctionField& field, double hbar);

// <H> of the diabatic Hamiltonian.
double diabatic_energy(const WavefunctionField& field, const ModelParams& params);

}  // namespace gpdyn
