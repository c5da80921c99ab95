#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gpdyn/errors.hpp"
#include "gpdyn/quantum_grid.hpp"

namespace gpdyn {

namespace {

ComplexBuffer zeros(std::size_t n) { return ComplexBuffer(n); }

}  // namespace

AdiabaticPropagator::AdiabaticPropagator(const ModelParams& params, const Grid2D& grid, double dt,
                                         AdiabaticOptions options)
    : params_(params), grid_(grid), dt_(dt), options_(options), fft_(grid.nx, grid.ny) {
  params.validate();
  grid.validate();
  if (!(dt != 0.0) || !std::isfinite(dt)) throw ConfigError("time.dt must be finite and nonzero");
  if (!(options.coupling_cap > 0.0)) throw ConfigError("adiabatic.coupling_cap must be positive");
  if (!(options.horizon > 0.0)) throw ConfigError("adiabatic.horizon must be positive");
  if (options.max_substeps < 1) throw ConfigError("adiabatic.max_substeps must be >= 1");

  const std::size_t n = grid.size();
  const double kappa = params.hbar * params.hbar / (2.0 * params.mass);
  kinetic_.resize(n);
  kx_.resize(n);
  ky_.resize(n);
  potential_[0].resize(n);
  potential_[1].resize(n);
  gx_.assign(n, 0.0);
  gy_.assign(n, 0.0);
  coupled_ = !options.zero_couplings && !params.degenerate();

  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const std::size_t k = grid.index(i, j);
      kx_[k] = grid.kx(i);
      ky_[k] = grid.ky(j);
      kinetic_[k] = kappa * (kx_[k] * kx_[k] + ky_[k] * ky_[k]);
    }
  }

  long capped = 0;
  double g_max = 0.0;
  double v_max = 0.0;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const std::size_t k = grid.index(i, j);
      const AdiabaticData ad = adiabatic_data(params, {grid.x(i), grid.y(j)});
      double kdiag = 0.0;
      if (coupled_) {
        Vec2 g = ad.grad_theta;
        const double gn = norm(g);
        if (!std::isfinite(gn)) {
          throw RuntimeAbort("coupling overflow at node (" + std::to_string(grid.x(i)) + ", " +
                             std::to_string(grid.y(j)) + ")");
        }
        if (gn > options.coupling_cap) {
          g *= options.coupling_cap / gn;
          ++capped;
        }
        gx_[k] = g.x;
        gy_[k] = g.y;
        g_max = std::max(g_max, norm(g));
        kdiag = params.hbar * params.hbar / (8.0 * params.mass) * dot(g, g);
      }
      potential_[kUpperColumn][k] = ad.w_plus + kdiag;
      potential_[kLowerColumn][k] = ad.w_minus + kdiag;
      v_max = std::max(v_max, ad.w_plus + kdiag);
    }
  }
  if (capped > 0) {
    warnings_.push_back("coupling magnitude capped at " + std::to_string(options.coupling_cap) + " on " +
                        std::to_string(capped) + " nodes");
  }

  const double kx_max = std::numbers::pi / grid.dx();
  const double ky_max = std::numbers::pi / grid.dy();
  spectral_bound_ = kappa * (kx_max * kx_max + ky_max * ky_max) + v_max + kappa * g_max * (kx_max + ky_max);
  const double h_limit = options.stability_factor * params.hbar / spectral_bound_;
  substeps_ = std::max(1, static_cast<int>(std::ceil(std::abs(dt) / h_limit)));
  substeps_ = std::min(substeps_, options.max_substeps);

  for (Pair* p : {&spec_, &acc_, &extra_, &k1_, &k2_, &k3_, &k4_, &stage_, &saved_}) {
    (*p)[0] = zeros(n);
    (*p)[1] = zeros(n);
  }
  grad_x_ = zeros(n);
  grad_y_ = zeros(n);
  flux_x_ = zeros(n);
  flux_y_ = zeros(n);
}

// Column equations (0 -> W+, 1 -> W-), with S f = (g.grad f + div(g f)) / 2:
//   i hbar d/dt chi_0 = (T + W+ + K) chi_0 + kappa S chi_1
//   i hbar d/dt chi_1 = (T + W- + K) chi_1 - kappa S chi_0
void AdiabaticPropagator::time_derivative(const Pair& psi, Pair& rhs) {
  const std::size_t n = grid_.size();
  const double scale = fft_.inverse_scale();
  const double kappa = params_.hbar * params_.hbar / (2.0 * params_.mass);
  const Complex i_unit(0.0, 1.0);

  for (int c = 0; c < 2; ++c) {
    spec_[c] = psi[c];
    fft_.forward(spec_[c]);
    for (std::size_t k = 0; k < n; ++k) acc_[c][k] = kinetic_[k] * spec_[c][k];
    std::fill(extra_[c].begin(), extra_[c].end(), Complex{});
  }

  if (coupled_) {
    for (int c = 0; c < 2; ++c) {
      const int target = 1 - c;
      const double sign = (target == kUpperColumn) ? 1.0 : -1.0;
      const double f = 0.5 * sign * kappa;
      for (std::size_t k = 0; k < n; ++k) {
        grad_x_[k] = i_unit * kx_[k] * spec_[c][k] * scale;
        grad_y_[k] = i_unit * ky_[k] * spec_[c][k] * scale;
      }
      fft_.backward(grad_x_);
      fft_.backward(grad_y_);
      for (std::size_t k = 0; k < n; ++k) {
        extra_[target][k] += f * (gx_[k] * grad_x_[k] + gy_[k] * grad_y_[k]);
        flux_x_[k] = gx_[k] * psi[c][k];
        flux_y_[k] = gy_[k] * psi[c][k];
      }
      fft_.forward(flux_x_);
      fft_.forward(flux_y_);
      for (std::size_t k = 0; k < n; ++k) {
        acc_[target][k] += f * i_unit * (kx_[k] * flux_x_[k] + ky_[k] * flux_y_[k]);
      }
    }
  }

  const Complex factor(0.0, -1.0 / params_.hbar);
  for (int c = 0; c < 2; ++c) {
    fft_.backward(acc_[c]);
    for (std::size_t k = 0; k < n; ++k) {
      const Complex h_psi = acc_[c][k] * scale + potential_[c][k] * psi[c][k] + extra_[c][k];
      rhs[c][k] = factor * h_psi;
    }
  }
}

void AdiabaticPropagator::check_norm(const WavefunctionField& field) const {
  const double drift = std::abs(field.norm() - reference_norm_);
  if (!(drift <= options_.norm_tolerance)) {
    std::ostringstream msg;
    msg << "adiabatic propagation aborted: norm drift " << drift << " exceeds tolerance "
        << options_.norm_tolerance << " at t = " << field.time << " (" << substeps_
        << " RK4 substeps per step; reduce time.dt)";
    throw RuntimeAbort(msg.str());
  }
}

void AdiabaticPropagator::step(WavefunctionField& field, long n_steps) {
  if (field.representation != Representation::adiabatic) {
    throw ConfigError("propagate_adiabatic_nogp requires an adiabatic field");
  }
  if (!(field.grid == grid_)) throw ConfigError("field grid does not match the propagator grid");
  if (reference_norm_ < 0.0) reference_norm_ = field.norm();

  const std::size_t n = grid_.size();
  Pair& psi = field.component;
  const BoundaryGuard& guard = options_.guard;
  const double step_budget = options_.norm_tolerance * std::abs(dt_) / options_.horizon;

  for (long s = 0; s < n_steps; ++s) {
    const double norm_before = field.norm();
    saved_[0] = psi[0];
    saved_[1] = psi[1];
    for (;;) {
      const double h = dt_ / substeps_;
      for (int sub = 0; sub < substeps_; ++sub) {
        time_derivative(psi, k1_);
        for (int c = 0; c < 2; ++c)
          for (std::size_t k = 0; k < n; ++k) stage_[c][k] = psi[c][k] + 0.5 * h * k1_[c][k];
        time_derivative(stage_, k2_);
        for (int c = 0; c < 2; ++c)
          for (std::size_t k = 0; k < n; ++k) stage_[c][k] = psi[c][k] + 0.5 * h * k2_[c][k];
        time_derivative(stage_, k3_);
        for (int c = 0; c < 2; ++c)
          for (std::size_t k = 0; k < n; ++k) stage_[c][k] = psi[c][k] + h * k3_[c][k];
        time_derivative(stage_, k4_);
        for (int c = 0; c < 2; ++c)
          for (std::size_t k = 0; k < n; ++k)
            psi[c][k] += (h / 6.0) * (k1_[c][k] + 2.0 * k2_[c][k] + 2.0 * k3_[c][k] + k4_[c][k]);
      }
      if (std::abs(field.norm() - norm_before) <= step_budget || 2 * substeps_ > options_.max_substeps) break;
      psi[0] = saved_[0];
      psi[1] = saved_[1];
      substeps_ *= 2;
      ++refinements_;
    }
    field.time += dt_;
    check_norm(field);
    if (guard.check_interval > 0 && (s + 1) % guard.check_interval == 0) check_boundary(field);
  }
  // Callers stepping one step at a time still get checked.
  if (guard.check_interval > 0) check_boundary(field);
}

void AdiabaticPropagator::check_boundary(const WavefunctionField& field) const {
  const BoundaryGuard& guard = options_.guard;
  const double edge = boundary_probability(field, guard.band);
  if (edge > guard.tolerance) {
    std::ostringstream msg;
    msg << "domain too small: boundary probability " << edge << " exceeds " << guard.tolerance
        << " at t = " << field.time;
    throw RuntimeAbort(msg.str());
  }
}

WavefunctionField propagate_adiabatic_nogp(WavefunctionField field, const ModelParams& params, double dt,
                                           long n_steps, AdiabaticOptions options) {
  AdiabaticPropagator prop(params, field.grid, dt, options);
  prop.step(field, n_steps);
  return field;
}

}  // namespace gpdyn
