#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gpdyn/errors.hpp"
#include "gpdyn/quantum_grid.hpp"

namespace gpdyn {

WavefunctionField init_gaussian_packet(const ModelParams& params, const Grid2D& grid, const PacketSpec& spec) {
  params.validate();
  grid.validate();
  if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma)) {
    throw ConfigError("initial.sigma must be positive");
  }
  if (spec.component != 0 && spec.component != 1) {
    throw ConfigError("initial.state must select one of the two components");
  }
  if (spec.center.x <= grid.x_min || spec.center.x >= grid.x_max || spec.center.y <= grid.y_min ||
      spec.center.y >= grid.y_max) {
    throw ConfigError("initial.center lies outside the grid");
  }

  WavefunctionField field(grid, spec.representation);
  auto& psi = field.component[spec.component];
  const double inv_s2 = 1.0 / (spec.sigma * spec.sigma);
  for (int j = 0; j < grid.ny; ++j) {
    const double y = grid.y(j);
    for (int i = 0; i < grid.nx; ++i) {
      const double x = grid.x(i);
      const double dxc = x - spec.center.x;
      const double dyc = y - spec.center.y;
      const double envelope = std::exp(-(dxc * dxc + dyc * dyc) * inv_s2);
      const double phase = (spec.momentum.x * x + spec.momentum.y * y) / params.hbar;
      psi[grid.index(i, j)] = envelope * Complex(std::cos(phase), std::sin(phase));
    }
  }

  // The continuum integral of the envelope squared is pi sigma^2 / 2; a
  // large mismatch means the domain truncates the packet.
  const double raw = field.population(spec.component);
  const double expected = std::numbers::pi * spec.sigma * spec.sigma / 2.0;
  if (std::abs(raw - expected) > 1e-6 * expected) {
    throw ConfigError("initial.sigma is too large for the grid: packet is not normalisable on the domain");
  }
  const double scale = 1.0 / std::sqrt(raw);
  for (auto& v : psi) v *= scale;
  return field;
}

double boundary_probability(const WavefunctionField& field, int band) {
  const Grid2D& g = field.grid;
  band = std::clamp(band, 1, std::min(g.nx, g.ny) / 2);
  double acc = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    const bool edge_row = j < band || j >= g.ny - band;
    for (int i = 0; i < g.nx; ++i) {
      if (!edge_row && i >= band && i < g.nx - band) continue;
      const std::size_t k = g.index(i, j);
      acc += std::norm(field.component[0][k]) + std::norm(field.component[1][k]);
    }
  }
  return acc * g.cell_area();
}

DiabaticPropagator::DiabaticPropagator(const ModelParams& params, const Grid2D& grid, double dt, BoundaryGuard guard)
    : params_(params),
      grid_(grid),
      dt_(dt),
      guard_(guard),
      fft_(grid.nx, grid.ny),
      kinetic_half_(grid.size()),
      pot_diag1_(grid.size()),
      pot_diag2_(grid.size()),
      pot_offdiag_(grid.size()) {
  params.validate();
  grid.validate();
  if (!(dt != 0.0) || !std::isfinite(dt)) throw ConfigError("time.dt must be finite and nonzero");

  const double hbar = params.hbar;
  const double scale = fft_.inverse_scale();
  for (int j = 0; j < grid.ny; ++j) {
    const double ky = grid.ky(j);
    for (int i = 0; i < grid.nx; ++i) {
      const double kx = grid.kx(i);
      const double energy = hbar * hbar * (kx * kx + ky * ky) / (2.0 * params.mass);
      const double phase = -0.5 * energy * dt / hbar;
      kinetic_half_[grid.index(i, j)] = scale * Complex(std::cos(phase), std::sin(phase));
    }
  }

  // exp(-i V dt / hbar) for V = m 1 + [[delta, v12], [v12, -delta]].
  const double tau = dt / hbar;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const DiabaticMatrix v = diabatic_potential(params, {grid.x(i), grid.y(j)});
      const double mean = 0.5 * (v.v11 + v.v22);
      const double delta = 0.5 * (v.v11 - v.v22);
      const double h = std::hypot(delta, v.v12);
      const Complex global(std::cos(mean * tau), -std::sin(mean * tau));
      const double cs = std::cos(h * tau);
      const double sinc = h > 0.0 ? std::sin(h * tau) / h : tau;
      const std::size_t k = grid.index(i, j);
      pot_diag1_[k] = global * Complex(cs, -sinc * delta);
      pot_diag2_[k] = global * Complex(cs, sinc * delta);
      pot_offdiag_[k] = global * Complex(0.0, -sinc * v.v12);
    }
  }
}

void DiabaticPropagator::check_boundary(const WavefunctionField& field) const {
  const double edge = boundary_probability(field, guard_.band);
  if (edge > guard_.tolerance) {
    std::ostringstream msg;
    msg << "domain too small: boundary probability " << edge << " exceeds " << guard_.tolerance << " at t = "
        << field.time;
    throw RuntimeAbort(msg.str());
  }
}

void DiabaticPropagator::step(WavefunctionField& field, long n_steps) const {
  if (field.representation != Representation::diabatic) {
    throw ConfigError("propagate_diabatic requires a diabatic field");
  }
  if (!(field.grid == grid_)) throw ConfigError("field grid does not match the propagator grid");

  auto& a = field.component[0];
  auto& b = field.component[1];
  const std::size_t n = grid_.size();
  for (long s = 0; s < n_steps; ++s) {
    fft_.forward(a);
    fft_.forward(b);
    for (std::size_t k = 0; k < n; ++k) {
      a[k] *= kinetic_half_[k];
      b[k] *= kinetic_half_[k];
    }
    fft_.backward(a);
    fft_.backward(b);
    for (std::size_t k = 0; k < n; ++k) {
      const Complex a0 = a[k];
      const Complex b0 = b[k];
      a[k] = pot_diag1_[k] * a0 + pot_offdiag_[k] * b0;
      b[k] = pot_offdiag_[k] * a0 + pot_diag2_[k] * b0;
    }
    fft_.forward(a);
    fft_.forward(b);
    for (std::size_t k = 0; k < n; ++k) {
      a[k] *= kinetic_half_[k];
      b[k] *= kinetic_half_[k];
    }
    fft_.backward(a);
    fft_.backward(b);
    field.time += dt_;
    if (guard_.check_interval > 0 && (s + 1) % guard_.check_interval == 0) check_boundary(field);
  }
  if (guard_.check_interval > 0) check_boundary(field);
}

WavefunctionField propagate_diabatic(WavefunctionField field, const ModelParams& params, double dt, long n_steps,
                                     BoundaryGuard guard) {
  DiabaticPropagator prop(params, field.grid, dt, guard);
  prop.step(field, n_steps);
  return field;
}

WavefunctionField to_adiabatic(const WavefunctionField& diabatic, const ModelParams& params) {
  if (diabatic.representation != Representation::diabatic) {
    throw ConfigError("to_adiabatic requires a diabatic field");
  }
  const Grid2D& g = diabatic.grid;
  WavefunctionField out(g, Representation::adiabatic);
  out.time = diabatic.time;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      const FrameRotation rot(mixing_angle(params, {g.x(i), g.y(j)}));
      const State2 adi = rot.apply_to_state({diabatic.component[0][k], diabatic.component[1][k]});
      out.component[0][k] = adi[0];
      out.component[1][k] = adi[1];
    }
  }
  return out;
}

DensityField to_density(const WavefunctionField& field) {
  DensityField d(field.grid, field.time);
  d.representation = to_string(field.representation);
  for (std::size_t k = 0; k < field.grid.size(); ++k) {
    d.state[0][k] = std::norm(field.component[0][k]);
    d.state[1][k] = std::norm(field.component[1][k]);
    d.total[k] = d.state[0][k] + d.state[1][k];
  }
  return d;
}

double left_fraction(const DensityField& density) {
  const Grid2D& g = density.grid;
  const double dx = g.dx();
  std::vector<double> weight(g.nx);
  for (int i = 0; i < g.nx; ++i) {
    const double left_edge = g.x(i) - 0.5 * dx;
    weight[i] = std::clamp((0.0 - left_edge) / dx, 0.0, 1.0);
  }
  double acc = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (weight[i] > 0.0) acc += weight[i] * density.total[g.index(i, j)];
    }
  }
  return acc * g.cell_area();
}

Moments moments(const WavefunctionField& field, double hbar) {
  const Grid2D& g = field.grid;
  Moments m;
  double norm = 0.0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      const double rho = std::norm(field.component[0][k]) + std::norm(field.component[1][k]);
      norm += rho;
      sx += rho * g.x(i);
      sy += rho * g.y(j);
      sxx += rho * g.x(i) * g.x(i);
      syy += rho * g.y(j) * g.y(j);
    }
  }
  m.position = {sx / norm, sy / norm};
  m.position_variance = {sxx / norm - m.position.x * m.position.x, syy / norm - m.position.y * m.position.y};

  Fft2D fft(g.nx, g.ny);
  double knorm = 0.0, px = 0.0, py = 0.0;
  for (int c = 0; c < 2; ++c) {
    ComplexBuffer buf = field.component[c];
    fft.forward(buf);
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const double w = std::norm(buf[g.index(i, j)]);
        knorm += w;
        px += w * g.kx(i);
        py += w * g.ky(j);
      }
    }
  }
  m.momentum = {hbar * px / knorm, hbar * py / knorm};
  return m;
}

double diabatic_energy(const WavefunctionField& field, const ModelParams& params) {
  const Grid2D& g = field.grid;
  Fft2D fft(g.nx, g.ny);
  double kinetic = 0.0, kspace_norm = 0.0;
  for (int c = 0; c < 2; ++c) {
    ComplexBuffer buf = field.component[c];
    fft.forward(buf);
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const double w = std::norm(buf[g.index(i, j)]);
        const double k2 = g.kx(i) * g.kx(i) + g.ky(j) * g.ky(j);
        kinetic += w * params.hbar * params.hbar * k2 / (2.0 * params.mass);
        kspace_norm += w;
      }
    }
  }
  double potential = 0.0, norm = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      const DiabaticMatrix v = diabatic_potential(params, {g.x(i), g.y(j)});
      const Complex a = field.component[0][k];
      const Complex b = field.component[1][k];
      potential += v.v11 * std::norm(a) + v.v22 * std::norm(b) + 2.0 * v.v12 * std::real(std::conj(a) * b);
      norm += std::norm(a) + std::norm(b);
    }
  }
  return kinetic / kspace_norm + potential / norm;
}

}  // namespace gpdyn
