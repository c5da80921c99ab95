#include "gpdyn/grid.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "gpdyn/errors.hpp"

namespace gpdyn {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

double wavenumber(int i, int n, double length) {
  const int shifted = i < n / 2 ? i : i - n;
  return 2.0 * std::numbers::pi * shifted / length;
}

}  // namespace

void Grid2D::validate(const std::string& prefix) const {
  if (!is_power_of_two(nx) || nx < 64) {
    throw ConfigError(prefix + ".nx must be a power of two >= 64 (got " + std::to_string(nx) + ")");
  }
  if (!is_power_of_two(ny) || ny < 64) {
    throw ConfigError(prefix + ".ny must be a power of two >= 64 (got " + std::to_string(ny) + ")");
  }
  if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
    throw ConfigError(prefix + ".x_max must exceed " + prefix + ".x_min");
  }
  if (!(y_max > y_min) || !std::isfinite(y_min) || !std::isfinite(y_max)) {
    throw ConfigError(prefix + ".y_max must exceed " + prefix + ".y_min");
  }
  // A node sits on the origin only if some x_i and some y_j both vanish.
  const double fx = (0.0 - x_min) / dx() - 0.5;
  const double fy = (0.0 - y_min) / dy() - 0.5;
  const bool x_hit = std::abs(fx - std::round(fx)) < 1e-9 && fx >= 0 && fx < nx;
  const bool y_hit = std::abs(fy - std::round(fy)) < 1e-9 && fy >= 0 && fy < ny;
  if (x_hit && y_hit) {
    throw ConfigError(prefix + " places a node on the conical intersection (0,0); shift the bounds by half a cell");
  }
}

double Grid2D::kx(int i) const { return wavenumber(i, nx, x_max - x_min); }
double Grid2D::ky(int j) const { return wavenumber(j, ny, y_max - y_min); }

const char* to_string(Representation rep) {
  return rep == Representation::diabatic ? "diabatic" : "adiabatic";
}

WavefunctionField::WavefunctionField(const Grid2D& g, Representation rep)
    : grid(g), representation(rep), component{ComplexBuffer(g.size()), ComplexBuffer(g.size())} {}

double WavefunctionField::population(int comp) const {
  double acc = 0.0;
  for (const Complex& v : component[comp]) acc += std::norm(v);
  return acc * grid.cell_area();
}

double WavefunctionField::norm() const { return population(0) + population(1); }

DensityField::DensityField(const Grid2D& g, double t)
    : grid(g), time(t), state{std::vector<double>(g.size()), std::vector<double>(g.size())}, total(g.size()) {}

double DensityField::integral() const {
  return std::accumulate(total.begin(), total.end(), 0.0) * grid.cell_area();
}

}  // namespace gpdyn
