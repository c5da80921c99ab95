#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "gpdyn/fft_buffer.hpp"

namespace gpdyn {

// Uniform 2D grid with nodes at cell centres: x_i = x_min + (i + 1/2) dx.
// For symmetric bounds this puts the origin on a cell corner, never on a node.
struct Grid2D {
  int nx = 256;
  int ny = 256;
  double x_min = -8.0;
  double x_max = 8.0;
  double y_min = -8.0;
  double y_max = 8.0;

  // Spectral grids: power-of-two sizes >= 64, ordered bounds, and no node on
  // the conical intersection. Throws ConfigError naming the field.
  void validate(const std::string& prefix = "grid") const;

  double dx() const { return (x_max - x_min) / nx; }
  double dy() const { return (y_max - y_min) / ny; }
  double cell_area() const { return dx() * dy(); }
  double x(int i) const { return x_min + (i + 0.5) * dx(); }
  double y(int j) const { return y_min + (j + 0.5) * dy(); }
  // Angular wavenumbers in FFT storage order.
  double kx(int i) const;
  double ky(int j) const;
  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  // Row-major storage: rows run along y, columns along x.
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;
};

enum class Representation { diabatic, adiabatic };

const char* to_string(Representation rep);

// Two-component nuclear amplitude on a grid. In the adiabatic representation
// the components follow the column order of U(theta): 0 -> W+, 1 -> W-.
struct WavefunctionField {
  Grid2D grid;
  Representation representation = Representation::diabatic;
  std::array<ComplexBuffer, 2> component;
  double time = 0.0;

  WavefunctionField() = default;
  WavefunctionField(const Grid2D& g, Representation rep);

  double norm() const;
  double population(int comp) const;
};

struct DensityField {
  Grid2D grid;
  double time = 0.0;
  std::string method;
  std::string representation;
  std::array<std::vector<double>, 2> state;
  std::vector<double> total;

  DensityField() = default;
  DensityField(const Grid2D& g, double t);

  double integral() const;
};

}  // namespace gpdyn
