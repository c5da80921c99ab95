#pragma once

// On-disk formats shared by all methods.
//
// Density dump: a text header
//
//   gpdyn-density <version>
//   method <tag>
//   representation <diabatic|adiabatic>
//   time <t>
//   nx <nx>
//   ny <ny>
//   bounds <x_min> <x_max> <y_min> <y_max>
//   encoding <text|binary>
//   fields total state0 state1
//   end_header
//
// followed by the fields in the listed order, each row-major (rows along y).
// Text encoding writes one grid row per line; binary encoding writes raw
// little-endian IEEE doubles.
//
// Time series: CSV with the header line `t,P`.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gpdyn/config.hpp"
#include "gpdyn/grid.hpp"

namespace gpdyn {

void write_density(const std::filesystem::path& path, const DensityField& density, DumpEncoding encoding);
void write_density(std::ostream& out, const DensityField& density, DumpEncoding encoding);

// Throws ConfigError on a malformed file or an unknown format version.
DensityField read_density(const std::filesystem::path& path);
DensityField read_density(std::istream& in);

struct TimeSeries {
  std::vector<double> t;
  std::vector<double> p;
};

void write_timeseries(const std::filesystem::path& path, const TimeSeries& series);
TimeSeries read_timeseries(const std::filesystem::path& path);

// File name used for a snapshot dump, e.g. density_adiabatic_t1.600.dat.
std::string density_file_name(Representation rep, double time);

}  // namespace gpdyn
