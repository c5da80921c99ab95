#include "gpdyn/density_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "gpdyn/errors.hpp"

namespace gpdyn {

namespace {

constexpr const char* kMagic = "gpdyn-density";

void put_le(std::ostream& out, double v) {
  unsigned char bytes[8];
  std::memcpy(bytes, &v, 8);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + 8);
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

double get_le(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw ConfigError("density dump truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + 8);
  double v;
  std::memcpy(&v, bytes, 8);
  return v;
}

std::string expect_line(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("density dump header ends before '" + key + "'");
  if (line.rfind(key + " ", 0) != 0) throw ConfigError("density dump: expected '" + key + "', got '" + line + "'");
  return line.substr(key.size() + 1);
}

double to_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("cannot parse ") + what + " '" + s + "'");
  }
}

}  // namespace

std::string density_file_name(Representation rep, double time) {
  std::ostringstream name;
  name << "density_" << to_string(rep) << "_t" << std::fixed << std::setprecision(3) << time << ".dat";
  return name.str();
}

void write_density(std::ostream& out, const DensityField& d, DumpEncoding encoding) {
  const Grid2D& g = d.grid;
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "method " << (d.method.empty() ? "unknown" : d.method) << '\n';
  out << "representation " << (d.representation.empty() ? "diabatic" : d.representation) << '\n';
  out << std::setprecision(17);
  out << "time " << d.time << '\n';
  out << "nx " << g.nx << '\n' << "ny " << g.ny << '\n';
  out << "bounds " << g.x_min << ' ' << g.x_max << ' ' << g.y_min << ' ' << g.y_max << '\n';
  out << "encoding " << (encoding == DumpEncoding::text ? "text" : "binary") << '\n';
  out << "fields total state0 state1\n";
  out << "end_header\n";
  const std::vector<double>* fields[] = {&d.total, &d.state[0], &d.state[1]};
  for (const auto* f : fields) {
    if (f->size() != g.size()) throw RuntimeAbort("density field size does not match its grid");
    if (encoding == DumpEncoding::binary) {
      for (double v : *f) put_le(out, v);
      continue;
    }
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        if (i > 0) out << ' ';
        out << (*f)[g.index(i, j)];
      }
      out << '\n';
    }
  }
  if (!out) throw RuntimeAbort("failed writing density dump");
}

void write_density(const std::filesystem::path& path, const DensityField& density, DumpEncoding encoding) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeAbort("cannot create " + path.string());
  write_density(out, density, encoding);
}

DensityField read_density(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(std::string(kMagic) + " ", 0) != 0) {
    throw ConfigError("not a density dump (missing gpdyn-density header)");
  }
  const std::string version = line.substr(std::strlen(kMagic) + 1);
  if (version != std::to_string(kFormatVersion)) {
    throw ConfigError("unsupported density dump version " + version);
  }
  DensityField d;
  d.method = expect_line(in, "method");
  d.representation = expect_line(in, "representation");
  d.time = to_double(expect_line(in, "time"), "time");
  Grid2D g;
  g.nx = static_cast<int>(to_double(expect_line(in, "nx"), "nx"));
  g.ny = static_cast<int>(to_double(expect_line(in, "ny"), "ny"));
  {
    std::istringstream b(expect_line(in, "bounds"));
    if (!(b >> g.x_min >> g.x_max >> g.y_min >> g.y_max)) throw ConfigError("cannot parse density dump bounds");
  }
  if (g.nx < 1 || g.ny < 1 || g.nx > (1 << 16) || g.ny > (1 << 16)) throw ConfigError("bad density dump size");
  const std::string encoding = expect_line(in, "encoding");
  if (encoding != "text" && encoding != "binary") throw ConfigError("unknown density encoding " + encoding);
  if (expect_line(in, "fields") != "total state0 state1") throw ConfigError("unexpected density field list");
  if (!std::getline(in, line) || line != "end_header") throw ConfigError("density dump header not terminated");

  d.grid = g;
  std::vector<double>* fields[] = {&d.total, &d.state[0], &d.state[1]};
  for (auto* f : fields) {
    f->resize(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (encoding == "binary") {
        (*f)[k] = get_le(in);
      } else if (!(in >> (*f)[k])) {
        throw ConfigError("density dump truncated");
      }
    }
  }
  return d;
}

DensityField read_density(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  return read_density(in);
}

void write_timeseries(const std::filesystem::path& path, const TimeSeries& series) {
  std::ofstream out(path);
  if (!out) throw RuntimeAbort("cannot create " + path.string());
  out << "t,P\n" << std::setprecision(17);
  for (std::size_t k = 0; k < series.t.size(); ++k) out << series.t[k] << ',' << series.p[k] << '\n';
  if (!out) throw RuntimeAbort("failed writing " + path.string());
}

TimeSeries read_timeseries(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "t,P") throw ConfigError(path.string() + ": expected header 't,P'");
  TimeSeries s;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError(path.string() + ": malformed row '" + line + "'");
    s.t.push_back(to_double(line.substr(0, comma), "time"));
    s.p.push_back(to_double(line.substr(comma + 1), "P"));
  }
  return s;
}

}  // namespace gpdyn
