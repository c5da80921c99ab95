#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpdyn/analysis.hpp"
#include "gpdyn/grid.hpp"
#include "gpdyn/lvc_model.hpp"
#include "gpdyn/quantum_grid.hpp"

namespace gpdyn {

inline constexpr int kFormatVersion = 1;

enum class Method { quantum_diabatic, quantum_adiabatic_nogp, wa_qcl, aw_qcl, contour_demo, interference_demo };

const char* to_string(Method m);
Method parse_method(const std::string& s);  // throws ConfigError

enum class DumpEncoding { text, binary };

struct InitialCondition {
  Vec2 center{-0.5, 0.0};
  Vec2 momentum{2.5, 0.0};
  std::optional<double> sigma;  // default sqrt(2 hbar / (M omega))
  int state = 1;                // diabatic state 1 or 2
  int surface = kLowerColumn;   // adiabatic column for quantum-adiabatic-nogp

  double resolved_sigma(const ModelParams& p) const;
};

struct TimeSpec {
  double dt = 0.002;
  double t_final = 3.0;

  long steps() const;
};

struct OutputSpec {
  int stride = 5;
  std::vector<double> snapshots{0.0, 0.8, 1.3, 1.6, 2.4, 3.0};
  DumpEncoding encoding = DumpEncoding::text;
};

struct EnsembleSpec {
  std::size_t n_traj = 100000;
  int hop_cap = 8;
  double coupling_scale = 1.0;
  double coupling_cap = 1e6;
  double weight_variance_alarm = 1e4;
  unsigned workers = 0;
  Grid2D histogram{64, 64, -8.0, 8.0, -8.0, 8.0};
};

struct InterferenceAxis {
  double min = -6.0;
  double max = 6.0;
  int n = 1201;
};

struct RunConfig {
  Method method = Method::quantum_diabatic;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 20140611;
  ModelParams model;
  InitialCondition initial;
  Grid2D grid;
  TimeSpec time;
  OutputSpec output;
  EnsembleSpec ensemble;
  AdiabaticOptions adiabatic;
  BoundaryGuard boundary;
  ContourSpec contour;
  InterferenceSpec interference;
  InterferenceAxis interference_axis;
  NodalWindow nodal;

  // Full field-level validation; throws ConfigError naming the field.
  void validate() const;
};

// Parses a JSON run configuration. Unknown keys are rejected. A `run.meta`
// file is accepted as well: its embedded "config" object is used.
// Relative output directories resolve against `base_dir`.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

// Complete, explicit serialization (every field, all defaults resolved).
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace gpdyn
