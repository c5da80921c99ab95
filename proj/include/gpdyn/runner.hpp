#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gpdyn/analysis.hpp"
#include "gpdyn/config.hpp"
#include "gpdyn/density_io.hpp"

namespace gpdyn {

struct InterferenceCurves {
  std::vector<double> x;
  std::vector<double> constructive;
  std::vector<double> destructive;
  std::vector<double> none;
};

struct MethodOutput {
  Method method = Method::quantum_diabatic;
  TimeSeries series;                              // empty for the demos
  std::vector<DensityField> snapshots;            // adiabatic-frame densities
  std::vector<DensityField> diabatic_snapshots;   // quantum-diabatic only
  nlohmann::json diagnostics = nlohmann::json::object();
  std::vector<std::string> warnings;
  std::vector<std::string> summary;
  std::optional<WindingResult> winding;
  std::optional<InterferenceCurves> interference;
};

// Runs the configured method entirely in memory. `log` receives progress
// lines when non-null.
MethodOutput simulate(const RunConfig& cfg, std::ostream* log = nullptr);

// Writes timeseries.csv, density dumps, demo tables, summary.txt and run.meta
// into cfg.output_dir (created if missing).
void write_outputs(const RunConfig& cfg, const MethodOutput& result);

// simulate + write_outputs. Nothing is written unless the run succeeds.
MethodOutput run(const RunConfig& cfg, std::ostream* log = nullptr);

struct PairStat {
  std::size_t a = 0;
  std::size_t b = 0;
  double rms = 0.0;
  double max_abs = 0.0;
};

struct CompareResult {
  std::vector<std::string> labels;
  std::vector<double> times;
  std::vector<std::vector<double>> p;  // [run][time]
  std::vector<PairStat> pairs;
  std::vector<double> snapshot_times;
  std::vector<std::vector<double>> nodal;  // [snapshot][run]
};

// RMS over the shared time grid; throws ConfigError when the grids differ.
PairStat compare_series(const TimeSeries& a, const TimeSeries& b);

CompareResult compare_runs(const std::vector<std::filesystem::path>& dirs, const NodalWindow& window = {});

void print_comparison(std::ostream& out, const CompareResult& result);

}  // namespace gpdyn
