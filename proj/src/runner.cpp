#include "gpdyn/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "gpdyn/errors.hpp"
#include "gpdyn/fft.hpp"
#include "gpdyn/qcl.hpp"
#include "gpdyn/quantum_grid.hpp"

namespace gpdyn {

using nlohmann::json;

namespace {

constexpr double kTimeMatch = 1e-9;

std::vector<long> snapshot_steps(const RunConfig& cfg) {
  std::vector<long> steps;
  for (double t : cfg.output.snapshots) steps.push_back(std::lround(t / cfg.time.dt));
  return steps;
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

double nodal_or_nan(const DensityField& d, const NodalWindow& w) {
  try {
    return nodal_metric(d, w);
  } catch (const ConfigError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void summarize_snapshots(const RunConfig& cfg, MethodOutput& out) {
  json snaps = json::array();
  for (const DensityField& d : out.snapshots) {
    const double p = left_fraction(d);
    const double nm = nodal_or_nan(d, cfg.nodal);
    snaps.push_back({{"t", d.time}, {"left_fraction", p}, {"nodal_metric", nullable(nm)}});
    out.summary.push_back("snapshot t=" + fmt(d.time, 4) + " P=" + fmt(p) + " nodal_metric=" + fmt(nm));
  }
  out.diagnostics["snapshots"] = snaps;
}

void run_diabatic(const RunConfig& cfg, MethodOutput& out, std::ostream* log) {
  PacketSpec packet{cfg.initial.center, cfg.initial.momentum, cfg.initial.resolved_sigma(cfg.model),
                    cfg.initial.state - 1, Representation::diabatic};
  WavefunctionField field = init_gaussian_packet(cfg.model, cfg.grid, packet);
  DiabaticPropagator prop(cfg.model, cfg.grid, cfg.time.dt, cfg.boundary);
  const long n_steps = cfg.time.steps();
  const auto snaps = snapshot_steps(cfg);
  const double norm0 = field.norm();
  const double energy0 = diabatic_energy(field, cfg.model);
  double max_norm_drift = 0.0;
  double max_energy_drift = 0.0;

  for (long step = 0;; ++step) {
    if (step % cfg.output.stride == 0) {
      out.series.t.push_back(step * cfg.time.dt);
      out.series.p.push_back(left_fraction(to_density(field)));
    }
    for (long s : snaps) {
      if (s != step) continue;
      DensityField dia = to_density(field);
      dia.method = to_string(cfg.method);
      out.diabatic_snapshots.push_back(dia);
      DensityField ad = to_density(to_adiabatic(field, cfg.model));
      ad.method = to_string(cfg.method);
      out.snapshots.push_back(std::move(ad));
      max_energy_drift = std::max(max_energy_drift, std::abs(diabatic_energy(field, cfg.model) - energy0));
    }
    max_norm_drift = std::max(max_norm_drift, std::abs(field.norm() - norm0));
    if (step == n_steps) break;
    prop.step(field, 1);
    if (log && (step + 1) % 250 == 0) *log << "t = " << fmt(field.time, 4) << '\n';
  }
  out.diagnostics["norm_initial"] = norm0;
  out.diagnostics["max_norm_drift"] = max_norm_drift;
  out.diagnostics["energy_initial"] = energy0;
  out.diagnostics["max_energy_drift_at_snapshots"] = max_energy_drift;
  out.diagnostics["boundary_probability_final"] = boundary_probability(field, cfg.boundary.band);
}

void run_nogp(const RunConfig& cfg, MethodOutput& out, std::ostream* log) {
  PacketSpec packet{cfg.initial.center, cfg.initial.momentum, cfg.initial.resolved_sigma(cfg.model),
                    cfg.initial.surface, Representation::adiabatic};
  WavefunctionField field = init_gaussian_packet(cfg.model, cfg.grid, packet);
  AdiabaticOptions opts = cfg.adiabatic;
  if (cfg.time.t_final > 0.0) opts.horizon = cfg.time.t_final;
  AdiabaticPropagator prop(cfg.model, cfg.grid, cfg.time.dt, opts);
  const int initial_substeps = prop.substeps();
  for (const auto& w : prop.warnings()) out.warnings.push_back(w);
  const long n_steps = cfg.time.steps();
  const auto snaps = snapshot_steps(cfg);
  const double norm0 = field.norm();
  double max_norm_drift = 0.0;

  for (long step = 0;; ++step) {
    if (step % cfg.output.stride == 0) {
      out.series.t.push_back(step * cfg.time.dt);
      out.series.p.push_back(left_fraction(to_density(field)));
    }
    for (long s : snaps) {
      if (s != step) continue;
      DensityField ad = to_density(field);
      ad.method = to_string(cfg.method);
      out.snapshots.push_back(std::move(ad));
    }
    max_norm_drift = std::max(max_norm_drift, std::abs(field.norm() - norm0));
    if (step == n_steps) break;
    prop.step(field, 1);
    if (log && (step + 1) % 250 == 0) *log << "t = " << fmt(field.time, 4) << '\n';
  }
  out.diagnostics["rk4_substeps_initial"] = initial_substeps;
  out.diagnostics["rk4_substeps_final"] = prop.substeps();
  out.diagnostics["rk4_refinements"] = prop.refinements();
  out.diagnostics["spectral_bound"] = prop.spectral_bound();
  out.diagnostics["norm_initial"] = norm0;
  out.diagnostics["max_norm_drift"] = max_norm_drift;
  out.diagnostics["population_upper_final"] = field.population(kUpperColumn);
  out.diagnostics["population_lower_final"] = field.population(kLowerColumn);
}

void run_qcl(const RunConfig& cfg, MethodOutput& out) {
  EnsembleConfig ec;
  ec.n_traj = cfg.ensemble.n_traj;
  ec.dt = cfg.time.dt;
  ec.t_final = cfg.time.t_final;
  ec.momentum_jump = cfg.method == Method::wa_qcl;
  ec.hop_cap = cfg.ensemble.hop_cap;
  ec.seed = cfg.seed;
  ec.coupling_scale = cfg.ensemble.coupling_scale;
  ec.coupling_cap = cfg.ensemble.coupling_cap;
  ec.weight_variance_alarm = cfg.ensemble.weight_variance_alarm;
  ec.workers = cfg.ensemble.workers;
  ec.histogram = cfg.ensemble.histogram;
  WignerGaussianSpec spec{cfg.initial.center, cfg.initial.momentum, cfg.initial.resolved_sigma(cfg.model),
                          cfg.initial.state - 1};
  OutputSchedule schedule{cfg.output.stride, cfg.output.snapshots};

  EnsembleResult res = run_ensemble(ec, cfg.model, spec, schedule);
  out.series.t = res.times;
  out.series.p = res.left_fraction;
  for (DensityField& d : res.snapshots) {
    d.method = to_string(cfg.method);
    out.snapshots.push_back(std::move(d));
  }
  out.warnings.insert(out.warnings.end(), res.warnings.begin(), res.warnings.end());

  double norm_dev = 0.0;
  for (double n : res.normalization) norm_dev = std::max(norm_dev, std::abs(n - 1.0));
  const EnsembleStats& st = res.stats;
  out.diagnostics["mode"] = ec.momentum_jump ? "WA-QCL (momentum jump)" : "AW-QCL (no momentum jump)";
  out.diagnostics["workers"] = ec.workers > 0 ? ec.workers : default_worker_count();
  out.diagnostics["normalization_initial"] = res.normalization.empty() ? 0.0 : res.normalization.front();
  out.diagnostics["normalization_final"] = res.normalization.empty() ? 0.0 : res.normalization.back();
  out.diagnostics["normalization_max_deviation"] = norm_dev;
  out.diagnostics["hop_attempts"] = st.attempts;
  out.diagnostics["hops"] = st.hops;
  out.diagnostics["frustrated_hops"] = st.frustrated;
  out.diagnostics["hop_cap_reached"] = st.frozen;
  out.diagnostics["dead_trajectories"] = st.dead;
  out.diagnostics["dead_weight"] = st.dead_weight;
  out.diagnostics["final_weight_mean"] = st.final_weight_mean;
  out.diagnostics["final_weight_variance"] = st.final_weight_variance;
  out.diagnostics["max_abs_weight"] = st.max_abs_weight;
}

void run_contour(const RunConfig& cfg, MethodOutput& out) {
  WindingResult w = contour_winding(cfg.model, cfg.contour);
  out.summary.push_back("winding_minus " + std::to_string(w.winding_minus));
  out.summary.push_back("winding_plus " + std::to_string(w.winding_plus));
  out.diagnostics["winding_minus"] = w.winding_minus;
  out.diagnostics["winding_plus"] = w.winding_plus;
  out.diagnostics["theta_change_minus"] = w.minus.theta.back() - w.minus.theta.front();
  out.diagnostics["theta_change_plus"] = w.plus.theta.back() - w.plus.theta.front();
  out.winding = std::move(w);
}

void run_interference(const RunConfig& cfg, MethodOutput& out) {
  const InterferenceAxis& ax = cfg.interference_axis;
  InterferenceCurves c;
  c.x.resize(ax.n);
  for (int k = 0; k < ax.n; ++k) c.x[k] = ax.min + (ax.max - ax.min) * k / (ax.n - 1);
  InterferenceSpec spec = cfg.interference;
  spec.mode = InterferenceMode::constructive;
  c.constructive = interference_demo(spec, c.x);
  spec.mode = InterferenceMode::destructive;
  c.destructive = interference_demo(spec, c.x);
  spec.mode = InterferenceMode::none;
  c.none = interference_demo(spec, c.x);

  const double mid = 0.5 * (cfg.interference.g1.center + cfg.interference.g2.center);
  const double mid_axis[] = {mid};
  spec.mode = cfg.interference.mode;
  const double selected = interference_demo(spec, mid_axis)[0];
  const double g = cfg.interference.g1(mid);
  out.summary.push_back("midpoint x=" + fmt(mid, 8) + " density=" + fmt(selected, 17) + " |g1(mid)|^2=" +
                        fmt(g * g, 17));
  out.diagnostics["midpoint"] = mid;
  out.diagnostics["midpoint_density"] = selected;
  out.interference = std::move(c);
}

void write_contour_csv(const std::filesystem::path& path, const WindingResult& w) {
  std::ofstream out(path);
  if (!out) throw RuntimeAbort("cannot create " + path.string());
  out << "phi,x_minus,y_minus,theta_minus,x_plus,y_plus,theta_plus\n" << std::setprecision(17);
  for (std::size_t k = 0; k < w.minus.phi.size(); ++k) {
    out << w.minus.phi[k] << ',' << w.minus.points[k].x << ',' << w.minus.points[k].y << ',' << w.minus.theta[k]
        << ',' << w.plus.points[k].x << ',' << w.plus.points[k].y << ',' << w.plus.theta[k] << '\n';
  }
}

void write_interference_csv(const std::filesystem::path& path, const InterferenceCurves& c) {
  std::ofstream out(path);
  if (!out) throw RuntimeAbort("cannot create " + path.string());
  out << "x,constructive,destructive,none\n" << std::setprecision(17);
  for (std::size_t k = 0; k < c.x.size(); ++k) {
    out << c.x[k] << ',' << c.constructive[k] << ',' << c.destructive[k] << ',' << c.none[k] << '\n';
  }
}

}  // namespace

MethodOutput simulate(const RunConfig& cfg, std::ostream* log) {
  cfg.validate();
  MethodOutput out;
  out.method = cfg.method;
  const auto start = std::chrono::steady_clock::now();
  if (log) *log << "running " << to_string(cfg.method) << '\n';
  switch (cfg.method) {
    case Method::quantum_diabatic:
      run_diabatic(cfg, out, log);
      break;
    case Method::quantum_adiabatic_nogp:
      run_nogp(cfg, out, log);
      break;
    case Method::wa_qcl:
    case Method::aw_qcl:
      run_qcl(cfg, out);
      break;
    case Method::contour_demo:
      run_contour(cfg, out);
      break;
    case Method::interference_demo:
      run_interference(cfg, out);
      break;
  }
  if (!out.series.t.empty()) {
    out.summary.insert(out.summary.begin(), "P(0)=" + fmt(out.series.p.front()) + " P(" +
                                                fmt(out.series.t.back(), 4) + ")=" + fmt(out.series.p.back()));
    summarize_snapshots(cfg, out);
  }
  out.diagnostics["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.diagnostics["warnings"] = out.warnings;
  return out;
}

void write_outputs(const RunConfig& cfg, const MethodOutput& result) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw RuntimeAbort("cannot create output directory " + cfg.output_dir.string() + ": " + ec.message());

  json files = json::array();
  if (!result.series.t.empty()) {
    write_timeseries(cfg.output_dir / "timeseries.csv", result.series);
    files.push_back("timeseries.csv");
  }
  for (const DensityField& d : result.diabatic_snapshots) {
    const std::string name = density_file_name(Representation::diabatic, d.time);
    write_density(cfg.output_dir / name, d, cfg.output.encoding);
    files.push_back(name);
  }
  for (const DensityField& d : result.snapshots) {
    const std::string name = density_file_name(Representation::adiabatic, d.time);
    write_density(cfg.output_dir / name, d, cfg.output.encoding);
    files.push_back(name);
  }
  if (result.winding) {
    write_contour_csv(cfg.output_dir / "contour.csv", *result.winding);
    files.push_back("contour.csv");
  }
  if (result.interference) {
    write_interference_csv(cfg.output_dir / "interference.csv", *result.interference);
    files.push_back("interference.csv");
  }
  {
    std::ofstream out(cfg.output_dir / "summary.txt");
    out << "# gpdyn summary " << kFormatVersion << '\n';
    for (const auto& line : result.summary) out << line << '\n';
    files.push_back("summary.txt");
  }

  json meta;
  meta["format_version"] = kFormatVersion;
  meta["generator"] = "gpdyn 1.0.0";
  meta["method"] = to_string(cfg.method);
  meta["seed"] = cfg.seed;
  meta["gaussian_convention"] = "exp(-|r - r0|^2 / sigma^2)";
  meta["adiabatic_columns"] = {"upper (W+)", "lower (W-)"};
  meta["config"] = to_json(cfg);
  if (cfg.method == Method::quantum_diabatic || cfg.method == Method::quantum_adiabatic_nogp) {
    meta["fft_wisdom"] = export_fft_wisdom();
  }
  meta["diagnostics"] = result.diagnostics;
  meta["files"] = files;
  std::ofstream out(cfg.output_dir / "run.meta");
  if (!out) throw RuntimeAbort("cannot create run.meta");
  out << meta.dump(2) << '\n';
}

MethodOutput run(const RunConfig& cfg, std::ostream* log) {
  MethodOutput result = simulate(cfg, log);
  write_outputs(cfg, result);
  return result;
}

PairStat compare_series(const TimeSeries& a, const TimeSeries& b) {
  if (a.t.size() != b.t.size()) throw ConfigError("schedule mismatch: time series have different lengths");
  PairStat s;
  double sum = 0.0;
  for (std::size_t k = 0; k < a.t.size(); ++k) {
    if (std::abs(a.t[k] - b.t[k]) > kTimeMatch) {
      throw ConfigError("schedule mismatch at sample " + std::to_string(k) + ": t=" + fmt(a.t[k], 10) +
                        " vs t=" + fmt(b.t[k], 10));
    }
    const double d = a.p[k] - b.p[k];
    sum += d * d;
    s.max_abs = std::max(s.max_abs, std::abs(d));
  }
  s.rms = a.t.empty() ? 0.0 : std::sqrt(sum / static_cast<double>(a.t.size()));
  return s;
}

CompareResult compare_runs(const std::vector<std::filesystem::path>& dirs, const NodalWindow& window) {
  if (dirs.empty()) throw ConfigError("compare needs at least one run directory");
  CompareResult res;
  std::vector<TimeSeries> series;
  std::vector<std::vector<double>> snaps;
  std::vector<std::filesystem::path> roots;
  for (const auto& dir : dirs) {
    const auto meta_path = dir / "run.meta";
    std::ifstream in(meta_path);
    if (!in) throw ConfigError("cannot open " + meta_path.string());
    json meta;
    try {
      meta = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(meta_path.string() + " is not valid JSON: " + e.what());
    }
    if (!meta.contains("format_version") || meta["format_version"] != kFormatVersion) {
      throw ConfigError(meta_path.string() + ": unsupported format_version");
    }
    const RunConfig cfg = parse_config(meta);
    if (cfg.method == Method::contour_demo || cfg.method == Method::interference_demo) {
      throw ConfigError(dir.string() + " holds a demo run without a time series");
    }
    series.push_back(read_timeseries(dir / "timeseries.csv"));
    snaps.push_back(cfg.output.snapshots);
    roots.push_back(dir);
    std::string label = dir.filename().string();
    if (label.empty()) label = dir.parent_path().filename().string();
    res.labels.push_back(label + ":" + to_string(cfg.method));
  }

  res.times = series.front().t;
  for (std::size_t r = 0; r < series.size(); ++r) {
    if (r > 0) compare_series(series.front(), series[r]);
    res.p.push_back(series[r].p);
  }
  for (std::size_t a = 0; a < series.size(); ++a) {
    for (std::size_t b = a + 1; b < series.size(); ++b) {
      PairStat s = compare_series(series[a], series[b]);
      s.a = a;
      s.b = b;
      res.pairs.push_back(s);
    }
  }

  // Snapshot times present in every run.
  for (double t : snaps.front()) {
    bool everywhere = true;
    for (const auto& list : snaps) {
      everywhere = everywhere && std::any_of(list.begin(), list.end(), [&](double u) {
                     return std::abs(u - t) < kTimeMatch;
                   });
    }
    if (!everywhere) continue;
    std::vector<double> row;
    for (const auto& root : roots) {
      auto path = root / density_file_name(Representation::adiabatic, t);
      if (!std::filesystem::exists(path)) path = root / density_file_name(Representation::diabatic, t);
      row.push_back(nodal_or_nan(read_density(path), window));
    }
    res.snapshot_times.push_back(t);
    res.nodal.push_back(std::move(row));
  }
  return res;
}

void print_comparison(std::ostream& out, const CompareResult& r) {
  out << std::setprecision(10);
  out << 't';
  for (const auto& l : r.labels) out << ',' << l;
  out << '\n';
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    out << r.times[k];
    for (const auto& col : r.p) out << ',' << col[k];
    out << '\n';
  }
  out << "\npair,rms,max_abs\n";
  for (const auto& s : r.pairs) out << r.labels[s.a] << " vs " << r.labels[s.b] << ',' << s.rms << ',' << s.max_abs << '\n';
  out << "\nsnapshot_t";
  for (const auto& l : r.labels) out << ",nodal_metric " << l;
  out << '\n';
  for (std::size_t k = 0; k < r.snapshot_times.size(); ++k) {
    out << r.snapshot_times[k];
    for (double v : r.nodal[k]) out << ',' << v;
    out << '\n';
  }
}

}  // namespace gpdyn
