#include "gpdyn/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "gpdyn/errors.hpp"
#include "gpdyn/fft.hpp"

namespace gpdyn {

using nlohmann::json;

namespace {

struct MethodName {
  Method method;
  const char* name;
};

constexpr MethodName kMethods[] = {
    {Method::quantum_diabatic, "quantum-diabatic"}, {Method::quantum_adiabatic_nogp, "quantum-adiabatic-nogp"},
    {Method::wa_qcl, "wa-qcl"},                     {Method::aw_qcl, "aw-qcl"},
    {Method::contour_demo, "contour-demo"},         {Method::interference_demo, "interference-demo"},
};

// Reads one JSON object, tracking which keys were consumed so leftovers can
// be reported as unknown fields.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_ + " must be an object");
  }

  bool has(const char* key) const { return node_.contains(key); }

  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* get(const char* key) {
    seen_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() || it->is_null() ? nullptr : &*it;
  }

  void number(const char* key, double& out) {
    if (const json* v = get(key)) {
      if (!v->is_number()) throw ConfigError(field(key) + " must be a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError(field(key) + " must be finite");
    }
  }

  void optional_number(const char* key, std::optional<double>& out) {
    if (has(key) && node_.at(key).is_null()) {
      seen_.insert(key);
      out.reset();
      return;
    }
    if (has(key)) {
      double v = 0.0;
      number(key, v);
      out = v;
    }
  }

  template <class Int>
  void integer(const char* key, Int& out) {
    if (const json* v = get(key)) {
      if (v->is_number_integer() || v->is_number_unsigned()) {
        if constexpr (std::is_unsigned_v<Int>) {
          if (v->is_number_integer() && v->get<long long>() < 0) throw ConfigError(field(key) + " must be >= 0");
        }
        out = v->get<Int>();
      } else if (v->is_number_float() && std::floor(v->get<double>()) == v->get<double>()) {
        if constexpr (std::is_unsigned_v<Int>) {
          if (v->get<double>() < 0) throw ConfigError(field(key) + " must be >= 0");
        }
        out = static_cast<Int>(v->get<double>());
      } else {
        throw ConfigError(field(key) + " must be an integer");
      }
    }
  }

  void boolean(const char* key, bool& out) {
    if (const json* v = get(key)) {
      if (!v->is_boolean()) throw ConfigError(field(key) + " must be true or false");
      out = v->get<bool>();
    }
  }

  void string(const char* key, std::string& out) {
    if (const json* v = get(key)) {
      if (!v->is_string()) throw ConfigError(field(key) + " must be a string");
      out = v->get<std::string>();
    }
  }

  void vec2(const char* key, Vec2& out) {
    if (const json* v = get(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
        throw ConfigError(field(key) + " must be a two-element numeric array");
      }
      out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
      if (!std::isfinite(out.x) || !std::isfinite(out.y)) throw ConfigError(field(key) + " must be finite");
    }
  }

  void number_list(const char* key, std::vector<double>& out) {
    if (const json* v = get(key)) {
      if (!v->is_array()) throw ConfigError(field(key) + " must be an array of numbers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number()) throw ConfigError(field(key) + " must be an array of numbers");
        out.push_back(e.get<double>());
      }
    }
  }

  std::optional<Section> child(const char* key) {
    if (const json* v = get(key)) return Section(*v, field(key));
    return std::nullopt;
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown field " + field(it.key().c_str()));
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_grid(Section& s, Grid2D& g) {
  s.integer("nx", g.nx);
  s.integer("ny", g.ny);
  s.number("x_min", g.x_min);
  s.number("x_max", g.x_max);
  s.number("y_min", g.y_min);
  s.number("y_max", g.y_max);
  s.finish();
}

json grid_json(const Grid2D& g) {
  return {{"nx", g.nx}, {"ny", g.ny}, {"x_min", g.x_min}, {"x_max", g.x_max}, {"y_min", g.y_min}, {"y_max", g.y_max}};
}

void read_gaussian(Section& s, Gaussian1D& g) {
  s.number("center", g.center);
  s.number("width", g.width);
  s.number("amplitude", g.amplitude);
  s.finish();
}

json gaussian_json(const Gaussian1D& g) {
  return {{"center", g.center}, {"width", g.width}, {"amplitude", g.amplitude}};
}

const char* mode_name(InterferenceMode m) {
  switch (m) {
    case InterferenceMode::constructive:
      return "constructive";
    case InterferenceMode::destructive:
      return "destructive";
    case InterferenceMode::none:
      break;
  }
  return "none";
}

bool bad_substep_cap(int m) { return m < 1 || m > 4096; }

bool on_step(double t, double dt) {
  const double k = t / dt;
  return std::abs(k - std::round(k)) < 1e-6;
}

}  // namespace

const char* to_string(Method m) {
  for (const auto& e : kMethods) {
    if (e.method == m) return e.name;
  }
  return "unknown";
}

Method parse_method(const std::string& s) {
  for (const auto& e : kMethods) {
    if (s == e.name) return e.method;
  }
  throw ConfigError("method must be one of quantum-diabatic, quantum-adiabatic-nogp, wa-qcl, aw-qcl, "
                    "contour-demo, interference-demo (got '" + s + "')");
}

double InitialCondition::resolved_sigma(const ModelParams& p) const {
  return sigma ? *sigma : std::sqrt(2.0 * p.hbar / (p.mass * p.omega));
}

long TimeSpec::steps() const { return std::lround(t_final / dt); }

void RunConfig::validate() const {
  model.validate();
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");

  if (method == Method::contour_demo) {
    contour.validate();
    return;
  }
  if (method == Method::interference_demo) {
    interference.validate();
    if (interference_axis.n < 2) throw ConfigError("interference.axis.n must be >= 2");
    if (!(interference_axis.max > interference_axis.min)) {
      throw ConfigError("interference.axis.max must exceed interference.axis.min");
    }
    return;
  }

  if (initial.sigma && !(*initial.sigma > 0.0)) throw ConfigError("initial.sigma must be positive");
  if (initial.state != 1 && initial.state != 2) throw ConfigError("initial.state must be 1 or 2");
  if (!(time.dt > 0.0)) throw ConfigError("time.dt must be positive");
  if (!(time.t_final >= 0.0)) throw ConfigError("time.t_final must be >= 0");
  if (!on_step(time.t_final, time.dt)) throw ConfigError("time.t_final must be a whole number of time.dt steps");
  if (output.stride < 1) throw ConfigError("output.stride must be >= 1");
  for (double t : output.snapshots) {
    if (t < 0.0 || t > time.t_final + 1e-12) {
      throw ConfigError("output.snapshots entry " + std::to_string(t) + " lies outside [0, time.t_final]");
    }
    if (!on_step(t, time.dt)) {
      throw ConfigError("output.snapshots entry " + std::to_string(t) + " is not a whole number of time.dt steps");
    }
  }
  if (!(nodal.x_hi > nodal.x_lo)) throw ConfigError("nodal.x_hi must exceed nodal.x_lo");
  if (!(nodal.off_axis >= 0.0)) throw ConfigError("nodal.off_axis must be >= 0");

  if (method == Method::wa_qcl || method == Method::aw_qcl) {
    if (ensemble.n_traj < 1) throw ConfigError("ensemble.n_traj must be >= 1");
    if (ensemble.hop_cap < 0) throw ConfigError("ensemble.hop_cap must be >= 0");
    if (!(ensemble.coupling_cap > 0.0)) throw ConfigError("ensemble.coupling_cap must be positive");
    if (!(ensemble.weight_variance_alarm > 0.0)) throw ConfigError("ensemble.weight_variance_alarm must be positive");
    ensemble.histogram.validate("ensemble.histogram");
    return;
  }

  grid.validate("grid");
  if (boundary.band < 1 || 2 * boundary.band >= std::min(grid.nx, grid.ny)) {
    throw ConfigError("boundary.band must be >= 1 and smaller than half the grid");
  }
  if (!(boundary.tolerance > 0.0)) throw ConfigError("boundary.tolerance must be positive");
  if (boundary.check_interval < 1) throw ConfigError("boundary.check_interval must be >= 1");
  if (method == Method::quantum_adiabatic_nogp) {
    if (initial.surface != kUpperColumn && initial.surface != kLowerColumn) {
      throw ConfigError("initial.surface must be 'lower' or 'upper'");
    }
    if (!(adiabatic.coupling_cap > 0.0)) throw ConfigError("adiabatic.coupling_cap must be positive");
    if (!(adiabatic.norm_tolerance > 0.0)) throw ConfigError("adiabatic.norm_tolerance must be positive");
    if (!(adiabatic.stability_factor > 0.0) || adiabatic.stability_factor > 2.8) {
      throw ConfigError("adiabatic.stability_factor must lie in (0, 2.8]");
    }
    if (bad_substep_cap(adiabatic.max_substeps)) throw ConfigError("adiabatic.max_substeps must lie in [1, 4096]");
    if (!(adiabatic.guard.tolerance > 0.0)) throw ConfigError("adiabatic.boundary_tolerance must be positive");
  }
}

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  const json* root = &doc;
  if (doc.contains("config") && doc.contains("diagnostics")) {
    // run.meta: verify the container version, then read the embedded config.
    if (!doc.contains("format_version") || doc["format_version"] != kFormatVersion) {
      throw ConfigError("unsupported run.meta format_version (expected " + std::to_string(kFormatVersion) + ")");
    }
    root = &doc["config"];
  }

  RunConfig cfg;
  Section top(*root, "");

  int version = kFormatVersion;
  top.integer("format_version", version);
  if (version != kFormatVersion) {
    throw ConfigError("format_version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kFormatVersion) + ")");
  }

  std::string method;
  if (!top.has("method")) throw ConfigError("method is required");
  top.string("method", method);
  cfg.method = parse_method(method);

  std::string out_dir;
  top.string("output_dir", out_dir);
  if (top.has("output_dir")) cfg.output_dir = out_dir;
  if (cfg.output_dir.is_relative() && !base_dir.empty()) cfg.output_dir = base_dir / cfg.output_dir;
  cfg.output_dir = cfg.output_dir.lexically_normal();

  top.integer("seed", cfg.seed);

  if (auto s = top.child("model")) {
    s->number("omega", cfg.model.omega);
    s->number("a", cfg.model.a);
    s->number("c", cfg.model.c);
    s->number("mass", cfg.model.mass);
    s->number("hbar", cfg.model.hbar);
    s->finish();
  }

  // Defaults follow the model: the packet sits in well 1.
  cfg.initial.center = {-0.5 * cfg.model.a, 0.0};
  if (auto s = top.child("initial")) {
    s->vec2("center", cfg.initial.center);
    s->vec2("momentum", cfg.initial.momentum);
    s->optional_number("sigma", cfg.initial.sigma);
    s->integer("state", cfg.initial.state);
    std::string surface = cfg.initial.surface == kLowerColumn ? "lower" : "upper";
    s->string("surface", surface);
    if (surface == "lower") {
      cfg.initial.surface = kLowerColumn;
    } else if (surface == "upper") {
      cfg.initial.surface = kUpperColumn;
    } else {
      throw ConfigError("initial.surface must be 'lower' or 'upper'");
    }
    s->finish();
  }

  if (auto s = top.child("grid")) read_grid(*s, cfg.grid);

  if (auto s = top.child("time")) {
    s->number("dt", cfg.time.dt);
    s->number("t_final", cfg.time.t_final);
    s->finish();
  }

  if (auto s = top.child("output")) {
    s->integer("stride", cfg.output.stride);
    s->number_list("snapshots", cfg.output.snapshots);
    std::string enc = "text";
    s->string("encoding", enc);
    if (enc == "text") {
      cfg.output.encoding = DumpEncoding::text;
    } else if (enc == "binary") {
      cfg.output.encoding = DumpEncoding::binary;
    } else {
      throw ConfigError("output.encoding must be 'text' or 'binary'");
    }
    s->finish();
  }

  if (auto s = top.child("ensemble")) {
    s->integer("n_traj", cfg.ensemble.n_traj);
    s->integer("hop_cap", cfg.ensemble.hop_cap);
    s->number("coupling_scale", cfg.ensemble.coupling_scale);
    s->number("coupling_cap", cfg.ensemble.coupling_cap);
    s->number("weight_variance_alarm", cfg.ensemble.weight_variance_alarm);
    s->integer("workers", cfg.ensemble.workers);
    if (auto h = s->child("histogram")) read_grid(*h, cfg.ensemble.histogram);
    s->finish();
  }

  if (auto s = top.child("adiabatic")) {
    s->number("coupling_cap", cfg.adiabatic.coupling_cap);
    s->number("norm_tolerance", cfg.adiabatic.norm_tolerance);
    s->boolean("zero_couplings", cfg.adiabatic.zero_couplings);
    s->number("stability_factor", cfg.adiabatic.stability_factor);
    s->integer("max_substeps", cfg.adiabatic.max_substeps);
    s->number("boundary_tolerance", cfg.adiabatic.guard.tolerance);
    s->finish();
  }

  if (auto s = top.child("boundary")) {
    s->number("tolerance", cfg.boundary.tolerance);
    s->integer("band", cfg.boundary.band);
    s->integer("check_interval", cfg.boundary.check_interval);
    s->finish();
  }
  cfg.adiabatic.guard.band = cfg.boundary.band;
  cfg.adiabatic.guard.check_interval = cfg.boundary.check_interval;

  if (auto s = top.child("contour")) {
    Vec2 zc{cfg.contour.z_c.real(), cfg.contour.z_c.imag()};
    s->vec2("z_c", zc);
    cfg.contour.z_c = {zc.x, zc.y};
    s->number("d", cfg.contour.d);
    s->number("r", cfg.contour.r);
    s->integer("n_phi", cfg.contour.n_phi);
    s->finish();
  }

  if (auto s = top.child("interference")) {
    if (auto g = s->child("g1")) read_gaussian(*g, cfg.interference.g1);
    if (auto g = s->child("g2")) read_gaussian(*g, cfg.interference.g2);
    std::string mode = mode_name(cfg.interference.mode);
    s->string("mode", mode);
    if (mode == "constructive") {
      cfg.interference.mode = InterferenceMode::constructive;
    } else if (mode == "destructive") {
      cfg.interference.mode = InterferenceMode::destructive;
    } else if (mode == "none") {
      cfg.interference.mode = InterferenceMode::none;
    } else {
      throw ConfigError("interference.mode must be constructive, destructive or none");
    }
    if (auto a = s->child("axis")) {
      a->number("min", cfg.interference_axis.min);
      a->number("max", cfg.interference_axis.max);
      a->integer("n", cfg.interference_axis.n);
      a->finish();
    }
    s->finish();
  }

  if (auto s = top.child("nodal")) {
    s->number("x_lo", cfg.nodal.x_lo);
    s->number("x_hi", cfg.nodal.x_hi);
    s->number("off_axis", cfg.nodal.off_axis);
    s->finish();
  }

  top.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("configuration " + path.string() + " is not valid JSON: " + e.what());
  }
  RunConfig cfg = parse_config(doc, std::filesystem::absolute(path).parent_path());
  // Re-running from run.meta: reuse the FFT plans of the original run.
  if (doc.contains("fft_wisdom") && doc["fft_wisdom"].is_string()) {
    if (!import_fft_wisdom(doc["fft_wisdom"].get<std::string>())) {
      throw ConfigError("run.meta carries unreadable fft_wisdom");
    }
  }
  return cfg;
}

json to_json(const RunConfig& cfg) {
  json j;
  j["format_version"] = kFormatVersion;
  j["method"] = to_string(cfg.method);
  j["output_dir"] = cfg.output_dir.string();
  j["seed"] = cfg.seed;
  j["model"] = {{"omega", cfg.model.omega},
                {"a", cfg.model.a},
                {"c", cfg.model.c},
                {"mass", cfg.model.mass},
                {"hbar", cfg.model.hbar}};
  j["initial"] = {{"center", {cfg.initial.center.x, cfg.initial.center.y}},
                  {"momentum", {cfg.initial.momentum.x, cfg.initial.momentum.y}},
                  {"sigma", cfg.initial.resolved_sigma(cfg.model)},
                  {"state", cfg.initial.state},
                  {"surface", cfg.initial.surface == kLowerColumn ? "lower" : "upper"}};
  j["grid"] = grid_json(cfg.grid);
  j["time"] = {{"dt", cfg.time.dt}, {"t_final", cfg.time.t_final}};
  j["output"] = {{"stride", cfg.output.stride},
                 {"snapshots", cfg.output.snapshots},
                 {"encoding", cfg.output.encoding == DumpEncoding::text ? "text" : "binary"}};
  j["ensemble"] = {{"n_traj", cfg.ensemble.n_traj},
                   {"hop_cap", cfg.ensemble.hop_cap},
                   {"coupling_scale", cfg.ensemble.coupling_scale},
                   {"coupling_cap", cfg.ensemble.coupling_cap},
                   {"weight_variance_alarm", cfg.ensemble.weight_variance_alarm},
                   {"workers", cfg.ensemble.workers},
                   {"histogram", grid_json(cfg.ensemble.histogram)}};
  j["adiabatic"] = {{"coupling_cap", cfg.adiabatic.coupling_cap},
                    {"norm_tolerance", cfg.adiabatic.norm_tolerance},
                    {"zero_couplings", cfg.adiabatic.zero_couplings},
                    {"stability_factor", cfg.adiabatic.stability_factor},
                    {"max_substeps", cfg.adiabatic.max_substeps},
                    {"boundary_tolerance", cfg.adiabatic.guard.tolerance}};
  j["boundary"] = {{"tolerance", cfg.boundary.tolerance},
                   {"band", cfg.boundary.band},
                   {"check_interval", cfg.boundary.check_interval}};
  j["contour"] = {{"z_c", {cfg.contour.z_c.real(), cfg.contour.z_c.imag()}},
                  {"d", cfg.contour.d},
                  {"r", cfg.contour.r},
                  {"n_phi", cfg.contour.n_phi}};
  j["interference"] = {{"g1", gaussian_json(cfg.interference.g1)},
                       {"g2", gaussian_json(cfg.interference.g2)},
                       {"mode", mode_name(cfg.interference.mode)},
                       {"axis",
                        {{"min", cfg.interference_axis.min},
                         {"max", cfg.interference_axis.max},
                         {"n", cfg.interference_axis.n}}}};
  j["nodal"] = {{"x_lo", cfg.nodal.x_lo}, {"x_hi", cfg.nodal.x_hi}, {"off_axis", cfg.nodal.off_axis}};
  return j;
}

}  // namespace gpdyn
