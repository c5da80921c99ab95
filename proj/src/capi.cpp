#include "gpdyn/gpdyn.h"

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "gpdyn/analysis.hpp"
#include "gpdyn/config.hpp"
#include "gpdyn/errors.hpp"
#include "gpdyn/quantum_grid.hpp"
#include "gpdyn/runner.hpp"

struct gpd_model {
  gpdyn::ModelParams params;
};

struct gpd_field {
  gpdyn::WavefunctionField field;
};

namespace {

thread_local std::string g_last_error;

gpd_status fail(gpd_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <class F>
gpd_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return GPD_OK;
  } catch (const gpdyn::ConfigError& e) {
    return fail(GPD_CONFIG_ERROR, e.what());
  } catch (const gpdyn::RuntimeAbort& e) {
    return fail(GPD_RUNTIME_ABORT, e.what());
  } catch (const gpdyn::SingularPointError& e) {
    return fail(GPD_RUNTIME_ABORT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(GPD_RUNTIME_ABORT, "out of memory");
  } catch (const std::exception& e) {
    return fail(GPD_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(GPD_INTERNAL_ERROR, "unknown error");
  }
}

}  // namespace

extern "C" {

const char* gpd_version(void) { return "1.0.0"; }

const char* gpd_last_error(void) { return g_last_error.c_str(); }

gpd_status gpd_model_create(double omega, double a, double c, double mass, double hbar, gpd_model** out) {
  if (out == nullptr) return fail(GPD_INVALID_ARGUMENT, "out is null");
  *out = nullptr;
  return guarded([&] {
    gpdyn::ModelParams p{omega, a, c, mass, hbar};
    p.validate();
    *out = new gpd_model{p};
  });
}

void gpd_model_destroy(gpd_model* model) { delete model; }

gpd_status gpd_model_adiabatic(const gpd_model* model, double x, double y, double w[2], double* theta,
                               double d1[2]) {
  if (model == nullptr) return fail(GPD_INVALID_ARGUMENT, "model is null");
  return guarded([&] {
    const gpdyn::AdiabaticData ad = gpdyn::adiabatic_data(model->params, {x, y});
    if (w != nullptr) {
      w[0] = ad.w_plus;
      w[1] = ad.w_minus;
    }
    if (theta != nullptr) *theta = ad.theta;
    if (d1 != nullptr) {
      d1[0] = ad.d1.x;
      d1[1] = ad.d1.y;
    }
  });
}

gpd_status gpd_contour_winding(const gpd_model* model, double zc_re, double zc_im, double d, double r, int n_phi,
                               int* winding_minus, int* winding_plus) {
  if (model == nullptr || winding_minus == nullptr || winding_plus == nullptr) {
    return fail(GPD_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    gpdyn::ContourSpec spec{{zc_re, zc_im}, d, r, n_phi};
    const gpdyn::WindingResult res = gpdyn::contour_winding(model->params, spec);
    *winding_minus = res.winding_minus;
    *winding_plus = res.winding_plus;
  });
}

gpd_status gpd_field_create_packet(const gpd_model* model, int nx, int ny, double x_min, double x_max, double y_min,
                                   double y_max, double x0, double y0, double px, double py, double sigma, int state,
                                   gpd_field** out) {
  if (model == nullptr || out == nullptr) return fail(GPD_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  if (state != 1 && state != 2) return fail(GPD_CONFIG_ERROR, "initial.state must be 1 or 2");
  return guarded([&] {
    gpdyn::Grid2D grid{nx, ny, x_min, x_max, y_min, y_max};
    grid.validate();
    gpdyn::PacketSpec spec{{x0, y0}, {px, py}, sigma, state - 1, gpdyn::Representation::diabatic};
    *out = new gpd_field{gpdyn::init_gaussian_packet(model->params, grid, spec)};
  });
}

void gpd_field_destroy(gpd_field* field) { delete field; }

gpd_status gpd_field_propagate(gpd_field* field, const gpd_model* model, double dt, long n_steps) {
  if (field == nullptr || model == nullptr) return fail(GPD_INVALID_ARGUMENT, "null argument");
  if (n_steps < 0) return fail(GPD_INVALID_ARGUMENT, "n_steps must be >= 0");
  return guarded([&] {
    gpdyn::DiabaticPropagator prop(model->params, field->field.grid, dt);
    prop.step(field->field, n_steps);
  });
}

gpd_status gpd_field_left_fraction(const gpd_field* field, double* out) {
  if (field == nullptr || out == nullptr) return fail(GPD_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = gpdyn::left_fraction(gpdyn::to_density(field->field)); });
}

gpd_status gpd_field_norm(const gpd_field* field, double* out) {
  if (field == nullptr || out == nullptr) return fail(GPD_INVALID_ARGUMENT, "null argument");
  *out = field->field.norm();
  return GPD_OK;
}

gpd_status gpd_field_time(const gpd_field* field, double* out) {
  if (field == nullptr || out == nullptr) return fail(GPD_INVALID_ARGUMENT, "null argument");
  *out = field->field.time;
  return GPD_OK;
}

gpd_status gpd_validate_config(const char* path) {
  if (path == nullptr) return fail(GPD_INVALID_ARGUMENT, "path is null");
  return guarded([&] { gpdyn::load_config(path); });
}

gpd_status gpd_run_config(const char* path, const char* output_dir, int verbose) {
  if (path == nullptr) return fail(GPD_INVALID_ARGUMENT, "path is null");
  return guarded([&] {
    gpdyn::RunConfig cfg = gpdyn::load_config(path);
    if (output_dir != nullptr) cfg.output_dir = std::filesystem::absolute(output_dir).lexically_normal();
    const gpdyn::MethodOutput out = gpdyn::run(cfg, verbose ? &std::cerr : nullptr);
    for (const auto& w : out.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& line : out.summary) std::cout << line << '\n';
    std::cout << "output written to " << cfg.output_dir.string() << '\n';
  });
}

gpd_status gpd_compare(const char* const* dirs, size_t n_dirs, double x_lo, double x_hi, double off_axis,
                       const char* output_path) {
  if (dirs == nullptr && n_dirs > 0) return fail(GPD_INVALID_ARGUMENT, "dirs is null");
  return guarded([&] {
    std::vector<std::filesystem::path> paths;
    for (size_t k = 0; k < n_dirs; ++k) paths.emplace_back(dirs[k]);
    const gpdyn::CompareResult res = gpdyn::compare_runs(paths, gpdyn::NodalWindow{x_lo, x_hi, off_axis});
    if (output_path == nullptr) {
      gpdyn::print_comparison(std::cout, res);
      return;
    }
    std::ofstream out(output_path);
    if (!out) throw gpdyn::RuntimeAbort(std::string("cannot create ") + output_path);
    gpdyn::print_comparison(out, res);
  });
}

}  // extern "C"
