#include "gpdyn/fft.hpp"

#include <fftw3.h>

#include <atomic>
#include <memory>
#include <mutex>
#include <cstdlib>
#include <stdexcept>
#include <utility>

namespace gpdyn {

namespace detail {
void* fftw_aligned_alloc(std::size_t bytes) { return fftw_malloc(bytes == 0 ? 1 : bytes); }
void fftw_aligned_free(void* p) noexcept { fftw_free(p); }
}  // namespace detail

namespace {
// The FFTW planner is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
std::atomic<FftPlanning> g_planning{FftPlanning::measure};

}  // namespace

void set_fft_planning(FftPlanning mode) { g_planning.store(mode); }

FftPlanning fft_planning() { return g_planning.load(); }

std::string export_fft_wisdom() {
  std::lock_guard lock(planner_mutex());
  std::unique_ptr<char, decltype(&std::free)> text(fftw_export_wisdom_to_string(), &std::free);
  return text ? std::string(text.get()) : std::string();
}

bool import_fft_wisdom(const std::string& wisdom) {
  std::lock_guard lock(planner_mutex());
  return fftw_import_wisdom_from_string(wisdom.c_str()) != 0;
}

Fft2D::Fft2D(int nx, int ny) : nx_(nx), ny_(ny) {
  ComplexBuffer scratch(static_cast<std::size_t>(nx) * ny);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  const unsigned flags = fft_planning() == FftPlanning::measure ? FFTW_MEASURE : FFTW_ESTIMATE;
  std::lock_guard lock(planner_mutex());
  forward_ = fftw_plan_dft_2d(ny, nx, buf, buf, FFTW_FORWARD, flags);
  backward_ = fftw_plan_dft_2d(ny, nx, buf, buf, FFTW_BACKWARD, flags);
  if (forward_ == nullptr || backward_ == nullptr) {
    throw std::runtime_error("FFTW plan creation failed");
  }
}

Fft2D::~Fft2D() {
  if (forward_ == nullptr && backward_ == nullptr) return;
  std::lock_guard lock(planner_mutex());
  if (forward_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  if (backward_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(backward_));
}

Fft2D::Fft2D(Fft2D&& other) noexcept
    : nx_(other.nx_),
      ny_(other.ny_),
      forward_(std::exchange(other.forward_, nullptr)),
      backward_(std::exchange(other.backward_, nullptr)) {}

Fft2D& Fft2D::operator=(Fft2D&& other) noexcept {
  if (this != &other) {
    std::swap(nx_, other.nx_);
    std::swap(ny_, other.ny_);
    std::swap(forward_, other.forward_);
    std::swap(backward_, other.backward_);
  }
  return *this;
}

void Fft2D::forward(ComplexBuffer& data) const {
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(forward_), buf, buf);
}

void Fft2D::backward(ComplexBuffer& data) const {
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(backward_), buf, buf);
}

}  // namespace gpdyn
