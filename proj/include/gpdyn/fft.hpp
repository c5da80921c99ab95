#pragma once

#include <string>

#include "gpdyn/fft_buffer.hpp"

namespace gpdyn {

// Plans are measured (FFTW_MEASURE) by default, which is several times faster
// than estimated plans but lets FFTW pick algorithms by timing. Bitwise
// reproducibility across processes therefore needs the same wisdom: export
// it after a run and import it before re-running.
enum class FftPlanning { estimate, measure };

void set_fft_planning(FftPlanning mode);
FftPlanning fft_planning();
std::string export_fft_wisdom();
// Returns false if FFTW rejects the string.
bool import_fft_wisdom(const std::string& wisdom);

// Owning wrapper around a pair of in-place FFTW plans for an ny x nx complex
// array (row-major, x fastest).
class Fft2D {
 public:
  Fft2D(int nx, int ny);
  ~Fft2D();
  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;
  Fft2D(Fft2D&& other) noexcept;
  Fft2D& operator=(Fft2D&& other) noexcept;

  void forward(ComplexBuffer& data) const;
  // Unnormalised inverse; callers fold 1/(nx ny) into their own multipliers.
  void backward(ComplexBuffer& data) const;

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double inverse_scale() const { return 1.0 / (static_cast<double>(nx_) * ny_); }

 private:
  int nx_ = 0;
  int ny_ = 0;
  void* forward_ = nullptr;
  void* backward_ = nullptr;
};

}  // namespace gpdyn
