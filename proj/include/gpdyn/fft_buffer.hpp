#pragma once

#include <complex>
#include <cstddef>
#include <new>
#include <vector>

namespace gpdyn {

namespace detail {
void* fftw_aligned_alloc(std::size_t bytes);
void fftw_aligned_free(void* p) noexcept;
}  // namespace detail

// Allocator giving FFTW its preferred SIMD alignment so plans made on one
// buffer can be executed on any other.
template <class T>
struct FftwAllocator {
  using value_type = T;

  FftwAllocator() noexcept = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    void* p = detail::fftw_aligned_alloc(n * sizeof(T));
    if (p == nullptr) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { detail::fftw_aligned_free(p); }

  template <class U>
  friend bool operator==(const FftwAllocator&, const FftwAllocator<U>&) noexcept {
    return true;
  }
};

using Complex = std::complex<double>;
using ComplexBuffer = std::vector<Complex, FftwAllocator<Complex>>;

}  // namespace gpdyn
