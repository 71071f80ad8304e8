#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>

namespace zk::detail {

template <typename T>
struct FftwDeleter {
  void operator()(T* p) const { fftw_free(p); }
};

template <typename T>
using FftwPtr = std::unique_ptr<T[], FftwDeleter<T>>;

inline FftwPtr<double> alloc_real(std::size_t n) {
  return FftwPtr<double>(fftw_alloc_real(n));
}
inline FftwPtr<std::complex<double>> alloc_complex(std::size_t n) {
  return FftwPtr<std::complex<double>>(reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(n)));
}

// Plans are created once per shape with FFTW_ESTIMATE, so results do not
// depend on timing measurements. Execution uses the new-array interface
// and must be given fftw_alloc'd buffers.
struct Plan2D {
  int n1 = 0, n2 = 0;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  ~Plan2D();
  void forward(double* in, std::complex<double>* out) const;
  // Destroys the input.
  void backward(std::complex<double>* in, double* out) const;
};

struct Plan1D {
  int n = 0;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  ~Plan1D();
  void forward(double* in, std::complex<double>* out) const;
  void backward(std::complex<double>* in, double* out) const;
};

std::shared_ptr<const Plan2D> plan_2d(int n1, int n2);
std::shared_ptr<const Plan1D> plan_1d(int n);

}  // namespace zk::detail
