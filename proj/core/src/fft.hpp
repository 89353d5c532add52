#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace podwind::detail {

// Real <-> half-complex FFT of a fixed length backed by FFTW. Forward is
// unnormalized, X_k = sum_n x_n exp(-2 pi i k n / N); inverse is the
// unnormalized c2r transform x_n = sum_k X_k exp(+2 pi i k n / N) over the
// Hermitian-extended spectrum. Instances are not shared across threads.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const noexcept { return n_; }
  std::size_t bins() const noexcept { return n_ / 2 + 1; }

  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  std::size_t n_;
  double* real_ = nullptr;
  void* spec_ = nullptr;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

}  // namespace podwind::detail
