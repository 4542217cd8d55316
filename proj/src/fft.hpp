#pragma once

#include <complex>
#include <span>

#include <fftw3.h>

namespace metaradon::detail {

// Length-n real FFT with private aligned buffers. Plan creation and
// destruction are serialized because the FFTW planner is not thread-safe;
// each instance is then used from a single thread.
class RealFft {
 public:
  explicit RealFft(int n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const noexcept { return n_; }
  int spectrum_size() const noexcept { return n_ / 2 + 1; }

  // Writes n/2 + 1 bins of the unnormalized forward transform.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  // Unnormalized inverse: inverse(forward(x)) = n * x.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  int n_;
  double* real_;
  fftw_complex* spec_;
  fftw_plan fwd_;
  fftw_plan inv_;
};

}  // namespace metaradon::detail
