#include "fft.hpp"

#include <algorithm>
#include <mutex>
#include <new>

namespace metaradon::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(int n) : n_(n) {
  std::lock_guard<std::mutex> lock(planner_mutex());
  real_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
  spec_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
  if (!real_ || !spec_) throw std::bad_alloc();
  fwd_ = fftw_plan_dft_r2c_1d(n, real_, spec_, FFTW_ESTIMATE);
  inv_ = fftw_plan_dft_c2r_1d(n, spec_, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(fwd_);
  fftw_destroy_plan(inv_);
  fftw_free(real_);
  fftw_free(spec_);
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  std::copy(in.begin(), in.begin() + n_, real_);
  fftw_execute(fwd_);
  for (int i = 0; i < spectrum_size(); ++i) out[i] = {spec_[i][0], spec_[i][1]};
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  for (int i = 0; i < spectrum_size(); ++i) {
    spec_[i][0] = in[i].real();
    spec_[i][1] = in[i].imag();
  }
  fftw_execute(inv_);  // c2r overwrites its input, which is our scratch copy
  std::copy(real_, real_ + n_, out.begin());
}

}  // namespace metaradon::detail
