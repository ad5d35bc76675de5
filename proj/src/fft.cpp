#include "loggas/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>

namespace loggas {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

void fft_inplace(std::vector<cplx>& data, bool forward) {
  if (data.empty()) return;
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    // the FFTW planner is not reentrant
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(data.size()), p, p, forward ? FFTW_FORWARD : FFTW_BACKWARD,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

double fft_frequency(std::size_t k, std::size_t n, double dx) {
  long kk = static_cast<long>(k);
  long nn = static_cast<long>(n);
  if (kk > nn / 2) kk -= nn;
  return 2.0 * kPi * static_cast<double>(kk) / (static_cast<double>(n) * dx);
}

std::vector<cplx> apply_multiplier(const std::vector<cplx>& f, double dx, const std::function<cplx(double)>& m,
                                   std::size_t pad_factor) {
  std::size_t n = f.size();
  std::size_t nf = next_pow2(std::max<std::size_t>(pad_factor, 1) * n);
  // center the data in the padded buffer so that wrap-around acts symmetrically
  std::size_t off = (nf - n) / 2;
  std::vector<cplx> buf(nf, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < n; ++i) buf[off + i] = f[i];
  fft_inplace(buf, true);
  for (std::size_t k = 0; k < nf; ++k) buf[k] *= m(fft_frequency(k, nf, dx));
  fft_inplace(buf, false);
  std::vector<cplx> out(n);
  double inv = 1.0 / static_cast<double>(nf);
  for (std::size_t i = 0; i < n; ++i) out[i] = buf[off + i] * inv;
  return out;
}

}  // namespace loggas
