#include "arsep/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "arsep/errors.hpp"

namespace arsep {

namespace {

// FFTW planning is not thread-safe; execution with new arrays is.
struct PlanCache {
  std::mutex mutex;
  std::map<std::size_t, fftw_plan> forward;
  std::map<std::size_t, fftw_plan> inverse;

  fftw_plan get(std::size_t n, bool inv) {
    std::lock_guard lock(mutex);
    auto& table = inv ? inverse : forward;
    if (auto it = table.find(n); it != table.end()) return it->second;
    std::vector<double> real(n);
    std::vector<fftw_complex> cplx(n / 2 + 1);
    const int size = static_cast<int>(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p = inv ? fftw_plan_dft_c2r_1d(size, cplx.data(), real.data(), flags)
                      : fftw_plan_dft_r2c_1d(size, real.data(), cplx.data(), flags);
    if (p == nullptr) throw Error("FFTW failed to create a plan");
    table.emplace(n, p);
    return p;
  }
};

PlanCache& plans() {
  static PlanCache cache;
  return cache;
}

}  // namespace

std::vector<std::complex<double>> rfft(std::span<const double> input) {
  const std::size_t n = input.size();
  if (n == 0) throw ShapeError("rfft: empty input");
  std::vector<double> in(input.begin(), input.end());
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_execute_dft_r2c(plans().get(n, false), in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> irfft(std::span<const std::complex<double>> bins, std::size_t n) {
  if (n == 0 || bins.size() != n / 2 + 1) throw ShapeError("irfft: bin count mismatch");
  // c2r destroys its input.
  std::vector<std::complex<double>> in(bins.begin(), bins.end());
  std::vector<double> out(n);
  fftw_execute_dft_c2r(plans().get(n, true), reinterpret_cast<fftw_complex*>(in.data()),
                       out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
  return out;
}

}  // namespace arsep
