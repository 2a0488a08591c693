#include "stargraph/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "stargraph/error.hpp"

namespace stargraph {

std::size_t good_fft_size(std::size_t n) {
  if (n <= 1) return 1;
  for (std::size_t c = n;; ++c) {
    std::size_t r = c;
    for (std::size_t p : {2u, 3u, 5u, 7u})
      while (r % p == 0) r /= p;
    if (r == 1) return c;
  }
}

struct FftRegistry {
  std::mutex mutex;
  std::map<std::size_t, std::unique_ptr<FftPlan>> plans;

  static FftRegistry& instance() {
    static FftRegistry registry;
    return registry;
  }

  const FftPlan& lookup(std::size_t n) {
    std::lock_guard lock(mutex);
    auto it = plans.find(n);
    if (it == plans.end()) it = plans.emplace(n, std::unique_ptr<FftPlan>(new FftPlan(n))).first;
    return *it->second;
  }
};

const FftPlan& FftPlan::get(std::size_t n) {
  require(n > 0, "FFT length must be positive");
  return FftRegistry::instance().lookup(n);
}

// Called with the registry mutex held: the FFTW planner is not thread-safe.
FftPlan::FftPlan(std::size_t n) : n_(n) {
  std::vector<std::complex<double>> scratch(n);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, flags);
  backward_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_BACKWARD, flags);
  if (!forward_ || !backward_) fail(ErrorCode::numeric_failure, "FFTW could not build a plan");
}

FftPlan::~FftPlan() {
  if (forward_) fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  if (backward_) fftw_destroy_plan(static_cast<fftw_plan>(backward_));
}

void FftPlan::forward(std::complex<double>* data) const {
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(forward_), buf, buf);
}

void FftPlan::backward(std::complex<double>* data) const {
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(backward_), buf, buf);
}

}  // namespace stargraph
