#pragma once

#include <complex>
#include <cstddef>

namespace stargraph {

/// Smallest n' >= n whose prime factors are all in {2, 3, 5, 7}.
std::size_t good_fft_size(std::size_t n);

/// In-place complex FFT of a fixed length. Instances come from a process-wide
/// registry; lookup is mutex-guarded and execution is thread-safe. Plans use
/// FFTW_ESTIMATE so the transform is bit-reproducible across runs.
class FftPlan {
 public:
  static const FftPlan& get(std::size_t n);

  std::size_t size() const { return n_; }

  /// Unnormalised forward (e^{-ikx}) and backward (e^{+ikx}) transforms.
  void forward(std::complex<double>* data) const;
  void backward(std::complex<double>* data) const;

  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan();

 private:
  explicit FftPlan(std::size_t n);
  friend struct FftRegistry;

  std::size_t n_;
  void* forward_ = nullptr;
  void* backward_ = nullptr;
};

}  // namespace stargraph
