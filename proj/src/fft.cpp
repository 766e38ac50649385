#include "hswift/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hswift::fft {

namespace {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int n, Sign sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_pair(n, static_cast<int>(sign));
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    // FFTW_ESTIMATE leaves the scratch arrays untouched; FFTW_UNALIGNED lets
    // the plan run on arbitrary caller buffers through fftw_execute_dft.
    std::vector<fftw_complex> scratch_in(n), scratch_out(n);
    fftw_plan plan = fftw_plan_dft_1d(n, scratch_in.data(), scratch_out.data(),
                                      sign == Sign::negative ? FFTW_FORWARD : FFTW_BACKWARD,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw std::runtime_error("fftw: could not create plan");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

void dft(std::span<const std::complex<double>> in, std::span<std::complex<double>> out, Sign sign) {
  if (in.size() != out.size()) throw std::invalid_argument("fft::dft: size mismatch");
  if (in.empty()) return;
  fftw_plan plan = cache().get(static_cast<int>(in.size()), sign);
  // std::complex<double> is layout-compatible with fftw_complex; FFTW does
  // not write through the input pointer for out-of-place transforms.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  if (src == dst) {
    std::vector<std::complex<double>> copy(in.begin(), in.end());
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(copy.data()), dst);
    return;
  }
  fftw_execute_dft(plan, src, dst);
}

}  // namespace hswift::fft
