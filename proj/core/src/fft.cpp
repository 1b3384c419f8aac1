#include "lle/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace lle {
namespace {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto* a = fftw_alloc_complex(n);
    auto* b = fftw_alloc_complex(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), a, b, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(a);
    fftw_free(b);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void execute(const cd* in, cd* out, std::size_t n, int sign) {
  fftw_plan plan = cache().get(n, sign);
  if (in == out) {
    CVec tmp(in, in + n);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(tmp.data()),
                     reinterpret_cast<fftw_complex*>(out));
  } else {
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<cd*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }
}

}  // namespace

void fft_forward(const cd* in, cd* out, std::size_t n) {
  execute(in, out, n, FFTW_FORWARD);
  const double s = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] *= s;
}

void fft_inverse(const cd* in, cd* out, std::size_t n) { execute(in, out, n, FFTW_BACKWARD); }

CVec fft_forward(const CVec& in) {
  CVec out(in.size());
  fft_forward(in.data(), out.data(), in.size());
  return out;
}

CVec fft_inverse(const CVec& in) {
  CVec out(in.size());
  fft_inverse(in.data(), out.data(), in.size());
  return out;
}

}  // namespace lle
