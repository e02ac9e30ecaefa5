#include "pam/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace pam::fft {
namespace {

// FFTW planning is not thread-safe but executing an existing plan on new
// arrays is, so plans are created once per (size, direction) under a lock and
// reused. FFTW_ESTIMATE keeps the chosen algorithm independent of timing.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto* in = fftw_alloc_complex(static_cast<size_t>(n));
    auto* out = fftw_alloc_complex(static_cast<size_t>(n));
    fftw_plan plan = fftw_plan_dft_1d(n, in, out, sign, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

struct FftwDeleter {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using Buffer = std::unique_ptr<fftw_complex[], FftwDeleter>;

std::vector<Complex> transform(std::span<const Complex> x, int sign) {
  const auto n = x.size();
  std::vector<Complex> result(n);
  if (n == 0) return result;
  Buffer in(fftw_alloc_complex(n));
  Buffer out(fftw_alloc_complex(n));
  // std::complex<double> is layout-compatible with double[2].
  std::memcpy(in.get(), x.data(), n * sizeof(Complex));
  fftw_plan plan = PlanCache::instance().get(static_cast<int>(n), sign);
  fftw_execute_dft(plan, in.get(), out.get());
  std::memcpy(static_cast<void*>(result.data()), out.get(), n * sizeof(Complex));
  return result;
}

}  // namespace

std::vector<Complex> forward(std::span<const Complex> x) { return transform(x, FFTW_FORWARD); }

std::vector<Complex> inverse(std::span<const Complex> x) {
  auto result = transform(x, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(x.size());
  for (auto& v : result) v *= scale;
  return result;
}

}  // namespace pam::fft
