#include "hihomog/detail/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace hihomog::detail {

namespace {

struct PlanKey {
  std::vector<int> dims;
  int sign;
  bool operator<(const PlanKey& o) const {
    if (sign != o.sign) return sign < o.sign;
    return dims < o.dims;
  }
};

// FFTW planning is not thread safe; execution via fftw_execute_dft is, on
// distinct buffers. Plans are created FFTW_UNALIGNED so they run on any
// caller-owned storage.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache c;
    return c;
  }

  fftw_plan get(std::span<const int> dims, int sign) {
    PlanKey key{std::vector<int>(dims.begin(), dims.end()), sign};
    std::scoped_lock lock(mutex_);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::size_t total = 1;
    for (int d : dims) total *= static_cast<std::size_t>(d);
    fftw_complex* buf = fftw_alloc_complex(total);
    if (!buf) throw std::bad_alloc();
    fftw_plan p = fftw_plan_dft(static_cast<int>(dims.size()), key.dims.data(),
                                buf, buf, sign,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!p) throw std::runtime_error("fftw_plan_dft failed");
    plans_.emplace(std::move(key), p);
    return plans_.find(PlanKey{std::vector<int>(dims.begin(), dims.end()), sign})->second;
  }

 private:
  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

std::size_t grid_total(std::span<const int> dims) {
  std::size_t total = 1;
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("grid dimension must be >= 1");
    total *= static_cast<std::size_t>(d);
  }
  return total;
}

}  // namespace

int fast_grid_size(int n) {
  if (n < 1) return 1;
  for (int m = n;; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

void dft_synthesis(std::span<Complex> grid, std::span<const int> dims) {
  if (grid.size() != grid_total(dims)) throw std::invalid_argument("grid/dims size mismatch");
  fftw_plan p = PlanCache::instance().get(dims, FFTW_BACKWARD);
  auto* raw = reinterpret_cast<fftw_complex*>(grid.data());
  fftw_execute_dft(p, raw, raw);
}

void dft_analysis(std::span<Complex> grid, std::span<const int> dims) {
  std::size_t total = grid_total(dims);
  if (grid.size() != total) throw std::invalid_argument("grid/dims size mismatch");
  fftw_plan p = PlanCache::instance().get(dims, FFTW_FORWARD);
  auto* raw = reinterpret_cast<fftw_complex*>(grid.data());
  fftw_execute_dft(p, raw, raw);
  const double scale = 1.0 / static_cast<double>(total);
  for (Complex& c : grid) c *= scale;
}

}  // namespace hihomog::detail
