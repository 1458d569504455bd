#include "fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace blip::detail {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Plans are never destroyed; the set of geometries used by a process is tiny.
std::pair<fftw_plan, fftw_plan> cached_plans(const Dims& dims) {
  static std::map<std::vector<std::size_t>, std::pair<fftw_plan, fftw_plan>> cache;
  std::lock_guard lock(planner_mutex());
  if (auto it = cache.find(dims.extents); it != cache.end()) return it->second;

  std::vector<int> n(dims.extents.begin(), dims.extents.end());
  const auto total = dims.size();
  auto* buf = fftw_alloc_complex(total);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  auto fwd = fftw_plan_dft(static_cast<int>(n.size()), n.data(), buf, buf, FFTW_FORWARD, flags);
  auto inv = fftw_plan_dft(static_cast<int>(n.size()), n.data(), buf, buf, FFTW_BACKWARD, flags);
  fftw_free(buf);
  if (!fwd || !inv) throw Error("fftw: planning failed");
  return cache.emplace(dims.extents, std::make_pair(fwd, inv)).first->second;
}

}  // namespace

UnitaryDft::UnitaryDft(const Dims& dims) {
  if (!dims.valid()) throw DimensionError("dft: invalid dims");
  auto [f, i] = cached_plans(dims);
  forward_plan_ = f;
  inverse_plan_ = i;
  n_ = dims.size();
  scale_ = 1.0 / std::sqrt(static_cast<double>(n_));
}

void UnitaryDft::forward(Complex* data) const {
  auto* d = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), d, d);
  for (std::size_t k = 0; k < n_; ++k) data[k] *= scale_;
}

void UnitaryDft::inverse(Complex* data) const {
  auto* d = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(inverse_plan_), d, d);
  for (std::size_t k = 0; k < n_; ++k) data[k] *= scale_;
}

}  // namespace blip::detail
