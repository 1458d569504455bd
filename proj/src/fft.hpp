#pragma once

#include <complex>
#include <cstddef>

#include "blip/types.hpp"

namespace blip::detail {

// Unitary in-place DFT over a 1D or row-major 2D grid, backed by FFTW.
// Plans are created once per geometry (FFTW_ESTIMATE | FFTW_UNALIGNED, so the
// chosen algorithm does not depend on timing or buffer alignment) and cached
// for the life of the process; execution is thread-safe.
class UnitaryDft {
 public:
  explicit UnitaryDft(const Dims& dims);

  // X_k = N^{-1/2} sum_n x_n exp(-2 pi i k.n / dims)
  void forward(Complex* data) const;
  // x_n = N^{-1/2} sum_k X_k exp(+2 pi i k.n / dims)
  void inverse(Complex* data) const;

  std::size_t size() const { return n_; }

 private:
  void* forward_plan_;
  void* inverse_plan_;
  std::size_t n_;
  double scale_;
};

}  // namespace blip::detail
