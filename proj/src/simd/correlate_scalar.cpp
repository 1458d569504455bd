#include "blip/simd/correlate.hpp"

namespace blip::simd {

void correlate_scalar(const CorrelateArgs& a) {
  constexpr std::size_t W = kAtomsPerBlock;
  const std::size_t stride = 2 * W * a.length;
  for (std::size_t v = 0; v < a.voxels; ++v) {
    const double* xr = a.x_re + v * a.length;
    const double* xi = a.x_im + v * a.length;
    double* out = a.corr + v * a.num_blocks * W;
    for (std::size_t b = 0; b < a.num_blocks; ++b) {
      const double* blk = a.blocks + b * stride;
      for (std::size_t lane = 0; lane < W; ++lane) {
        double acc = 0.0;
        for (std::size_t t = 0; t < a.length; ++t) {
          const double prod_re = blk[t * 2 * W + lane] * xr[t];
          const double prod_im = blk[t * 2 * W + W + lane] * xi[t];
          acc = acc + (prod_re + prod_im);
        }
        out[b * W + lane] = acc;
      }
    }
  }
}

}  // namespace blip::simd
