#include <arm_neon.h>

#include "blip/simd/correlate.hpp"

namespace blip::simd {

// Each 4-atom block is handled as two float64x2 halves.
void correlate_neon(const CorrelateArgs& a) {
  constexpr std::size_t W = kAtomsPerBlock;
  const std::size_t stride = 2 * W * a.length;
  for (std::size_t v = 0; v < a.voxels; ++v) {
    const double* xr = a.x_re + v * a.length;
    const double* xi = a.x_im + v * a.length;
    double* out = a.corr + v * a.num_blocks * W;
    for (std::size_t b = 0; b < a.num_blocks; ++b) {
      const double* blk = a.blocks + b * stride;
      float64x2_t lo = vdupq_n_f64(0.0);
      float64x2_t hi = vdupq_n_f64(0.0);
      for (std::size_t t = 0; t < a.length; ++t) {
        const double* row = blk + t * 2 * W;
        const float64x2_t r = vdupq_n_f64(xr[t]);
        const float64x2_t i = vdupq_n_f64(xi[t]);
        lo = vaddq_f64(lo, vaddq_f64(vmulq_f64(vld1q_f64(row), r), vmulq_f64(vld1q_f64(row + W), i)));
        hi = vaddq_f64(hi, vaddq_f64(vmulq_f64(vld1q_f64(row + 2), r), vmulq_f64(vld1q_f64(row + W + 2), i)));
      }
      vst1q_f64(out + b * W, lo);
      vst1q_f64(out + b * W + 2, hi);
    }
  }
}

}  // namespace blip::simd
