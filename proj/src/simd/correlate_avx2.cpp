// Compiled with -mavx2 (and without -mfma); only called after a runtime check.
#include <immintrin.h>

#include "blip/simd/correlate.hpp"

namespace blip::simd {

namespace {

constexpr std::size_t W = kAtomsPerBlock;

// Two blocks x V voxels per pass: 2V independent accumulator chains.
template <std::size_t V>
void pair_of_blocks(const double* b0, const double* b1, std::size_t length,
                    const double* const* xr, const double* const* xi,
                    double* const* out) {
  __m256d acc0[V], acc1[V];
  for (std::size_t v = 0; v < V; ++v) {
    acc0[v] = _mm256_setzero_pd();
    acc1[v] = _mm256_setzero_pd();
  }
  for (std::size_t t = 0; t < length; ++t) {
    const __m256d re0 = _mm256_loadu_pd(b0 + t * 2 * W);
    const __m256d im0 = _mm256_loadu_pd(b0 + t * 2 * W + W);
    const __m256d re1 = _mm256_loadu_pd(b1 + t * 2 * W);
    const __m256d im1 = _mm256_loadu_pd(b1 + t * 2 * W + W);
    for (std::size_t v = 0; v < V; ++v) {
      const __m256d r = _mm256_broadcast_sd(xr[v] + t);
      const __m256d i = _mm256_broadcast_sd(xi[v] + t);
      acc0[v] = _mm256_add_pd(acc0[v], _mm256_add_pd(_mm256_mul_pd(re0, r), _mm256_mul_pd(im0, i)));
      acc1[v] = _mm256_add_pd(acc1[v], _mm256_add_pd(_mm256_mul_pd(re1, r), _mm256_mul_pd(im1, i)));
    }
  }
  for (std::size_t v = 0; v < V; ++v) {
    _mm256_storeu_pd(out[v], acc0[v]);
    _mm256_storeu_pd(out[v] + W, acc1[v]);
  }
}

template <std::size_t V>
void single_block(const double* b0, std::size_t length, const double* const* xr,
                  const double* const* xi, double* const* out) {
  __m256d acc[V];
  for (std::size_t v = 0; v < V; ++v) acc[v] = _mm256_setzero_pd();
  for (std::size_t t = 0; t < length; ++t) {
    const __m256d re = _mm256_loadu_pd(b0 + t * 2 * W);
    const __m256d im = _mm256_loadu_pd(b0 + t * 2 * W + W);
    for (std::size_t v = 0; v < V; ++v) {
      const __m256d r = _mm256_broadcast_sd(xr[v] + t);
      const __m256d i = _mm256_broadcast_sd(xi[v] + t);
      acc[v] = _mm256_add_pd(acc[v], _mm256_add_pd(_mm256_mul_pd(re, r), _mm256_mul_pd(im, i)));
    }
  }
  for (std::size_t v = 0; v < V; ++v) _mm256_storeu_pd(out[v], acc[v]);
}

template <std::size_t V>
void run(const CorrelateArgs& a) {
  const std::size_t stride = 2 * W * a.length;
  const double* xr[V];
  const double* xi[V];
  double* out[V];
  for (std::size_t v = 0; v < V; ++v) {
    xr[v] = a.x_re + v * a.length;
    xi[v] = a.x_im + v * a.length;
  }
  std::size_t b = 0;
  for (; b + 1 < a.num_blocks; b += 2) {
    for (std::size_t v = 0; v < V; ++v) out[v] = a.corr + v * a.num_blocks * W + b * W;
    pair_of_blocks<V>(a.blocks + b * stride, a.blocks + (b + 1) * stride, a.length, xr, xi, out);
  }
  if (b < a.num_blocks) {
    for (std::size_t v = 0; v < V; ++v) out[v] = a.corr + v * a.num_blocks * W + b * W;
    single_block<V>(a.blocks + b * stride, a.length, xr, xi, out);
  }
}

}  // namespace

void correlate_avx2(const CorrelateArgs& a) {
  switch (a.voxels) {
    case 1: run<1>(a); break;
    case 2: run<2>(a); break;
    case 3: run<3>(a); break;
    case 4: run<4>(a); break;
    default: correlate_scalar(a); break;
  }
}

}  // namespace blip::simd
