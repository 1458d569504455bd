#pragma once

#include <cstddef>
#include <string_view>

// Real-correlation kernels behind the matched filter.
//
// Atoms are stored in blocks of kAtomsPerBlock. For block b and time t the
// layout holds 2 * kAtomsPerBlock doubles: the real parts of the block's atoms
// followed by their imaginary parts. Every kernel computes, for each atom k
// and voxel v of the tile,
//
//   corr[v][k] = sum_t ( re(D_kt) * re(x_vt) + im(D_kt) * im(x_vt) )
//
// accumulated strictly in increasing t with one rounding per multiply and per
// add (no fused multiply-add). All variants therefore produce bit-identical
// results; the SIMD ones only spread atoms across lanes.
namespace blip::simd {

inline constexpr std::size_t kAtomsPerBlock = 4;
inline constexpr std::size_t kMaxVoxelTile = 4;

struct CorrelateArgs {
  const double* blocks = nullptr;  // num_blocks * length * 2 * kAtomsPerBlock
  std::size_t num_blocks = 0;
  std::size_t length = 0;
  const double* x_re = nullptr;  // voxels * length, voxel-major
  const double* x_im = nullptr;
  std::size_t voxels = 0;        // 1 .. kMaxVoxelTile
  double* corr = nullptr;        // voxels * num_blocks * kAtomsPerBlock
};

using CorrelateFn = void (*)(const CorrelateArgs&);

enum class Isa { scalar, avx2, neon };

void correlate_scalar(const CorrelateArgs& args);
#if defined(BLIP_HAVE_AVX2_KERNEL)
void correlate_avx2(const CorrelateArgs& args);
#endif
#if defined(BLIP_HAVE_NEON_KERNEL)
void correlate_neon(const CorrelateArgs& args);
#endif

// Compiled in and supported by the running CPU.
bool isa_available(Isa isa);
// Widest available ISA, unless BLIP_SIMD=scalar|avx2|neon overrides it.
Isa default_isa();
CorrelateFn correlate_kernel(Isa isa);
std::string_view isa_name(Isa isa);

}  // namespace blip::simd
