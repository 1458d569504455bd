#include <cstdlib>
#include <string_view>

#include "blip/simd/correlate.hpp"

namespace blip::simd {

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(BLIP_HAVE_AVX2_KERNEL)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::neon:
#if defined(BLIP_HAVE_NEON_KERNEL)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa default_isa() {
  if (const char* env = std::getenv("BLIP_SIMD")) {
    const std::string_view want(env);
    if (want == "scalar") return Isa::scalar;
    if (want == "avx2" && isa_available(Isa::avx2)) return Isa::avx2;
    if (want == "neon" && isa_available(Isa::neon)) return Isa::neon;
  }
  if (isa_available(Isa::avx2)) return Isa::avx2;
  if (isa_available(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

CorrelateFn correlate_kernel(Isa isa) {
  if (!isa_available(isa)) return &correlate_scalar;
  switch (isa) {
#if defined(BLIP_HAVE_AVX2_KERNEL)
    case Isa::avx2:
      return &correlate_avx2;
#endif
#if defined(BLIP_HAVE_NEON_KERNEL)
    case Isa::neon:
      return &correlate_neon;
#endif
    default:
      return &correlate_scalar;
  }
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

}  // namespace blip::simd
