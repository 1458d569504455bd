#include <gtest/gtest.h>

#include <cstdlib>
#include <random>

#include "blip/simd/correlate.hpp"

using namespace blip::simd;

namespace {

struct Case {
  std::vector<double> blocks, xr, xi;
  std::size_t num_blocks, length, voxels;
};

Case make_case(std::size_t nb, std::size_t len, std::size_t v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Case c{{}, {}, {}, nb, len, v};
  c.blocks.resize(nb * len * 2 * kAtomsPerBlock);
  c.xr.resize(v * len);
  c.xi.resize(v * len);
  for (auto* vec : {&c.blocks, &c.xr, &c.xi})
    for (auto& d : *vec) d = g(rng);
  return c;
}

std::vector<double> run(CorrelateFn fn, const Case& c) {
  std::vector<double> corr(c.voxels * c.num_blocks * kAtomsPerBlock, -1.0);
  fn({c.blocks.data(), c.num_blocks, c.length, c.xr.data(), c.xi.data(), c.voxels, corr.data()});
  return corr;
}

}  // namespace

TEST(Simd, ScalarMatchesDefinition) {
  const auto c = make_case(3, 17, 2, 1);
  const auto corr = run(correlate_scalar, c);
  for (std::size_t v = 0; v < c.voxels; ++v)
    for (std::size_t b = 0; b < c.num_blocks; ++b)
      for (std::size_t a = 0; a < kAtomsPerBlock; ++a) {
        double acc = 0.0;
        for (std::size_t t = 0; t < c.length; ++t) {
          const double* blk = &c.blocks[(b * c.length + t) * 2 * kAtomsPerBlock];
          const double p = blk[a] * c.xr[v * c.length + t];
          const double q = blk[kAtomsPerBlock + a] * c.xi[v * c.length + t];
          acc = acc + (p + q);
        }
        EXPECT_EQ(corr[(v * c.num_blocks + b) * kAtomsPerBlock + a], acc);
      }
}

TEST(Simd, EveryAvailableIsaIsBitIdenticalToScalar) {
  for (auto isa : {Isa::avx2, Isa::neon}) {
    if (!isa_available(isa)) continue;
    SCOPED_TRACE(std::string(isa_name(isa)));
    const auto fn = correlate_kernel(isa);
    for (std::size_t nb : {1u, 2u, 3u, 8u, 11u})
      for (std::size_t len : {1u, 5u, 64u, 200u})
        for (std::size_t v = 1; v <= kMaxVoxelTile; ++v) {
          const auto c = make_case(nb, len, v, nb * 1000 + len * 10 + v);
          EXPECT_EQ(run(fn, c), run(correlate_scalar, c)) << nb << " " << len << " " << v;
        }
  }
}

TEST(Simd, DispatchNamesAndScalarAlwaysAvailable) {
  EXPECT_TRUE(isa_available(Isa::scalar));
  EXPECT_EQ(isa_name(Isa::scalar), "scalar");
  EXPECT_TRUE(isa_available(default_isa()));
  EXPECT_NE(correlate_kernel(default_isa()), nullptr);
}

TEST(Simd, EnvironmentOverride) {
  ::setenv("BLIP_SIMD", "scalar", 1);
  EXPECT_EQ(default_isa(), Isa::scalar);
  ::unsetenv("BLIP_SIMD");
}
