#include <gtest/gtest.h>

#include <random>

#include "blip/parallel.hpp"
#include "blip/projection.hpp"
#include "blip/simd/correlate.hpp"
#include "test_util.hpp"

using namespace blip;

namespace {

const BlochDictionary& dict() {
  static const auto d = build_dictionary(testutil::small_grid(), random_excitation(48, 10.0, 10.0, 21));
  return d;
}

// Straight O(P L) search written independently of the library.
std::pair<std::size_t, double> brute(std::span<const Complex> x, const BlochDictionary& d) {
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < d.size(); ++k) {
    double c = 0.0, n2 = 0.0;
    for (std::size_t t = 0; t < d.length(); ++t) {
      c += (std::conj(d.atom(k)[t]) * x[t]).real();
      n2 += std::norm(d.atom(k)[t]);
    }
    const double score = c / std::sqrt(n2);
    if (score > best_score) {
      best_score = score;
      best = k;
    }
  }
  return {best, best_score};
}

std::vector<simd::Isa> isas() {
  std::vector<simd::Isa> v{simd::Isa::scalar};
  for (auto i : {simd::Isa::avx2, simd::Isa::neon})
    if (simd::isa_available(i)) v.push_back(i);
  return v;
}

}  // namespace

TEST(Projection, OnModelPoint) {
  const auto& d = dict();
  std::vector<Complex> x(d.atom(7).begin(), d.atom(7).end());
  for (auto& z : x) z *= 2.5;
  const auto r = project_voxel(x, d);
  EXPECT_EQ(r.atom_index, 7u);
  EXPECT_NEAR(r.rho, 2.5, 1e-14);
  EXPECT_LE(testutil::rel_diff(r.projected, x), 1e-14);
}

TEST(Projection, NegativeCorrelationClampsToZero) {
  const auto exc = random_excitation(3, 10.0, 10.0, 1);
  // Real-valued atoms; x = -D_0 correlates negatively with every atom.
  BlochDictionary d({{1, 0}, {2, 0}, {1, 0}, {1, 0}, {0.5, 0}, {3, 0}}, {{1, 1, 0}, {2, 1, 0}}, exc);
  std::vector<Complex> x{{-1, 0}, {-2, 0}, {-1, 0}};
  const auto r = project_voxel(x, d);
  EXPECT_EQ(r.rho, 0.0);
  for (auto z : r.projected) EXPECT_EQ(z, Complex(0.0, 0.0));
}

TEST(Projection, ZeroInputPicksFirstAtom) {
  std::vector<Complex> x(dict().length());
  const auto r = project_voxel(x, dict());
  EXPECT_EQ(r.atom_index, 0u);
  EXPECT_EQ(r.rho, 0.0);
}

TEST(Projection, PerturbedPointMatchesBruteForce) {
  const auto& d = dict();
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = rng() % d.size();
    auto x = testutil::random_vector(d.length(), rng);
    for (std::size_t t = 0; t < d.length(); ++t) x[t] = 0.8 * d.atom(k)[t] + 1e-4 * x[t];
    const auto r = project_voxel(x, d);
    EXPECT_EQ(r.atom_index, brute(x, d).first);
    EXPECT_EQ(r.atom_index, k);
  }
}

TEST(Projection, RandomVoxelsMatchBruteForce) {
  const auto& d = dict();
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = testutil::random_vector(d.length(), rng);
    EXPECT_EQ(project_voxel(x, d).atom_index, brute(x, d).first);
  }
}

TEST(MatchedFilter, BitIdenticalToExhaustiveScanOnEveryIsa) {
  const auto& d = dict();
  std::mt19937_64 rng(8);
  std::vector<std::vector<Complex>> xs;
  for (int i = 0; i < 200; ++i) xs.push_back(testutil::random_vector(d.length(), rng));
  for (auto isa : isas()) {
    SCOPED_TRACE(std::string(simd::isa_name(isa)));
    MatchedFilter f(d, isa);
    for (const auto& x : xs) {
      const auto a = project_voxel(x, d);
      const auto b = f.project(x);
      EXPECT_EQ(a.atom_index, b.atom_index);
      EXPECT_EQ(a.rho, b.rho);
      EXPECT_EQ(a.projected, b.projected);
    }
  }
}

TEST(MatchedFilter, TiesResolveToLowestIndex) {
  const auto exc = random_excitation(2, 10.0, 10.0, 1);
  std::vector<Complex> atoms;
  std::vector<TissueParams> lut;
  for (int k = 0; k < 9; ++k) {
    atoms.push_back({1.0, 0.0});
    atoms.push_back({0.0, k == 3 || k == 6 ? 1.0 : 0.5});
    lut.push_back({100.0 + k, 50.0, 0.0});
  }
  BlochDictionary d(atoms, lut, exc);
  std::vector<Complex> x{{1.0, 0.0}, {0.0, 1.0}};
  for (auto isa : isas()) EXPECT_EQ(MatchedFilter(d, isa).project(x).atom_index, 3u);
  EXPECT_EQ(project_voxel(x, d).atom_index, 3u);
}

TEST(ProjectImage, OnModelRowsAreFixedPoints) {
  const auto& d = dict();
  MagnetizationSequence x(Dims{5, 3}, d.length());
  std::vector<std::size_t> ks;
  for (std::size_t i = 0; i < x.voxels(); ++i) {
    const std::size_t k = (i * 7) % d.size();
    ks.push_back(k);
    for (std::size_t t = 0; t < d.length(); ++t) x.at(i, t) = 0.5 * d.atom(k)[t];
  }
  const auto r = project_image(x, d);
  for (std::size_t i = 0; i < x.voxels(); ++i) {
    EXPECT_EQ(r.atom_index[i], ks[i]);
    EXPECT_EQ(r.maps.t1[i], d.lut()[ks[i]].t1);
    EXPECT_EQ(r.maps.t2[i], d.lut()[ks[i]].t2);
    EXPECT_NEAR(r.maps.rho[i], 0.5, 1e-14);
  }
  EXPECT_LE(testutil::rel_diff(r.projected.data(), x.data()), 1e-14);
}

TEST(ProjectImage, ZeroImage) {
  MagnetizationSequence x(Dims{4, 4}, dict().length());
  const auto r = project_image(x, dict());
  for (double v : r.maps.rho) EXPECT_EQ(v, 0.0);
  for (auto z : r.projected.data()) EXPECT_EQ(z, Complex(0.0, 0.0));
}

TEST(ProjectImage, MatchesSequentialLoopAndThreadCount) {
  std::mt19937_64 rng(13);
  const auto x = testutil::random_sequence(Dims{16}, dict().length(), rng);
  const auto r = project_image(x, dict());
  for (std::size_t i = 0; i < 16; ++i) {
    const auto v = project_voxel(x.row(i), dict());
    EXPECT_EQ(r.atom_index[i], v.atom_index);
    EXPECT_EQ(r.maps.rho[i], v.rho);
    EXPECT_TRUE(std::equal(v.projected.begin(), v.projected.end(), r.projected.row(i).begin()));
  }
  set_num_threads(1);
  const auto r1 = project_image(x, dict());
  set_num_threads(3);
  const auto r3 = project_image(x, dict());
  set_num_threads(0);
  EXPECT_EQ(r1.projected, r3.projected);
  EXPECT_EQ(r1.maps, r3.maps);
}

TEST(ProjectImage, LengthMismatchThrows) {
  MagnetizationSequence x(Dims{4}, dict().length() + 1);
  EXPECT_THROW(project_image(x, dict()), DimensionError);
}
