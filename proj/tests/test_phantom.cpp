#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "blip/phantom.hpp"
#include "blip/projection.hpp"
#include "test_util.hpp"

using namespace blip;
namespace fs = std::filesystem;

TEST(Phantom, SingleTissueIsUniform) {
  const std::vector<TissueSpec> one{{7, {600.0, 60.0, 0.0}, 1.0}};
  for (auto kind : {PhantomKind::concentric, PhantomKind::blocks}) {
    const auto ph = synth_phantom(kind, Dims{12, 10}, one, 1);
    for (int l : ph.labels) EXPECT_EQ(l, 7);
  }
}

TEST(Phantom, ConcentricSixTissuesNested) {
  const auto tissues = default_brain_tissues();
  ASSERT_EQ(tissues.size(), 6u);
  const auto ph = synth_phantom(PhantomKind::concentric, Dims{64, 64}, tissues, 3);
  std::set<int> seen(ph.labels.begin(), ph.labels.end());
  for (const auto& t : tissues) EXPECT_TRUE(seen.count(t.label)) << t.label;
  // Walking from the center to an edge along the middle row, the shell index
  // never decreases toward the inside.
  auto shell = [&](int label) {
    for (std::size_t s = 0; s < tissues.size(); ++s)
      if (tissues[s].label == label) return int(s);
    return -1;
  };
  int prev = shell(ph.labels[32 * 64 + 0]);
  EXPECT_EQ(prev, 0);
  for (std::size_t c = 1; c <= 32; ++c) {
    const int s = shell(ph.labels[32 * 64 + c]);
    EXPECT_GE(s, prev);
    prev = s;
  }
  EXPECT_EQ(prev, 5);
}

TEST(Phantom, BlocksUseEveryTissueAndAreSeeded) {
  const auto tissues = default_brain_tissues();
  const auto a = synth_phantom(PhantomKind::blocks, Dims{32, 32}, tissues, 5);
  const auto b = synth_phantom(PhantomKind::blocks, Dims{32, 32}, tissues, 5);
  EXPECT_EQ(a, b);
  std::set<int> seen(a.labels.begin(), a.labels.end());
  EXPECT_EQ(seen.size(), tissues.size());
}

TEST(Phantom, TextAndBinaryRoundTrip) {
  const auto ph = synth_phantom(PhantomKind::concentric, Dims{20, 24}, default_brain_tissues(), 8);
  const auto dir = fs::temp_directory_path() / "blip_phantom_rt";
  fs::create_directories(dir);
  ph.save_text(dir / "p.txt");
  ph.save_binary(dir / "p.bin");
  EXPECT_EQ(PhantomDefinition::load(dir / "p.txt"), ph);
  EXPECT_EQ(PhantomDefinition::load(dir / "p.bin"), ph);
  EXPECT_EQ(synth_phantom(PhantomKind::file, Dims{20, 24}, {}, 0, dir / "p.txt"), ph);
  EXPECT_THROW(synth_phantom(PhantomKind::file, Dims{8, 8}, {}, 0, dir / "p.txt"), DimensionError);
  fs::remove_all(dir);
}

TEST(Phantom, UnknownLabelIsIngestionError) {
  const auto dir = fs::temp_directory_path() / "blip_phantom_bad";
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "p.txt");
    f << "# blip phantom v1\ndims 2 2\ntissues 1\n1 500 50 0 1\nlabels\n1 1\n1 9\n";
  }
  try {
    PhantomDefinition::load(dir / "p.txt");
    FAIL() << "expected IngestionError";
  } catch (const IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find('9'), std::string::npos);
  }
  fs::remove_all(dir);
}

TEST(GroundTruth, ZeroDensityGivesZeroSequence) {
  const std::vector<TissueSpec> t{{1, {600.0, 60.0, 0.0}, 0.0}};
  const auto ph = synth_phantom(PhantomKind::concentric, Dims{4, 4}, t, 1);
  const auto gt = ground_truth_sequence(ph, random_excitation(10, 10.0, 10.0, 1));
  for (auto z : gt.x.data()) EXPECT_EQ(z, Complex(0.0, 0.0));
}

TEST(GroundTruth, SingleVoxelDelegatesToSimulator) {
  const std::vector<TissueSpec> t{{1, {600.0, 60.0, 3.0}, 0.6}};
  const auto ph = synth_phantom(PhantomKind::concentric, Dims{1}, t, 1);
  const auto exc = random_excitation(25, 10.0, 10.0, 2);
  const auto gt = ground_truth_sequence(ph, exc);
  const auto ref = scale_response(0.6, simulate_response(t[0].params, exc));
  EXPECT_TRUE(std::equal(ref.begin(), ref.end(), gt.x.row(0).begin()));
  EXPECT_EQ(gt.maps.t1[0], 600.0);
  EXPECT_EQ(gt.maps.rho[0], 0.6);
}

// Off-grid tissues: the projection lands on the atom a brute-force search of
// the most correlated response picks.
TEST(GroundTruth, OffGridProjectsToBruteForceNearest) {
  const auto tissues = default_brain_tissues();
  const auto ph = synth_phantom(PhantomKind::blocks, Dims{6, 6}, tissues, 2);
  const auto exc = random_excitation(100, 10.0, 10.0, 3);
  const auto d = build_dictionary(ParameterGrid::brain_default(), exc);
  const auto gt = ground_truth_sequence(ph, exc);
  const auto pr = project_image(gt.x, d);
  for (std::size_t i = 0; i < gt.x.voxels(); ++i) {
    const auto x = gt.x.row(i);
    std::size_t best = 0;
    double best_s = -1e300;
    for (std::size_t k = 0; k < d.size(); ++k) {
      double c = 0.0, n = 0.0;
      for (std::size_t t = 0; t < d.length(); ++t) {
        c += (std::conj(d.atom(k)[t]) * x[t]).real();
        n += std::norm(d.atom(k)[t]);
      }
      if (c / std::sqrt(n) > best_s) {
        best_s = c / std::sqrt(n);
        best = k;
      }
    }
    EXPECT_EQ(pr.atom_index[i], best);
    const auto& truth = ph.tissue(ph.labels[i]).params;
    EXPECT_NE(d.lut()[best], truth);
  }
}
