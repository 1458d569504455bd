#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "blip/projection.hpp"
#include "blip/sampling.hpp"
#include "test_util.hpp"

using namespace blip;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void truncate_file(const fs::path& p) { fs::resize_file(p, fs::file_size(p) - 3); }

}  // namespace

TEST(Io, DictionaryRoundTrip) {
  TempDir dir("blip_io_dict");
  const auto d = build_dictionary(testutil::small_grid(), random_excitation(16, 10.0, 10.0, 1));
  d.save(dir.path / "d.bin");
  const auto e = BlochDictionary::load(dir.path / "d.bin");
  EXPECT_EQ(d, e);
  EXPECT_EQ(d.atom_norms(), e.atom_norms());
  truncate_file(dir.path / "d.bin");
  EXPECT_THROW(BlochDictionary::load(dir.path / "d.bin"), IoError);
  EXPECT_THROW(BlochDictionary::load(dir.path / "missing.bin"), IoError);
}

TEST(Io, MapsRoundTrip) {
  TempDir dir("blip_io_maps");
  ParameterMaps m(Dims{3, 2});
  m.rho = {0.1, 0.2, 0.0, 1.0 / 3.0, 0.5, 0.9};
  m.t1 = {100, 200, 300, 400.5, 500, 600};
  m.t2 = {10, 20, 30, 40, 50, 60.25};
  m.df = {0, 0, -3, 0, 1e-7, 0};
  m.save(dir.path / "m.bin", 42);
  std::uint64_t h = 0;
  EXPECT_EQ(ParameterMaps::load(dir.path / "m.bin", &h), m);
  EXPECT_EQ(h, 42u);
  m.save_text(dir.path / "m.txt", 42);
  EXPECT_EQ(ParameterMaps::load_text(dir.path / "m.txt"), m);
  truncate_file(dir.path / "m.bin");
  EXPECT_THROW(ParameterMaps::load(dir.path / "m.bin"), IoError);
}

TEST(Io, PlanAndKspaceRoundTrip) {
  TempDir dir("blip_io_ksp");
  std::mt19937_64 rng(3);
  const auto plan = make_plan(4, 9, Dims{8, 4}, 17, 0);
  plan.save_text(dir.path / "plan.txt");
  EXPECT_EQ(SamplingPlan::load_text(dir.path / "plan.txt"), plan);
  const auto y = forward(testutil::random_sequence(plan.dims, 9, rng), plan);
  y.save(dir.path / "y.bin");
  EXPECT_EQ(KSpaceData::load(dir.path / "y.bin"), y);
  {
    std::ofstream f(dir.path / "y.bin", std::ios::binary | std::ios::in);
    f.seekp(0);
    f.write("XXXX", 4);
  }
  EXPECT_THROW(KSpaceData::load(dir.path / "y.bin"), IoError);
}
