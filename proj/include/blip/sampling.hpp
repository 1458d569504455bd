#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "blip/bloch.hpp"
#include "blip/types.hpp"

namespace blip {

// Randomized-shift EPI subsampling. Along the decimated axis of length A
// (A = p * M_a) frame t keeps the frequencies {z_t, z_t + p, ..., z_t + (M_a - 1) p};
// in 2D every kept line is sampled completely along the other axis.
struct SamplingPlan {
  std::size_t p = 1;
  std::vector<std::uint32_t> shifts;  // one per frame, in [0, p)
  Dims dims;
  std::size_t axis = 0;     // decimated axis (0 for 1D)
  std::uint64_t seed = 0;   // generator seed, kept for provenance

  std::size_t frames() const { return shifts.size(); }
  std::size_t voxels() const { return dims.size(); }
  // Samples per frame, M = N / p.
  std::size_t measurements() const { return dims.size() / p; }
  void validate() const;

  // Linear k-space index (row-major over dims) of measurement m in frame t.
  std::size_t kspace_index(std::size_t t, std::size_t m) const;

  // Plain-text export:
  //   # blip sampling plan v1
  //   p <p> / frames <L> / dims <e...> / axis <a> / seed <s> / shifts / <L ints>
  void save_text(const std::filesystem::path& path) const;
  static SamplingPlan load_text(const std::filesystem::path& path);

  friend bool operator==(const SamplingPlan&, const SamplingPlan&) = default;
};

// Shifts i.i.d. uniform on {0, ..., p-1} from mt19937_64(seed).
// Throws ConfigError if p does not divide the decimated axis.
SamplingPlan make_plan(std::size_t p, std::size_t frames, const Dims& dims, std::uint64_t seed,
                       std::size_t axis = 0);

// Y, frame-major: samples[t * M + m].
struct KSpaceData {
  SamplingPlan plan;
  std::vector<Complex> samples;

  std::span<const Complex> frame(std::size_t t) const {
    const auto m = plan.measurements();
    return {samples.data() + t * m, m};
  }
  void validate() const;

  // Layout (little-endian):
  //   char[8] "BLIPKSP1" | u32 version=1 | u32 rank | u64 extents[rank]
  //   u64 axis | u64 p | u64 L | u64 seed | u64 M | u32 shifts[L]
  //   f64[2 M L] samples, frame by frame, interleaved (re, im)
  void save(const std::filesystem::path& path) const;
  static KSpaceData load(const std::filesystem::path& path);

  friend bool operator==(const KSpaceData&, const KSpaceData&) = default;
};

// h(X): per frame, unitary DFT over the spatial grid, then keep the plan's
// coefficients.
KSpaceData forward(const MagnetizationSequence& x, const SamplingPlan& plan);

// h^H(Y): per frame, zero-fill, then inverse unitary DFT.
MagnetizationSequence adjoint(const KSpaceData& y);

// sum_t ||P(z_t) F X_{:,t}||^2 evaluated in the image domain. Under EPI the
// kept energy of frame t is (1/p) sum over alias groups of
// |sum_b x_{a + b M_a} exp(-2 pi i z_t b / p)|^2, so sparse inputs cost
// O(support * p * L) and p = 1 reproduces ||X||^2 bit for bit.
double measured_energy(const MagnetizationSequence& x, const SamplingPlan& plan);

struct RipSummary {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double mean_ratio = 0.0;
  double delta_hat = 0.0;  // max |r - 1|
  std::size_t num_chords = 0;
};

// Samples chord images U (one or two nonzero voxels, the second one an
// aliasing partner of the first when p > 1) and summarizes
// r = (N / M) ||h(U)||^2 / ||U||^2. Voxels outside each other's alias group
// are mapped isometrically by EPI, so only partners are worth probing.
RipSummary empirical_rip_probe(const BlochDictionary& dict, const SamplingPlan& plan,
                               std::size_t num_chords, std::uint64_t seed);

}  // namespace blip
