#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "blip/bloch.hpp"
#include "blip/projection.hpp"
#include "blip/types.hpp"

namespace blip {

struct TissueSpec {
  int label = 0;
  TissueParams params;
  double rho = 0.0;

  void validate() const;
  friend bool operator==(const TissueSpec&, const TissueSpec&) = default;
};

struct PhantomDefinition {
  Dims dims;
  std::vector<int> labels;  // one per voxel, row-major
  std::vector<TissueSpec> tissues;

  void validate() const;
  const TissueSpec& tissue(int label) const;

  // Text layout:
  //   # blip phantom v1
  //   dims <e...>
  //   tissues <T>
  //   <label> <t1 ms> <t2 ms> <df Hz> <rho>      (T lines)
  //   labels
  //   <one image row of integer labels per line>
  void save_text(const std::filesystem::path& path) const;
  // Binary layout (little-endian):
  //   char[8] "BLIPPHN1" | u32 version=1 | u32 rank | u64 extents[rank] | u64 T
  //   T x { i32 label | u32 0 | f64 t1 | f64 t2 | f64 df | f64 rho }
  //   i32[N] labels
  void save_binary(const std::filesystem::path& path) const;
  // Detects the format from the leading bytes. Labels missing from the
  // tissue table raise IngestionError naming the value.
  static PhantomDefinition load(const std::filesystem::path& path);

  friend bool operator==(const PhantomDefinition&, const PhantomDefinition&) = default;
};

enum class PhantomKind { concentric, blocks, file };

PhantomKind parse_phantom_kind(const std::string& name);

// Six representative brain/head tissues, ordered outermost first for the
// concentric layout. Parameters sit between dictionary grid points and the
// densities are deliberately close to each other.
std::vector<TissueSpec> default_brain_tissues();

// concentric: nested elliptical shells, tissues[0] outermost; the shell radii
//             are jittered by up to 20% of a shell width from the seed.
// blocks:     a checkerboard of rectangular blocks with a seeded shuffle of
//             labels, every tissue used at least once.
// file:       loads `file` (tissue table taken from the file); `dims`, when
//             non-empty, must match.
PhantomDefinition synth_phantom(PhantomKind kind, const Dims& dims,
                                const std::vector<TissueSpec>& tissues, std::uint64_t seed,
                                const std::filesystem::path& file = {});

struct GroundTruth {
  MagnetizationSequence x;
  ParameterMaps maps;
};

// Row i = rho_i * B(theta_i). Each tissue is simulated once.
GroundTruth ground_truth_sequence(const PhantomDefinition& phantom,
                                  const ExcitationSequence& excitation);

}  // namespace blip
