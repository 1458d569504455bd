#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "blip/bloch.hpp"
#include "blip/simd/correlate.hpp"
#include "blip/types.hpp"

namespace blip {

// Inner products are <a, b> = sum_t conj(a_t) * b_t throughout, so the
// matched-filter statistic Re<D_k, x> = sum_t re(D_kt) re(x_t) + im(D_kt) im(x_t).

struct ProjectionResult {
  std::size_t atom_index = 0;
  double rho = 0.0;
  std::vector<Complex> projected;  // rho * atom(atom_index)
};

struct ParameterMaps {
  Dims dims;
  std::vector<double> rho;
  std::vector<double> t1;
  std::vector<double> t2;
  std::vector<double> df;

  ParameterMaps() = default;
  explicit ParameterMaps(Dims d)
      : dims(std::move(d)), rho(dims.size()), t1(dims.size()), t2(dims.size()), df(dims.size()) {}

  std::size_t voxels() const { return dims.size(); }
  void validate() const;

  // Binary layout (little-endian):
  //   char[8] "BLIPMAP1" | u32 version=1 | u32 rank | u64 extents[rank]
  //   u64 config hash | u64 U | char[U] units
  //   f64[N] rho | f64[N] t1 | f64[N] t2 | f64[N] df
  void save(const std::filesystem::path& path, std::uint64_t config_hash = 0) const;
  static ParameterMaps load(const std::filesystem::path& path, std::uint64_t* config_hash = nullptr);

  // Plain-text grid: header lines, then one block per parameter with one
  // image row per line (values printed round-trip exact).
  void save_text(const std::filesystem::path& path, std::uint64_t config_hash = 0) const;
  static ParameterMaps load_text(const std::filesystem::path& path);

  friend bool operator==(const ParameterMaps&, const ParameterMaps&) = default;
};

inline constexpr const char* kParameterUnits = "rho=a.u.;t1=ms;t2=ms;df=Hz";

// Reference path: exhaustive scan over all P atoms.
//   k = argmax_k Re<D_k, x> / ||D_k||   (lowest index on ties)
//   rho = max(Re<D_k, x> / ||D_k||^2, 0)
ProjectionResult project_voxel(std::span<const Complex> x, const BlochDictionary& dict);

// Blocked copy of the dictionary for the SIMD correlation kernels. Produces
// bit-identical results to project_voxel. Keeps a reference to `dict`, which
// must outlive the filter.
class MatchedFilter {
 public:
  explicit MatchedFilter(const BlochDictionary& dict, simd::Isa isa = simd::default_isa());

  const BlochDictionary& dictionary() const { return *dict_; }
  simd::Isa isa() const { return isa_; }

  ProjectionResult project(std::span<const Complex> x) const;

  // Projects up to kMaxVoxelTile rows at once; writes atom index and rho.
  void match_tile(std::span<const std::span<const Complex>> rows, std::span<std::size_t> index,
                  std::span<double> rho) const;

 private:
  const BlochDictionary* dict_;
  simd::Isa isa_;
  simd::CorrelateFn kernel_;
  std::size_t num_blocks_;
  std::vector<double> blocks_;
};

struct ImageProjection {
  MagnetizationSequence projected;
  ParameterMaps maps;
  std::vector<std::size_t> atom_index;
};

// Row-wise projection; parameters read back through the LUT.
ImageProjection project_image(const MagnetizationSequence& x, const MatchedFilter& filter);
ImageProjection project_image(const MagnetizationSequence& x, const BlochDictionary& dict);

}  // namespace blip
