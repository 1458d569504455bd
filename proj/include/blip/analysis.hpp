#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blip/bloch.hpp"
#include "blip/phantom.hpp"
#include "blip/projection.hpp"
#include "blip/recon.hpp"
#include "blip/types.hpp"

namespace blip {

inline constexpr double kSerClampDb = 300.0;

// 20 log10(||X||_F / ||X - X^||_F), capped at kSerClampDb (exact matches
// included). Throws DomainError for a zero truth or mismatched shapes.
double ser_db(const MagnetizationSequence& truth, const MagnetizationSequence& estimate);

struct FlatnessReport {
  double lambda = 0.0;  // max ||u||_inf / ||u||_2 over the sampled chords
  double lambda_inv_sq_over_L = 0.0;
  std::size_t num_chords = 0;
  std::uint64_t seed = 0;
  std::size_t length = 0;
};

// Monte-Carlo flatness over dictionary chords (see sample_chord).
FlatnessReport flatness(const BlochDictionary& dict, std::size_t num_chords, std::uint64_t seed);

// Flatness of an explicit chord set; throws DegenerateSamplingError if every
// vector is zero.
double flatness_of(const std::vector<std::vector<Complex>>& chords);

struct ParamError {
  double median = 0.0;  // relative (absolute Hz for df)
  double mean = 0.0;
  double max = 0.0;     // max absolute error in the parameter's unit
};

struct MapErrors {
  ParamError rho;
  ParamError t1;
  ParamError t2;
  ParamError df;
  std::size_t voxels = 0;  // masked voxel count
};

// Errors over voxels with truth.rho > 0. Relative errors for rho/T1/T2,
// absolute (Hz) for df. Throws DomainError when the mask is empty.
MapErrors map_errors(const ParameterMaps& truth, const ParameterMaps& estimate);

// Distance from `value` to the nearest point of the axis, relative to value.
double relative_grid_distance(const AxisSpec& axis, double value);
// Half the local grid spacing around `value`, relative to value: the largest
// relative error a nearest-grid-point estimate can have there.
double relative_half_step(const AxisSpec& axis, double value);

struct StudySettings {
  std::vector<std::size_t> lengths;  // L values
  std::vector<std::size_t> factors;  // p values
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  double flip_std_deg = 10.0;
  double tr_ms = 10.0;
  ParameterGrid grid = ParameterGrid::brain_default();
  ReconConfig recon;
  std::size_t axis = 0;
  double threshold_db = 20.0;
};

struct StudyCell {
  std::size_t length = 0;
  std::size_t p = 0;
  std::size_t trial = 0;
  double ser_db = 0.0;
  std::size_t iterations = 0;
  bool failed = false;
  std::string error;
};

struct StudyRow {
  std::size_t length = 0;
  std::size_t p = 0;
  double ratio = 0.0;  // L / p^2
  double mean_ser_db = 0.0;
  std::size_t failures = 0;
};

struct StudyResult {
  std::vector<StudyCell> cells;
  std::vector<StudyRow> rows;
  // Smallest L / p^2 whose mean SER reaches the threshold, per p.
  std::map<std::size_t, std::optional<double>> transitions;

  // Delimited table: "# config_hash", header
  // L,p,L_over_p2,mean_ser_db,failures, then the transitions as comments.
  void save_csv(const std::filesystem::path& path, std::uint64_t config_hash = 0) const;
};

// Per (L, p, trial): fresh excitation and plan from seeds derived from
// (seed, L, p, trial), dictionary, noiseless data, BLIP, SER. Cell failures
// are recorded, not thrown. Cells run sequentially; each is internally
// parallel.
StudyResult scaling_study(const StudySettings& settings, const PhantomDefinition& phantom);

// 8-bit binary PGM of one parameter map with a fixed window [lo, hi]:
// gray = round(255 * clamp((v - lo) / (hi - lo), 0, 1)).
void write_pgm(const std::filesystem::path& path, const Dims& dims,
               const std::vector<double>& values, double lo, double hi);

struct RasterWindow {
  double lo;
  double hi;
};
// Windows used for exported rasters: rho [0, 1.2], T1 [0, 5000] ms,
// T2 [0, 2000] ms, df [-100, 100] Hz.
RasterWindow raster_window(const std::string& parameter);

}  // namespace blip
