#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "blip/bloch.hpp"
#include "blip/projection.hpp"
#include "blip/sampling.hpp"
#include "blip/types.hpp"

namespace blip {

enum class StepsizeMode { fixed, adaptive };

struct ReconConfig {
  std::size_t max_iters = 300;
  StepsizeMode mode = StepsizeMode::adaptive;
  // Fixed-mode stepsize; 0 selects N / M.
  double mu = 0.0;
  // Stop once |r_n - r_{n+1}| / r_n drops below this (r = residual norm).
  double halt_tol = 1e-6;

  void validate() const;
};

struct ReconRecord {
  std::size_t iteration = 0;
  double residual = 0.0;  // ||Y - h(X^(n))|| after the update
  double stepsize = 0.0;
  std::optional<double> ser_db;
  std::size_t backtracks = 0;
};

struct ReconTrace {
  std::vector<ReconRecord> records;

  // CSV with a "# config_hash" line, then
  // iteration,residual,stepsize,ser_db,backtracks (ser_db empty if unknown).
  void save_csv(const std::filesystem::path& path, std::uint64_t config_hash = 0) const;
};

struct ReconResult {
  MagnetizationSequence x;
  ParameterMaps maps;
  std::vector<std::size_t> atom_index;
  ReconTrace trace;
};

// X + mu * G, elementwise.
MagnetizationSequence landweber_update(const MagnetizationSequence& x,
                                       const MagnetizationSequence& g, double mu);

// Normalized-IHT stepsize mu = ||g~||^2 / ||h(g~)||^2, where g~ restricts each
// gradient row to the real span of the current row of x (which is a scaled
// atom) and keeps the raw row where x is zero. Falls back to N / M when the
// restricted gradient or its image vanishes.
double adaptive_step(const MagnetizationSequence& x_current, const MagnetizationSequence& g,
                     const SamplingPlan& plan);

// Projected Landweber iteration onto the discretized Bloch cone, from X = 0:
//   X <- P[X + mu h^H (Y - h(X))]
// In adaptive mode a step is accepted only if the residual does not grow;
// otherwise mu is halved. Throws DivergenceError on a non-finite iterate and
// StagnationError when mu falls below 1e-8 N / M. Stops after max_iters, when
// the relative residual change drops below halt_tol, or once the residual is
// below 1e-12 ||Y||.
ReconResult blip(const KSpaceData& y, const MatchedFilter& filter, const SamplingPlan& plan,
                 const ReconConfig& cfg, const MagnetizationSequence* ground_truth = nullptr);
ReconResult blip(const KSpaceData& y, const BlochDictionary& dict, const SamplingPlan& plan,
                 const ReconConfig& cfg, const MagnetizationSequence* ground_truth = nullptr);

// Matched-filter baseline: one projected Landweber step from zero with
// mu = N / M, i.e. P[(N / M) h^H Y].
ImageProjection mrf_baseline(const KSpaceData& y, const MatchedFilter& filter,
                             const SamplingPlan& plan);
ImageProjection mrf_baseline(const KSpaceData& y, const BlochDictionary& dict,
                             const SamplingPlan& plan);

}  // namespace blip
