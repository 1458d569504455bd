#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "blip/analysis.hpp"
#include "blip/config.hpp"

namespace blip {

PhantomDefinition make_phantom(const ExperimentConfig& cfg);
ExcitationSequence make_excitation(const ExperimentConfig& cfg);

struct SingleRunSummary {
  std::uint64_t config_hash = 0;
  std::size_t iterations = 0;
  double ser_blip_db = 0.0;
  double ser_mrf_db = 0.0;
  MapErrors blip_errors;
  MapErrors mrf_errors;
};

// Phantom -> dictionary -> sampling -> BLIP and matched-filter baseline.
// Everything is computed before the output directory is touched. Writes:
//   config.json, plan.txt, summary.txt, trace.csv,
//   {truth,blip,mrf}_maps.{bin,txt}, and {truth,blip,mrf}_{rho,t1,t2}.pgm
//   when `rasters` is set.
SingleRunSummary run_single(const ExperimentConfig& cfg, const std::filesystem::path& out,
                            bool rasters = true);

// study.csv, config.json.
StudyResult run_study(const ExperimentConfig& cfg, const std::filesystem::path& out);

// flatness.csv (one row per L), config.json.
std::vector<FlatnessReport> run_flatness(const ExperimentConfig& cfg,
                                         const std::filesystem::path& out);

// dictionary.bin for the configured excitation and grid.
BlochDictionary run_dict_build(const ExperimentConfig& cfg, const std::filesystem::path& out);

// phantom.txt, phantom.bin, truth_maps.{bin,txt}.
PhantomDefinition run_phantom_gen(const ExperimentConfig& cfg, const std::filesystem::path& out);

}  // namespace blip
