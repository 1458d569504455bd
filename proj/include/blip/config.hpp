#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "blip/bloch.hpp"
#include "blip/phantom.hpp"
#include "blip/recon.hpp"

namespace blip {

enum class ExperimentKind { single_run, scaling_study, flatness };

struct PhantomSpec {
  PhantomKind kind = PhantomKind::concentric;
  Dims dims{64, 64};
  std::vector<TissueSpec> tissues = default_brain_tissues();
  std::filesystem::path file;
  std::uint64_t seed = 0;
};

struct ExcitationSpec {
  std::size_t length = 200;
  double flip_std_deg = 10.0;
  double tr_ms = 10.0;
  std::uint64_t seed = 0;
};

struct SamplingSpec {
  std::size_t p = 16;
  std::size_t axis = 0;
  std::uint64_t seed = 0;
};

struct StudySpec {
  std::vector<std::size_t> lengths;
  std::vector<std::size_t> factors;
  std::size_t trials = 1;
  double threshold_db = 20.0;
};

struct FlatnessSpec {
  std::vector<std::size_t> lengths{100, 200, 400, 800};
  std::size_t num_chords = 2000;
};

// One experiment, fully resolved: every sub-seed is explicit (derived from the
// master seed when the document leaves it out).
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::single_run;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  PhantomSpec phantom;
  ExcitationSpec excitation;
  ParameterGrid grid = ParameterGrid::brain_default();
  SamplingSpec sampling;
  ReconConfig recon;
  StudySpec study;
  FlatnessSpec flatness;

  // Canonical JSON (sorted keys) of the resolved configuration.
  std::string canonical_json() const;
  // FNV-1a of canonical_json(); stamped into every output.
  std::uint64_t hash() const;
};

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
};

// Parses and validates the whole document before anything is computed.
// Errors are ConfigError with the offending field path, e.g.
// "sampling.p: 5 does not divide phantom.dims[0] = 64".
ExperimentConfig parse_config(const std::string& json_text, const ConfigOverrides& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

std::string to_string(ExperimentKind kind);

}  // namespace blip
