#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "blip/types.hpp"

namespace blip {

// Per-voxel Bloch parameters. Times in ms, off-resonance in Hz.
struct TissueParams {
  double t1 = 0.0;
  double t2 = 0.0;
  double df = 0.0;

  bool valid() const;
  friend bool operator==(const TissueParams&, const TissueParams&) = default;
  friend auto operator<=>(const TissueParams&, const TissueParams&) = default;
};

// Flip angles in radians, repetition times in ms. Both of length L.
struct ExcitationSequence {
  std::vector<double> flip_angles;
  std::vector<double> rep_times;

  std::size_t length() const { return flip_angles.size(); }
  // Throws DomainError when the arrays disagree, are empty, or a TR is not
  // a positive finite number.
  void validate() const;
  // FNV-1a over the raw little-endian bytes of flip_angles then rep_times.
  std::uint64_t hash() const;
  friend bool operator==(const ExcitationSequence&, const ExcitationSequence&) = default;
};

struct MagnetizationState {
  Complex mxy{0.0, 0.0};
  double mz = 1.0;
};

// Unit-density IR-SSFP readout B(theta; alpha, TR).
//
// Equilibrium magnetization is 1 and the train starts from an ideal inversion
// (mxy = 0, mz = -1). Each repetition t then
//   1. rotates the magnetization by alpha_t about the x-axis (right-handed,
//      instantaneous pulse),
//   2. reads mxy at TE = TR_t / 2 with decay exp(-TE/T2) and precession
//      exp(i 2 pi df TE),
//   3. relaxes/precesses to the end of TR_t.
// Throws SimulationError with the offending time index on non-finite output.
std::vector<Complex> simulate_response(const TissueParams& theta,
                                       const ExcitationSequence& excitation);

// rho * response; rho must be >= 0.
std::vector<Complex> scale_response(double rho, std::span<const Complex> response);

// i.i.d. N(0, flip_std_deg) flip angles (stored in radians) with constant TR.
ExcitationSequence random_excitation(std::size_t length, double flip_std_deg,
                                     double tr_ms, std::uint64_t seed);

// Inclusive arithmetic progression start, start + step, ..., <= stop.
// step == 0 is only allowed for a single point (start == stop).
struct AxisSegment {
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;
  friend bool operator==(const AxisSegment&, const AxisSegment&) = default;
};

struct AxisSpec {
  std::vector<AxisSegment> segments;

  // Sorted, deduplicated union of all segment points.
  std::vector<double> values() const;
  friend bool operator==(const AxisSpec&, const AxisSpec&) = default;
};

struct ParameterGrid {
  AxisSpec t1;
  AxisSpec t2;
  AxisSpec df;

  // Piecewise-uniform brain-range grid with df fixed at 0. Yields 3379
  // feasible (t2 <= t1) atoms:
  //   T1: 80..2000 step 20, 2300..5000 step 300   (107 values)
  //   T2: 20..300 step 10,  500..1900 step 200    (37 values)
  static ParameterGrid brain_default();

  // "t1=80:2000:20,2300:5000:300;t2=...;df=0:0:0". Round-trips exactly.
  std::string to_string() const;
  static ParameterGrid parse(const std::string& text);

  friend bool operator==(const ParameterGrid&, const ParameterGrid&) = default;
};

// Discretized response manifold: P x L atoms, their norms and the LUT
// mapping atom index back to tissue parameters. Immutable after construction.
class BlochDictionary {
 public:
  // Validates: atoms.size() == P * L, lut.size() == P, no duplicate LUT
  // entries, no zero atom. Norms are computed here.
  BlochDictionary(std::vector<Complex> atoms, std::vector<TissueParams> lut,
                  ExcitationSequence excitation, std::string grid_spec = {});

  std::size_t size() const { return lut_.size(); }
  std::size_t length() const { return excitation_.length(); }

  std::span<const Complex> atom(std::size_t k) const {
    return {atoms_.data() + k * length(), length()};
  }
  const std::vector<Complex>& atoms() const { return atoms_; }
  const std::vector<double>& atom_norms() const { return norms_; }
  // Squared norms, summed directly (not norms squared).
  const std::vector<double>& atom_norms_sq() const { return norms_sq_; }
  const std::vector<TissueParams>& lut() const { return lut_; }
  const ExcitationSequence& excitation() const { return excitation_; }
  const std::string& grid_spec() const { return grid_spec_; }

  // Grid points dropped by the t2 <= t1 feasibility filter (0 when not built
  // from a grid).
  std::size_t filtered_count() const { return filtered_; }

  void save(const std::filesystem::path& path) const;
  static BlochDictionary load(const std::filesystem::path& path);

  friend bool operator==(const BlochDictionary& a, const BlochDictionary& b) {
    return a.atoms_ == b.atoms_ && a.lut_ == b.lut_ &&
           a.excitation_ == b.excitation_ && a.grid_spec_ == b.grid_spec_;
  }

 private:
  friend BlochDictionary build_dictionary(const ParameterGrid&,
                                          const ExcitationSequence&);
  std::vector<Complex> atoms_;
  std::vector<double> norms_;
  std::vector<double> norms_sq_;
  std::vector<TissueParams> lut_;
  ExcitationSequence excitation_;
  std::string grid_spec_;
  std::size_t filtered_ = 0;
};

// Simulates every feasible grid triple, ordered lexicographically by
// (t1, t2, df). Throws ConfigError when nothing survives the filter.
BlochDictionary build_dictionary(const ParameterGrid& grid,
                                 const ExcitationSequence& excitation);

}  // namespace blip
