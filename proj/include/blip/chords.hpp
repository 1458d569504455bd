#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "blip/bloch.hpp"

namespace blip {

// A chord of the discretized cone: u = rho1 * D_k1 - rho2 * D_k2 with
// rho1 in (0, 1] and rho2 either 0 (a single-atom ray, drawn with
// probability 1/4) or in (0, 1].
struct Chord {
  std::size_t k1 = 0;
  std::size_t k2 = 0;
  double rho1 = 0.0;
  double rho2 = 0.0;
  std::vector<Complex> values;
};

// Draws chords until one has ||u||_2 above `min_relative_norm` times
// rho1 ||D_k1|| + rho2 ||D_k2||. Throws DegenerateSamplingError after
// `max_attempts` rejections.
Chord sample_chord(const BlochDictionary& dict, std::mt19937_64& rng,
                   double min_relative_norm = 1e-9, std::size_t max_attempts = 1000);

}  // namespace blip
