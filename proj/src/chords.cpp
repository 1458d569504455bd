#include "blip/chords.hpp"

#include <cmath>

namespace blip {

Chord sample_chord(const BlochDictionary& dict, std::mt19937_64& rng, double min_relative_norm,
                   std::size_t max_attempts) {
  std::uniform_int_distribution<std::size_t> pick(0, dict.size() - 1);
  std::uniform_real_distribution<double> scale(0.0, 1.0);
  std::uniform_int_distribution<int> quarter(0, 3);
  const std::size_t l = dict.length();
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    Chord c;
    c.k1 = pick(rng);
    c.k2 = pick(rng);
    c.rho1 = 1.0 - scale(rng);  // (0, 1]
    c.rho2 = quarter(rng) == 0 ? 0.0 : 1.0 - scale(rng);
    c.values.resize(l);
    const auto a = dict.atom(c.k1);
    const auto b = dict.atom(c.k2);
    double energy = 0.0;
    for (std::size_t t = 0; t < l; ++t) {
      c.values[t] = a[t] * c.rho1 - b[t] * c.rho2;
      energy += std::norm(c.values[t]);
    }
    const double reference =
        c.rho1 * dict.atom_norms()[c.k1] + c.rho2 * dict.atom_norms()[c.k2];
    if (std::sqrt(energy) > min_relative_norm * reference) return c;
  }
  throw DegenerateSamplingError("sample_chord: every sampled chord was numerically zero");
}

}  // namespace blip
