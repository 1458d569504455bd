#include "blip/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "blip/chords.hpp"
#include "blip/sampling.hpp"
#include "blip/seeds.hpp"

namespace blip {

double ser_db(const MagnetizationSequence& truth, const MagnetizationSequence& estimate) {
  if (!truth.same_shape(estimate)) throw DomainError("ser_db: shape mismatch");
  double signal = 0.0;
  double error = 0.0;
  const auto& a = truth.data();
  const auto& b = estimate.data();
  for (std::size_t j = 0; j < a.size(); ++j) {
    signal += std::norm(a[j]);
    error += std::norm(a[j] - b[j]);
  }
  if (!(signal > 0.0)) throw DomainError("ser_db: truth is zero");
  if (error == 0.0) return kSerClampDb;
  // 20 log10 of a norm ratio == 10 log10 of the energy ratio.
  return std::min(kSerClampDb, 10.0 * std::log10(signal / error));
}

double flatness_of(const std::vector<std::vector<Complex>>& chords) {
  double lambda = -1.0;
  for (const auto& u : chords) {
    double peak = 0.0;
    double energy = 0.0;
    for (const auto& z : u) {
      peak = std::max(peak, std::abs(z));
      energy += std::norm(z);
    }
    if (energy > 0.0) lambda = std::max(lambda, peak / std::sqrt(energy));
  }
  if (lambda < 0.0) throw DegenerateSamplingError("flatness: all chords are zero");
  return lambda;
}

FlatnessReport flatness(const BlochDictionary& dict, std::size_t num_chords, std::uint64_t seed) {
  if (num_chords == 0) throw DomainError("flatness: num_chords must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<Complex>> chords;
  chords.reserve(num_chords);
  for (std::size_t c = 0; c < num_chords; ++c) chords.push_back(sample_chord(dict, rng).values);
  FlatnessReport r;
  r.lambda = flatness_of(chords);
  r.num_chords = num_chords;
  r.seed = seed;
  r.length = dict.length();
  r.lambda_inv_sq_over_L = 1.0 / (r.lambda * r.lambda * static_cast<double>(r.length));
  return r;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ParamError summarize(const std::vector<double>& rel, const std::vector<double>& abs_err) {
  ParamError e;
  e.median = median(rel);
  double sum = 0.0;
  for (double r : rel) sum += r;
  e.mean = sum / static_cast<double>(rel.size());
  e.max = *std::max_element(abs_err.begin(), abs_err.end());
  return e;
}

}  // namespace

MapErrors map_errors(const ParameterMaps& truth, const ParameterMaps& estimate) {
  truth.validate();
  estimate.validate();
  if (!(truth.dims == estimate.dims)) throw DomainError("map_errors: dims differ");
  std::vector<double> rel[4], abs_err[4];
  for (std::size_t i = 0; i < truth.voxels(); ++i) {
    if (!(truth.rho[i] > 0.0)) continue;
    const double t[4] = {truth.rho[i], truth.t1[i], truth.t2[i], truth.df[i]};
    const double e[4] = {estimate.rho[i], estimate.t1[i], estimate.t2[i], estimate.df[i]};
    for (int k = 0; k < 4; ++k) {
      const double d = std::abs(e[k] - t[k]);
      abs_err[k].push_back(d);
      rel[k].push_back(k == 3 ? d : d / std::abs(t[k]));
    }
  }
  if (rel[0].empty()) throw DomainError("map_errors: mask (rho > 0) is empty");
  MapErrors m;
  m.voxels = rel[0].size();
  m.rho = summarize(rel[0], abs_err[0]);
  m.t1 = summarize(rel[1], abs_err[1]);
  m.t2 = summarize(rel[2], abs_err[2]);
  m.df = summarize(rel[3], abs_err[3]);
  return m;
}

double relative_grid_distance(const AxisSpec& axis, double value) {
  const auto v = axis.values();
  if (v.empty()) throw ConfigError("grid axis is empty");
  double best = std::abs(v.front() - value);
  for (double x : v) best = std::min(best, std::abs(x - value));
  return best / std::abs(value);
}

double relative_half_step(const AxisSpec& axis, double value) {
  const auto v = axis.values();
  if (v.empty()) throw ConfigError("grid axis is empty");
  if (value <= v.front() || value >= v.back() || v.size() == 1)
    return relative_grid_distance(axis, value);
  const auto hi = std::upper_bound(v.begin(), v.end(), value);
  const auto lo = hi - 1;
  return 0.5 * (*hi - *lo) / std::abs(value);
}

StudyResult scaling_study(const StudySettings& s, const PhantomDefinition& phantom) {
  if (s.lengths.empty() || s.factors.empty() || s.trials == 0)
    throw ConfigError("scaling study: empty (L, p) grid or zero trials");
  s.recon.validate();
  for (auto p : s.factors) {
    if (p == 0 || phantom.dims.size() == 0 || s.axis >= phantom.dims.rank() ||
        phantom.dims[s.axis] % p != 0)
      throw ConfigError("scaling study: p = " + std::to_string(p) +
                        " does not divide the decimated axis");
  }
  StudyResult result;
  for (auto p : s.factors) {
    for (auto length : s.lengths) {
      StudyRow row;
      row.length = length;
      row.p = p;
      row.ratio = static_cast<double>(length) / static_cast<double>(p * p);
      double sum = 0.0;
      std::size_t ok = 0;
      for (std::size_t trial = 0; trial < s.trials; ++trial) {
        StudyCell cell;
        cell.length = length;
        cell.p = p;
        cell.trial = trial;
        try {
          const auto exc = random_excitation(length, s.flip_std_deg, s.tr_ms,
                                             derive_seed(s.seed, {length, p, trial, 1}));
          const auto dict = build_dictionary(s.grid, exc);
          const auto gt = ground_truth_sequence(phantom, exc);
          const auto plan = make_plan(p, length, phantom.dims,
                                      derive_seed(s.seed, {length, p, trial, 2}), s.axis);
          const auto y = forward(gt.x, plan);
          const auto rec = blip(y, dict, plan, s.recon);
          cell.ser_db = ser_db(gt.x, rec.x);
          cell.iterations = rec.trace.records.size();
          sum += cell.ser_db;
          ++ok;
        } catch (const Error& e) {
          cell.failed = true;
          cell.error = e.what();
          ++row.failures;
        }
        result.cells.push_back(cell);
      }
      row.mean_ser_db = ok ? sum / static_cast<double>(ok) : std::nan("");
      result.rows.push_back(row);
    }
  }
  for (auto p : s.factors) {
    std::optional<double> best;
    for (const auto& row : result.rows) {
      if (row.p != p || !(row.mean_ser_db >= s.threshold_db)) continue;
      if (!best || row.ratio < *best) best = row.ratio;
    }
    result.transitions[p] = best;
  }
  return result;
}

void StudyResult::save_csv(const std::filesystem::path& path, std::uint64_t config_hash) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open for writing: " + path.string());
  std::fprintf(f, "# config_hash %016llx\n", static_cast<unsigned long long>(config_hash));
  std::fprintf(f, "L,p,L_over_p2,mean_ser_db,failures\n");
  for (const auto& r : rows)
    std::fprintf(f, "%zu,%zu,%.17g,%.17g,%zu\n", r.length, r.p, r.ratio, r.mean_ser_db, r.failures);
  for (const auto& [p, t] : transitions) {
    if (t) std::fprintf(f, "# transition p=%zu L_over_p2=%.17g\n", p, *t);
    else std::fprintf(f, "# transition p=%zu none\n", p);
  }
  for (const auto& c : cells)
    if (c.failed) std::fprintf(f, "# failed L=%zu p=%zu trial=%zu: %s\n", c.length, c.p, c.trial, c.error.c_str());
  if (std::fclose(f) != 0) throw IoError("write failed: " + path.string());
}

void write_pgm(const std::filesystem::path& path, const Dims& dims,
               const std::vector<double>& values, double lo, double hi) {
  if (values.size() != dims.size()) throw DimensionError("write_pgm: size mismatch");
  if (!(hi > lo)) throw DomainError("write_pgm: empty window");
  const std::size_t cols = dims.rank() == 2 ? dims[1] : dims[0];
  const std::size_t rows = dims.size() / cols;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "P5\n" << cols << ' ' << rows << "\n255\n";
  for (double v : values) {
    const double u = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * u))));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

RasterWindow raster_window(const std::string& parameter) {
  if (parameter == "rho") return {0.0, 1.2};
  if (parameter == "t1") return {0.0, 5000.0};
  if (parameter == "t2") return {0.0, 2000.0};
  if (parameter == "df") return {-100.0, 100.0};
  throw DomainError("raster_window: unknown parameter '" + parameter + "'");
}

}  // namespace blip
