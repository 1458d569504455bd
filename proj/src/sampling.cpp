#include "blip/sampling.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "binary_io.hpp"
#include "blip/chords.hpp"
#include "blip/parallel.hpp"
#include "fft.hpp"

namespace blip {

// ---------------------------------------------------------------------------
// Plan

void SamplingPlan::validate() const {
  if (!dims.valid()) throw ConfigError("sampling plan: dims must be 1D or 2D and positive");
  if (axis >= dims.rank()) throw ConfigError("sampling plan: decimated axis out of range");
  if (p == 0) throw ConfigError("sampling plan: p must be >= 1");
  if (dims[axis] % p != 0)
    throw ConfigError("sampling plan: p = " + std::to_string(p) +
                      " does not divide the decimated axis length " + std::to_string(dims[axis]));
  if (shifts.empty()) throw ConfigError("sampling plan: no frames");
  for (auto s : shifts)
    if (s >= p) throw ConfigError("sampling plan: shift out of [0, p)");
}

std::size_t SamplingPlan::kspace_index(std::size_t t, std::size_t m) const {
  const std::size_t z = shifts[t];
  if (dims.rank() == 1) return z + m * p;
  const std::size_t cols = dims[1];
  if (axis == 0) {
    // m = i * cols + c; kept row z + i p
    return (z + (m / cols) * p) * cols + m % cols;
  }
  // m = r * (cols / p) + j; kept column z + j p
  const std::size_t kept_cols = cols / p;
  return (m / kept_cols) * cols + z + (m % kept_cols) * p;
}

SamplingPlan make_plan(std::size_t p, std::size_t frames, const Dims& dims, std::uint64_t seed,
                       std::size_t axis) {
  SamplingPlan plan;
  plan.p = p;
  plan.dims = dims;
  plan.axis = axis;
  plan.seed = seed;
  if (frames == 0) throw ConfigError("make_plan: frames must be >= 1");
  if (p == 0) throw ConfigError("make_plan: p must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> shift(0, static_cast<std::uint32_t>(p - 1));
  plan.shifts.resize(frames);
  for (auto& s : plan.shifts) s = shift(rng);
  plan.validate();
  return plan;
}

void SamplingPlan::save_text(const std::filesystem::path& path) const {
  validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "# blip sampling plan v1\n";
  out << "p " << p << "\nframes " << frames() << "\ndims";
  for (auto e : dims.extents) out << ' ' << e;
  out << "\naxis " << axis << "\nseed " << seed << "\nshifts\n";
  for (std::size_t t = 0; t < shifts.size(); ++t) out << shifts[t] << ((t + 1) % 32 == 0 ? '\n' : ' ');
  out << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

SamplingPlan SamplingPlan::load_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  SamplingPlan plan;
  std::size_t frames = 0;
  std::string line;
  bool in_shifts = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    if (in_shifts) {
      for (std::uint64_t s; ls >> s;) plan.shifts.push_back(static_cast<std::uint32_t>(s));
      continue;
    }
    std::string key;
    ls >> key;
    if (key == "p") ls >> plan.p;
    else if (key == "frames") ls >> frames;
    else if (key == "dims") {
      std::vector<std::size_t> e;
      for (std::size_t v; ls >> v;) e.push_back(v);
      if (e.empty() || !ls.eof()) throw IoError("plan text: bad value for 'dims'");
      plan.dims = Dims(e);
      continue;
    } else if (key == "axis") ls >> plan.axis;
    else if (key == "seed") ls >> plan.seed;
    else if (key == "shifts") in_shifts = true;
    else throw IoError("plan text: unknown key '" + key + "'");
    if (ls.fail()) throw IoError("plan text: bad value for '" + key + "'");
  }
  if (plan.shifts.size() != frames) throw IoError("plan text: shift count differs from frames");
  plan.validate();
  return plan;
}

// ---------------------------------------------------------------------------
// Operators

void KSpaceData::validate() const {
  plan.validate();
  if (samples.size() != plan.measurements() * plan.frames())
    throw DimensionError("k-space data: sample count does not match plan");
}

KSpaceData forward(const MagnetizationSequence& x, const SamplingPlan& plan) {
  plan.validate();
  if (x.dims() != plan.dims || x.frames() != plan.frames())
    throw DimensionError("forward: image sequence shape does not match the sampling plan");
  const std::size_t n = plan.voxels();
  const std::size_t m = plan.measurements();
  const std::size_t frames = plan.frames();
  const detail::UnitaryDft dft(plan.dims);

  KSpaceData y;
  y.plan = plan;
  y.samples.resize(m * frames);
  parallel_for(frames, [&](std::size_t begin, std::size_t end) {
    std::vector<Complex> buf(n);
    for (std::size_t t = begin; t < end; ++t) {
      for (std::size_t i = 0; i < n; ++i) buf[i] = x.at(i, t);
      dft.forward(buf.data());
      for (std::size_t j = 0; j < m; ++j) y.samples[t * m + j] = buf[plan.kspace_index(t, j)];
    }
  });
  return y;
}

MagnetizationSequence adjoint(const KSpaceData& y) {
  y.validate();
  const auto& plan = y.plan;
  const std::size_t n = plan.voxels();
  const std::size_t m = plan.measurements();
  const std::size_t frames = plan.frames();
  const detail::UnitaryDft dft(plan.dims);

  MagnetizationSequence x(plan.dims, frames);
  parallel_for(frames, [&](std::size_t begin, std::size_t end) {
    std::vector<Complex> buf(n);
    for (std::size_t t = begin; t < end; ++t) {
      std::fill(buf.begin(), buf.end(), Complex{});
      for (std::size_t j = 0; j < m; ++j) buf[plan.kspace_index(t, j)] = y.samples[t * m + j];
      dft.inverse(buf.data());
      for (std::size_t i = 0; i < n; ++i) x.at(i, t) = buf[i];
    }
  });
  return x;
}

// ---------------------------------------------------------------------------
// Alias-group energy

namespace {

// Voxels whose decimated coordinate differs by a multiple of M_a = A / p.
struct AliasGeometry {
  std::size_t p;
  std::size_t group_stride;  // voxel index step between partners
  std::size_t group_span;    // M_a

  explicit AliasGeometry(const SamplingPlan& plan) : p(plan.p) {
    const std::size_t a = plan.dims[plan.axis];
    group_span = a / p;
    const std::size_t axis_stride =
        (plan.dims.rank() == 2 && plan.axis == 0) ? plan.dims[1] : 1;
    group_stride = group_span * axis_stride;
  }

  std::size_t decimated_coord(const SamplingPlan& plan, std::size_t voxel) const {
    if (plan.dims.rank() == 1) return voxel;
    return plan.axis == 0 ? voxel / plan.dims[1] : voxel % plan.dims[1];
  }
  // Member b = 0 of the voxel's group.
  std::size_t base(const SamplingPlan& plan, std::size_t voxel) const {
    const std::size_t b = decimated_coord(plan, voxel) / group_span;
    return voxel - b * group_stride;
  }
};

std::vector<Complex> alias_phases(std::size_t p) {
  std::vector<Complex> w(p);
  for (std::size_t j = 0; j < p; ++j)
    w[j] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(p));
  return w;
}

// Returns {sum_t sum_groups |sum_b x_b w^{z_t b}|^2, sum_groups sum_t sum_b |x_b|^2}
// over the groups whose base voxels are listed, with rows supplied by row_of.
template <typename RowOf>
std::pair<double, double> group_energies(const SamplingPlan& plan, const AliasGeometry& geo,
                                         const std::vector<std::size_t>& bases, RowOf&& row_of) {
  const auto w = alias_phases(plan.p);
  double kept = 0.0;
  double total = 0.0;
  std::vector<const Complex*> members(plan.p);
  for (std::size_t base : bases) {
    for (std::size_t b = 0; b < plan.p; ++b) members[b] = row_of(base + b * geo.group_stride);
    for (std::size_t t = 0; t < plan.frames(); ++t) {
      const std::size_t z = plan.shifts[t];
      Complex acc = members[0] ? members[0][t] : Complex{};
      double energy = members[0] ? std::norm(members[0][t]) : 0.0;
      for (std::size_t b = 1; b < plan.p; ++b) {
        if (!members[b]) continue;
        acc += members[b][t] * w[(z * b) % plan.p];
        energy += std::norm(members[b][t]);
      }
      kept += std::norm(acc);
      total += energy;
    }
  }
  return {kept, total};
}

}  // namespace

double measured_energy(const MagnetizationSequence& x, const SamplingPlan& plan) {
  plan.validate();
  if (x.dims() != plan.dims || x.frames() != plan.frames())
    throw DimensionError("measured_energy: shape mismatch");
  const AliasGeometry geo(plan);
  std::vector<std::size_t> bases;
  for (std::size_t i = 0; i < x.voxels(); ++i)
    if (geo.base(plan, i) == i) bases.push_back(i);
  const double kept = group_energies(plan, geo, bases,
                                     [&](std::size_t v) { return x.row(v).data(); }).first;
  return kept / static_cast<double>(plan.p);
}

RipSummary empirical_rip_probe(const BlochDictionary& dict, const SamplingPlan& plan,
                               std::size_t num_chords, std::uint64_t seed) {
  plan.validate();
  if (num_chords == 0) throw DomainError("rip probe: num_chords must be >= 1");
  if (plan.frames() != dict.length())
    throw DimensionError("rip probe: plan frames do not match dictionary length");
  const AliasGeometry geo(plan);
  const std::size_t n = plan.voxels();

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> voxel(0, n - 1);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<std::size_t> partner(1, plan.p > 1 ? plan.p - 1 : 1);

  RipSummary s;
  s.num_chords = num_chords;
  s.min_ratio = std::numeric_limits<double>::infinity();
  s.max_ratio = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t c = 0; c < num_chords; ++c) {
    std::map<std::size_t, std::vector<Complex>> support;
    const std::size_t v0 = voxel(rng);
    support[v0] = sample_chord(dict, rng).values;
    if (plan.p > 1 && coin(rng) == 1) {
      const std::size_t base = geo.base(plan, v0);
      const std::size_t b0 = (v0 - base) / geo.group_stride;
      const std::size_t b1 = (b0 + partner(rng)) % plan.p;
      support[base + b1 * geo.group_stride] = sample_chord(dict, rng).values;
    }
    std::vector<std::size_t> bases{geo.base(plan, v0)};
    auto [kept, total] = group_energies(plan, geo, bases, [&](std::size_t v) -> const Complex* {
      auto it = support.find(v);
      return it == support.end() ? nullptr : it->second.data();
    });
    // (N / M) ||h(U)||^2 = p * kept / p
    const double r = kept / total;
    s.min_ratio = std::min(s.min_ratio, r);
    s.max_ratio = std::max(s.max_ratio, r);
    s.delta_hat = std::max(s.delta_hat, std::abs(r - 1.0));
    sum += r;
  }
  s.mean_ratio = sum / static_cast<double>(num_chords);
  return s;
}

// ---------------------------------------------------------------------------
// K-space I/O

void KSpaceData::save(const std::filesystem::path& path) const {
  validate();
  detail::BinaryWriter w(path);
  w.magic("BLIPKSP1");
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(plan.dims.rank()));
  for (auto e : plan.dims.extents) w.u64(e);
  w.u64(plan.axis);
  w.u64(plan.p);
  w.u64(plan.frames());
  w.u64(plan.seed);
  w.u64(plan.measurements());
  for (auto s : plan.shifts) w.u32(s);
  w.complexes(samples);
}

KSpaceData KSpaceData::load(const std::filesystem::path& path) {
  detail::BinaryReader r(path);
  r.expect_magic("BLIPKSP1");
  if (r.u32() != 1) throw IoError("k-space: unsupported version");
  const auto rank = r.u32();
  if (rank < 1 || rank > 2) throw IoError("k-space: bad rank");
  std::vector<std::size_t> ext(rank);
  for (auto& e : ext) {
    e = r.u64();
    detail::check_size(e, 1ull << 20, "extent");
  }
  KSpaceData y;
  y.plan.dims = Dims(ext);
  y.plan.axis = r.u64();
  y.plan.p = r.u64();
  const auto frames = r.u64();
  detail::check_size(frames, 1ull << 24, "frame count");
  y.plan.seed = r.u64();
  const auto m = r.u64();
  y.plan.shifts.resize(frames);
  for (auto& s : y.plan.shifts) s = r.u32();
  y.plan.validate();
  if (m != y.plan.measurements()) throw IoError("k-space: measurement count mismatch");
  detail::check_size(m * frames, 1ull << 30, "sample count");
  y.samples = r.complexes(m * frames);
  r.expect_eof();
  return y;
}

}  // namespace blip
