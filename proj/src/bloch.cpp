#include "blip/bloch.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "binary_io.hpp"
#include "blip/parallel.hpp"

namespace blip {

bool TissueParams::valid() const {
  return std::isfinite(t1) && std::isfinite(t2) && std::isfinite(df) && t1 > 0.0 &&
         t2 > 0.0;
}

void ExcitationSequence::validate() const {
  if (flip_angles.empty()) throw DomainError("excitation: empty sequence");
  if (flip_angles.size() != rep_times.size())
    throw DomainError("excitation: flip_angles and rep_times differ in length");
  for (std::size_t t = 0; t < rep_times.size(); ++t) {
    if (!(rep_times[t] > 0.0) || !std::isfinite(rep_times[t]))
      throw DomainError("excitation: rep_times[" + std::to_string(t) +
                        "] must be positive and finite");
  }
}

std::uint64_t ExcitationSequence::hash() const {
  auto h = detail::fnv1a(flip_angles.data(), flip_angles.size() * sizeof(double));
  return detail::fnv1a(rep_times.data(), rep_times.size() * sizeof(double), h);
}

std::vector<Complex> simulate_response(const TissueParams& theta,
                                       const ExcitationSequence& excitation) {
  excitation.validate();
  if (!theta.valid()) throw DomainError("simulate_response: invalid tissue parameters");

  constexpr double two_pi = 2.0 * std::numbers::pi;
  const std::size_t length = excitation.length();
  std::vector<Complex> out(length);

  MagnetizationState m{Complex{0.0, 0.0}, -1.0};
  for (std::size_t t = 0; t < length; ++t) {
    const double alpha = excitation.flip_angles[t];
    const double tr = excitation.rep_times[t];
    const double c = std::cos(alpha);
    const double s = std::sin(alpha);

    const double mx = m.mxy.real();
    const double my = m.mxy.imag();
    m.mxy = Complex{mx, c * my - s * m.mz};
    m.mz = s * my + c * m.mz;

    const double te = 0.5 * tr;
    const Complex echo = std::exp(-te / theta.t2) * std::polar(1.0, two_pi * theta.df * te * 1e-3);
    out[t] = m.mxy * echo;
    if (!std::isfinite(out[t].real()) || !std::isfinite(out[t].imag()))
      throw SimulationError("simulate_response: non-finite sample at t=" + std::to_string(t), t);

    m.mxy *= std::exp(-tr / theta.t2) * std::polar(1.0, two_pi * theta.df * tr * 1e-3);
    m.mz = 1.0 + (m.mz - 1.0) * std::exp(-tr / theta.t1);
  }
  return out;
}

std::vector<Complex> scale_response(double rho, std::span<const Complex> response) {
  if (!(rho >= 0.0)) throw DomainError("scale_response: rho must be >= 0");
  std::vector<Complex> out(response.begin(), response.end());
  for (auto& z : out) z *= rho;
  return out;
}

ExcitationSequence random_excitation(std::size_t length, double flip_std_deg,
                                     double tr_ms, std::uint64_t seed) {
  if (length == 0) throw DomainError("random_excitation: length must be >= 1");
  if (!(flip_std_deg > 0.0)) throw DomainError("random_excitation: flip_std must be > 0");
  if (!(tr_ms > 0.0)) throw DomainError("random_excitation: tr must be > 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> flip(0.0, flip_std_deg * std::numbers::pi / 180.0);
  ExcitationSequence e;
  e.flip_angles.resize(length);
  for (auto& a : e.flip_angles) a = flip(rng);
  e.rep_times.assign(length, tr_ms);
  return e;
}

// ---------------------------------------------------------------------------
// Parameter grid

std::vector<double> AxisSpec::values() const {
  std::vector<double> v;
  for (const auto& seg : segments) {
    if (!std::isfinite(seg.start) || !std::isfinite(seg.stop) || !std::isfinite(seg.step))
      throw ConfigError("grid segment has non-finite bounds");
    if (seg.stop < seg.start) throw ConfigError("grid segment has stop < start");
    if (seg.step <= 0.0) {
      if (seg.start != seg.stop)
        throw ConfigError("grid segment step must be > 0 unless start == stop");
      v.push_back(seg.start);
      continue;
    }
    const double slack = 1e-9 * seg.step;
    for (std::size_t j = 0;; ++j) {
      const double x = seg.start + static_cast<double>(j) * seg.step;
      if (x > seg.stop + slack) break;
      v.push_back(x);
    }
  }
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

ParameterGrid ParameterGrid::brain_default() {
  ParameterGrid g;
  g.t1.segments = {{80.0, 2000.0, 20.0}, {2300.0, 5000.0, 300.0}};
  g.t2.segments = {{20.0, 300.0, 10.0}, {500.0, 1900.0, 200.0}};
  g.df.segments = {{0.0, 0.0, 0.0}};
  return g;
}

namespace {

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

double parse_double(std::string_view s) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ConfigError("grid spec: bad number '" + std::string(s) + "'");
  return x;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string_view::npos ? s.npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::string axis_to_string(const AxisSpec& a) {
  std::string out;
  for (std::size_t i = 0; i < a.segments.size(); ++i) {
    if (i) out += ',';
    const auto& s = a.segments[i];
    out += format_double(s.start) + ':' + format_double(s.stop) + ':' + format_double(s.step);
  }
  return out;
}

AxisSpec axis_from_string(std::string_view text) {
  AxisSpec a;
  for (auto seg : split(text, ',')) {
    auto parts = split(seg, ':');
    if (parts.size() != 3) throw ConfigError("grid spec: segment needs start:stop:step");
    a.segments.push_back({parse_double(parts[0]), parse_double(parts[1]), parse_double(parts[2])});
  }
  return a;
}

}  // namespace

std::string ParameterGrid::to_string() const {
  return "t1=" + axis_to_string(t1) + ";t2=" + axis_to_string(t2) + ";df=" + axis_to_string(df);
}

ParameterGrid ParameterGrid::parse(const std::string& text) {
  ParameterGrid g;
  bool seen[3] = {false, false, false};
  for (auto item : split(text, ';')) {
    auto eq = item.find('=');
    if (eq == std::string_view::npos) throw ConfigError("grid spec: expected key=segments");
    auto key = item.substr(0, eq);
    auto axis = axis_from_string(item.substr(eq + 1));
    if (key == "t1") { g.t1 = axis; seen[0] = true; }
    else if (key == "t2") { g.t2 = axis; seen[1] = true; }
    else if (key == "df") { g.df = axis; seen[2] = true; }
    else throw ConfigError("grid spec: unknown axis '" + std::string(key) + "'");
  }
  if (!seen[0] || !seen[1] || !seen[2]) throw ConfigError("grid spec: t1, t2 and df are required");
  return g;
}

// ---------------------------------------------------------------------------
// Dictionary

BlochDictionary::BlochDictionary(std::vector<Complex> atoms, std::vector<TissueParams> lut,
                                 ExcitationSequence excitation, std::string grid_spec)
    : atoms_(std::move(atoms)),
      lut_(std::move(lut)),
      excitation_(std::move(excitation)),
      grid_spec_(std::move(grid_spec)) {
  excitation_.validate();
  const std::size_t p = lut_.size();
  const std::size_t l = excitation_.length();
  if (p == 0) throw ConfigError("dictionary: no atoms");
  if (atoms_.size() != p * l) throw DimensionError("dictionary: atoms are not P x L");
  {
    std::set<TissueParams> seen(lut_.begin(), lut_.end());
    if (seen.size() != p) throw ConfigError("dictionary: duplicate LUT entries");
  }
  norms_.resize(p);
  norms_sq_.resize(p);
  for (std::size_t k = 0; k < p; ++k) {
    double acc = 0.0;
    for (const auto& z : atom(k)) acc += z.real() * z.real() + z.imag() * z.imag();
    if (!(acc > 0.0) || !std::isfinite(acc))
      throw ConfigError("dictionary: atom " + std::to_string(k) + " is zero or non-finite");
    norms_sq_[k] = acc;
    norms_[k] = std::sqrt(acc);
  }
}

BlochDictionary build_dictionary(const ParameterGrid& grid, const ExcitationSequence& excitation) {
  excitation.validate();
  const auto t1s = grid.t1.values();
  const auto t2s = grid.t2.values();
  const auto dfs = grid.df.values();

  std::vector<TissueParams> lut;
  std::size_t filtered = 0;
  for (double t1 : t1s)
    for (double t2 : t2s)
      for (double df : dfs) {
        TissueParams p{t1, t2, df};
        if (!p.valid()) throw ConfigError("dictionary grid contains invalid parameters");
        if (t2 > t1) {
          ++filtered;
          continue;
        }
        lut.push_back(p);
      }
  if (lut.empty()) throw ConfigError("dictionary grid is empty after the t2 <= t1 filter");

  const std::size_t l = excitation.length();
  std::vector<Complex> atoms(lut.size() * l);
  parallel_for(lut.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      auto row = simulate_response(lut[k], excitation);
      std::copy(row.begin(), row.end(), atoms.begin() + static_cast<std::ptrdiff_t>(k * l));
    }
  });

  BlochDictionary dict(std::move(atoms), std::move(lut), excitation, grid.to_string());
  dict.filtered_ = filtered;
  return dict;
}

// Layout (little-endian):
//   char[8] "BLIPDIC1" | u32 version=1 | u32 0 | u64 P | u64 L
//   u64 excitation hash | u64 G | char[G] grid spec
//   f64[L] flip angles (rad) | f64[L] rep times (ms)
//   f64[2PL] atoms, row-major, interleaved (re, im)
//   f64[3P] LUT (t1, t2, df)
void BlochDictionary::save(const std::filesystem::path& path) const {
  detail::BinaryWriter w(path);
  w.magic("BLIPDIC1");
  w.u32(1);
  w.u32(0);
  w.u64(size());
  w.u64(length());
  w.u64(excitation_.hash());
  w.string(grid_spec_);
  w.f64s(excitation_.flip_angles);
  w.f64s(excitation_.rep_times);
  w.complexes(atoms_);
  for (const auto& p : lut_) {
    w.f64(p.t1);
    w.f64(p.t2);
    w.f64(p.df);
  }
}

BlochDictionary BlochDictionary::load(const std::filesystem::path& path) {
  detail::BinaryReader r(path);
  r.expect_magic("BLIPDIC1");
  if (r.u32() != 1) throw IoError("dictionary: unsupported version");
  r.u32();
  const auto p = r.u64();
  const auto l = r.u64();
  detail::check_size(p, 1ull << 26, "atom count");
  detail::check_size(l, 1ull << 24, "sequence length");
  detail::check_size(p * l, 1ull << 30, "dictionary size");
  const auto hash = r.u64();
  auto grid = r.string();
  ExcitationSequence e;
  e.flip_angles = r.f64s(l);
  e.rep_times = r.f64s(l);
  if (e.hash() != hash) throw IoError("dictionary: excitation hash mismatch");
  auto atoms = r.complexes(p * l);
  std::vector<TissueParams> lut(p);
  for (auto& t : lut) {
    t.t1 = r.f64();
    t.t2 = r.f64();
    t.df = r.f64();
  }
  r.expect_eof();
  return BlochDictionary(std::move(atoms), std::move(lut), std::move(e), std::move(grid));
}

}  // namespace blip
