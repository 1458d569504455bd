#include "blip/projection.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "blip/parallel.hpp"

namespace blip {

namespace {

void check_length(std::size_t got, const BlochDictionary& dict) {
  if (got != dict.length())
    throw DimensionError("projection: sequence length " + std::to_string(got) +
                         " does not match dictionary length " + std::to_string(dict.length()));
}

// Shared tail of both paths: given the correlations of one voxel, pick the
// atom and clamp the density.
void select_atom(const double* corr, const BlochDictionary& dict, std::size_t& index,
                 double& rho) {
  const auto& norms = dict.atom_norms();
  std::size_t best = 0;
  double best_score = corr[0] / norms[0];
  for (std::size_t k = 1; k < dict.size(); ++k) {
    const double score = corr[k] / norms[k];
    if (score > best_score) {
      best_score = score;
      best = k;
    }
  }
  index = best;
  rho = std::max(corr[best] / dict.atom_norms_sq()[best], 0.0);
}

void scaled_atom(const BlochDictionary& dict, std::size_t k, double rho, std::span<Complex> out) {
  const auto atom = dict.atom(k);
  for (std::size_t t = 0; t < atom.size(); ++t) out[t] = atom[t] * rho;
}

}  // namespace

ProjectionResult project_voxel(std::span<const Complex> x, const BlochDictionary& dict) {
  check_length(x.size(), dict);
  std::vector<double> corr(dict.size());
  for (std::size_t k = 0; k < dict.size(); ++k) {
    const auto atom = dict.atom(k);
    double acc = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
      const double prod_re = atom[t].real() * x[t].real();
      const double prod_im = atom[t].imag() * x[t].imag();
      acc = acc + (prod_re + prod_im);
    }
    corr[k] = acc;
  }
  ProjectionResult r;
  select_atom(corr.data(), dict, r.atom_index, r.rho);
  r.projected.resize(x.size());
  scaled_atom(dict, r.atom_index, r.rho, r.projected);
  return r;
}

MatchedFilter::MatchedFilter(const BlochDictionary& dict, simd::Isa isa)
    : dict_(&dict),
      isa_(simd::isa_available(isa) ? isa : simd::Isa::scalar),
      kernel_(simd::correlate_kernel(isa_)) {
  constexpr std::size_t W = simd::kAtomsPerBlock;
  const std::size_t p = dict.size();
  const std::size_t l = dict.length();
  num_blocks_ = (p + W - 1) / W;
  // Padding lanes hold zeros; select_atom never reads them.
  blocks_.assign(num_blocks_ * l * 2 * W, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    const std::size_t b = k / W;
    const std::size_t lane = k % W;
    const auto atom = dict.atom(k);
    double* blk = blocks_.data() + b * l * 2 * W;
    for (std::size_t t = 0; t < l; ++t) {
      blk[t * 2 * W + lane] = atom[t].real();
      blk[t * 2 * W + W + lane] = atom[t].imag();
    }
  }
}

void MatchedFilter::match_tile(std::span<const std::span<const Complex>> rows,
                               std::span<std::size_t> index, std::span<double> rho) const {
  constexpr std::size_t W = simd::kAtomsPerBlock;
  const std::size_t v = rows.size();
  if (v == 0 || v > simd::kMaxVoxelTile || index.size() < v || rho.size() < v)
    throw DimensionError("match_tile: bad tile size");
  const std::size_t l = dict_->length();
  for (const auto& r : rows) check_length(r.size(), *dict_);

  std::vector<double> xr(v * l), xi(v * l);
  for (std::size_t j = 0; j < v; ++j)
    for (std::size_t t = 0; t < l; ++t) {
      xr[j * l + t] = rows[j][t].real();
      xi[j * l + t] = rows[j][t].imag();
    }
  std::vector<double> corr(v * num_blocks_ * W);
  simd::CorrelateArgs args;
  args.blocks = blocks_.data();
  args.num_blocks = num_blocks_;
  args.length = l;
  args.x_re = xr.data();
  args.x_im = xi.data();
  args.voxels = v;
  args.corr = corr.data();
  kernel_(args);
  for (std::size_t j = 0; j < v; ++j)
    select_atom(corr.data() + j * num_blocks_ * W, *dict_, index[j], rho[j]);
}

ProjectionResult MatchedFilter::project(std::span<const Complex> x) const {
  ProjectionResult r;
  const std::array<std::span<const Complex>, 1> rows{x};
  match_tile(rows, std::span(&r.atom_index, 1), std::span(&r.rho, 1));
  r.projected.resize(x.size());
  scaled_atom(*dict_, r.atom_index, r.rho, r.projected);
  return r;
}

ImageProjection project_image(const MagnetizationSequence& x, const MatchedFilter& filter) {
  const auto& dict = filter.dictionary();
  if (x.frames() != dict.length())
    throw DimensionError("project_image: image has " + std::to_string(x.frames()) +
                         " frames, dictionary length is " + std::to_string(dict.length()));
  const std::size_t n = x.voxels();
  constexpr std::size_t T = simd::kMaxVoxelTile;

  ImageProjection out;
  out.projected = MagnetizationSequence(x.dims(), x.frames());
  out.maps = ParameterMaps(x.dims());
  out.atom_index.assign(n, 0);

  const std::size_t tiles = (n + T - 1) / T;
  parallel_for(tiles, [&](std::size_t begin, std::size_t end) {
    for (std::size_t tile = begin; tile < end; ++tile) {
      const std::size_t first = tile * T;
      const std::size_t count = std::min(T, n - first);
      std::array<std::span<const Complex>, T> rows;
      for (std::size_t j = 0; j < count; ++j) rows[j] = x.row(first + j);
      std::array<std::size_t, T> idx{};
      std::array<double, T> rho{};
      filter.match_tile(std::span(rows.data(), count), idx, rho);
      for (std::size_t j = 0; j < count; ++j) {
        const std::size_t i = first + j;
        out.atom_index[i] = idx[j];
        out.maps.rho[i] = rho[j];
        const auto& p = dict.lut()[idx[j]];
        out.maps.t1[i] = p.t1;
        out.maps.t2[i] = p.t2;
        out.maps.df[i] = p.df;
        scaled_atom(dict, idx[j], rho[j], out.projected.row(i));
      }
    }
  });
  return out;
}

ImageProjection project_image(const MagnetizationSequence& x, const BlochDictionary& dict) {
  const MatchedFilter filter(dict);
  return project_image(x, filter);
}

// ---------------------------------------------------------------------------
// ParameterMaps I/O

void ParameterMaps::validate() const {
  if (!dims.valid()) throw DimensionError("parameter maps: invalid dims");
  const auto n = dims.size();
  if (rho.size() != n || t1.size() != n || t2.size() != n || df.size() != n)
    throw DimensionError("parameter maps: array length differs from dims");
  for (double r : rho)
    if (!(r >= 0.0)) throw DomainError("parameter maps: negative or NaN density");
}

void ParameterMaps::save(const std::filesystem::path& path, std::uint64_t config_hash) const {
  validate();
  detail::BinaryWriter w(path);
  w.magic("BLIPMAP1");
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(dims.rank()));
  for (auto e : dims.extents) w.u64(e);
  w.u64(config_hash);
  w.string(kParameterUnits);
  w.f64s(rho);
  w.f64s(t1);
  w.f64s(t2);
  w.f64s(df);
}

ParameterMaps ParameterMaps::load(const std::filesystem::path& path, std::uint64_t* config_hash) {
  detail::BinaryReader r(path);
  r.expect_magic("BLIPMAP1");
  if (r.u32() != 1) throw IoError("maps: unsupported version");
  const auto rank = r.u32();
  if (rank < 1 || rank > 2) throw IoError("maps: bad rank");
  std::vector<std::size_t> ext(rank);
  for (auto& e : ext) {
    e = r.u64();
    detail::check_size(e, 1ull << 20, "extent");
  }
  ParameterMaps m{Dims(ext)};
  const auto hash = r.u64();
  if (config_hash) *config_hash = hash;
  if (r.string() != kParameterUnits) throw IoError("maps: unexpected units");
  const auto n = m.dims.size();
  m.rho = r.f64s(n);
  m.t1 = r.f64s(n);
  m.t2 = r.f64s(n);
  m.df = r.f64s(n);
  r.expect_eof();
  m.validate();
  return m;
}

namespace {

std::string fmt(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

}  // namespace

void ParameterMaps::save_text(const std::filesystem::path& path, std::uint64_t config_hash) const {
  validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash));
  out << "# blip parameter maps v1\n# config_hash " << hash << "\n";
  out << "dims";
  for (auto e : dims.extents) out << ' ' << e;
  out << "\nunits " << kParameterUnits << "\n";
  const std::size_t cols = dims.rank() == 2 ? dims[1] : dims[0];
  const std::size_t rows = dims.size() / cols;
  const std::pair<const char*, const std::vector<double>*> blocks[] = {
      {"rho", &rho}, {"t1", &t1}, {"t2", &t2}, {"df", &df}};
  for (const auto& [name, values] : blocks) {
    out << name << '\n';
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        if (c) out << ' ';
        out << fmt((*values)[r * cols + c]);
      }
      out << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

ParameterMaps ParameterMaps::load_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::string line;
  auto next_line = [&]() -> std::string {
    while (std::getline(in, line)) {
      if (!line.empty() && line[0] != '#') return line;
    }
    throw IoError("maps text: unexpected end of file");
  };
  std::istringstream dl(next_line());
  std::string key;
  dl >> key;
  if (key != "dims") throw IoError("maps text: expected dims");
  std::vector<std::size_t> ext;
  for (std::size_t e; dl >> e;) ext.push_back(e);
  ParameterMaps m{Dims(ext)};
  if (!m.dims.valid()) throw IoError("maps text: bad dims");
  if (next_line() != std::string("units ") + kParameterUnits) throw IoError("maps text: bad units");
  std::vector<double>* targets[] = {&m.rho, &m.t1, &m.t2, &m.df};
  const char* names[] = {"rho", "t1", "t2", "df"};
  const auto n = m.dims.size();
  for (int b = 0; b < 4; ++b) {
    if (next_line() != names[b]) throw IoError(std::string("maps text: expected ") + names[b]);
    std::size_t filled = 0;
    while (filled < n) {
      std::istringstream row(next_line());
      std::string tok;
      while (row >> tok) {
        if (filled >= n) throw IoError("maps text: too many values");
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || ptr != tok.data() + tok.size())
          throw IoError("maps text: bad number '" + tok + "'");
        (*targets[b])[filled++] = v;
      }
    }
  }
  m.validate();
  return m;
}

}  // namespace blip
