#include "blip/phantom.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "binary_io.hpp"

namespace blip {

void TissueSpec::validate() const {
  if (!params.valid())
    throw DomainError("tissue " + std::to_string(label) + ": invalid T1/T2/df");
  if (!(rho >= 0.0) || !std::isfinite(rho))
    throw DomainError("tissue " + std::to_string(label) + ": rho must be >= 0");
}

void PhantomDefinition::validate() const {
  if (!dims.valid()) throw DimensionError("phantom: dims must be 1D or 2D and positive");
  if (labels.size() != dims.size()) throw DimensionError("phantom: label map size != dims");
  if (tissues.empty()) throw ConfigError("phantom: at least one tissue is required");
  std::set<int> known;
  for (const auto& t : tissues) {
    t.validate();
    if (!known.insert(t.label).second)
      throw ConfigError("phantom: duplicate tissue label " + std::to_string(t.label));
  }
  for (int l : labels)
    if (!known.count(l)) throw IngestionError("phantom: unknown label " + std::to_string(l));
}

const TissueSpec& PhantomDefinition::tissue(int label) const {
  for (const auto& t : tissues)
    if (t.label == label) return t;
  throw IngestionError("phantom: unknown label " + std::to_string(label));
}

PhantomKind parse_phantom_kind(const std::string& name) {
  if (name == "concentric") return PhantomKind::concentric;
  if (name == "blocks") return PhantomKind::blocks;
  if (name == "file") return PhantomKind::file;
  throw ConfigError("unknown phantom kind '" + name + "'");
}

std::vector<TissueSpec> default_brain_tissues() {
  return {
      {4, {370.0, 135.0, 0.0}, 0.90},    // fat / scalp
      {5, {870.0, 45.0, 0.0}, 0.75},     // muscle
      {3, {4150.0, 1650.0, 0.0}, 1.00},  // CSF
      {2, {1210.0, 95.0, 0.0}, 0.80},    // gray matter
      {1, {790.0, 75.0, 0.0}, 0.65},     // white matter
      {6, {1590.0, 215.0, 0.0}, 0.70},   // deep gray / vessels
  };
}

namespace {

PhantomDefinition concentric(const Dims& dims, const std::vector<TissueSpec>& tissues,
                             std::uint64_t seed) {
  const std::size_t shells = tissues.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.2, 0.2);
  // Boundaries in normalized radius; shell s spans [edge[s+1], edge[s]).
  // r = 1 touches the edge midpoints, the corners sit at sqrt(2).
  std::vector<double> edge(shells + 1);
  const double width = 1.0 / static_cast<double>(shells);
  for (std::size_t s = 0; s <= shells; ++s)
    edge[s] = 1.0 - static_cast<double>(s) * width;
  for (std::size_t s = 1; s < shells; ++s) edge[s] += jitter(rng) * width;

  const bool two_d = dims.rank() == 2;
  const std::size_t rows = two_d ? dims[0] : 1;
  const std::size_t cols = two_d ? dims[1] : dims[0];
  PhantomDefinition ph;
  ph.dims = dims;
  ph.tissues = tissues;
  ph.labels.resize(dims.size());
  const double cy = 0.5 * static_cast<double>(rows);
  const double cx = 0.5 * static_cast<double>(cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double dy = two_d ? (static_cast<double>(r) + 0.5 - cy) / cy : 0.0;
      const double dx = (static_cast<double>(c) + 0.5 - cx) / cx;
      const double radius = std::sqrt(dx * dx + dy * dy);
      std::size_t shell = 0;
      while (shell + 1 < shells && radius < edge[shell + 1]) ++shell;
      ph.labels[r * cols + c] = tissues[shell].label;
    }
  return ph;
}

PhantomDefinition blocks(const Dims& dims, const std::vector<TissueSpec>& tissues,
                         std::uint64_t seed) {
  const bool two_d = dims.rank() == 2;
  const std::size_t rows = two_d ? dims[0] : 1;
  const std::size_t cols = two_d ? dims[1] : dims[0];
  const auto side = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(tissues.size()))));
  const std::size_t brows = two_d ? std::max<std::size_t>(2, side) : 1;
  const std::size_t bcols = two_d ? std::max<std::size_t>(2, side) : std::max<std::size_t>(2, tissues.size());
  if (brows > rows || bcols > cols)
    throw DimensionError("phantom: grid too small for the block layout");

  std::vector<int> assignment(brows * bcols);
  for (std::size_t b = 0; b < assignment.size(); ++b)
    assignment[b] = tissues[b % tissues.size()].label;
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit draw so the order is stable across
  // standard library implementations of std::shuffle.
  for (std::size_t b = assignment.size(); b > 1; --b) {
    const std::size_t j = rng() % b;
    std::swap(assignment[b - 1], assignment[j]);
  }

  PhantomDefinition ph;
  ph.dims = dims;
  ph.tissues = tissues;
  ph.labels.resize(dims.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t br = r * brows / rows;
      const std::size_t bc = c * bcols / cols;
      ph.labels[r * cols + c] = assignment[br * bcols + bc];
    }
  return ph;
}

}  // namespace

PhantomDefinition synth_phantom(PhantomKind kind, const Dims& dims,
                                const std::vector<TissueSpec>& tissues, std::uint64_t seed,
                                const std::filesystem::path& file) {
  if (kind == PhantomKind::file) {
    auto ph = PhantomDefinition::load(file);
    if (!dims.extents.empty() && !(dims == ph.dims))
      throw DimensionError("phantom: file dims differ from the configured dims");
    return ph;
  }
  if (tissues.empty()) throw ConfigError("phantom: at least one tissue is required");
  if (!dims.valid()) throw DimensionError("phantom: dims must be 1D or 2D and positive");
  for (const auto& t : tissues) t.validate();
  auto ph = kind == PhantomKind::concentric ? concentric(dims, tissues, seed)
                                            : blocks(dims, tissues, seed);
  ph.validate();
  return ph;
}

GroundTruth ground_truth_sequence(const PhantomDefinition& phantom,
                                  const ExcitationSequence& excitation) {
  phantom.validate();
  excitation.validate();
  std::map<int, std::vector<Complex>> responses;
  for (const auto& t : phantom.tissues) {
    try {
      responses[t.label] = scale_response(t.rho, simulate_response(t.params, excitation));
    } catch (const SimulationError& e) {
      // Report the first voxel carrying the failing tissue.
      const auto it = std::find(phantom.labels.begin(), phantom.labels.end(), t.label);
      if (it == phantom.labels.end()) continue;
      throw SimulationError(std::string(e.what()) + " (voxel " +
                                std::to_string(it - phantom.labels.begin()) + ")",
                            e.time_index());
    }
  }
  GroundTruth gt{MagnetizationSequence(phantom.dims, excitation.length()),
                 ParameterMaps(phantom.dims)};
  for (std::size_t i = 0; i < phantom.labels.size(); ++i) {
    const auto& t = phantom.tissue(phantom.labels[i]);
    const auto& row = responses.at(t.label);
    std::copy(row.begin(), row.end(), gt.x.row(i).begin());
    gt.maps.rho[i] = t.rho;
    gt.maps.t1[i] = t.params.t1;
    gt.maps.t2[i] = t.params.t2;
    gt.maps.df[i] = t.params.df;
  }
  return gt;
}

// ---------------------------------------------------------------------------
// I/O

namespace {

std::string fmt(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

double parse_num(const std::string& tok) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw IngestionError("phantom: bad number '" + tok + "'");
  return v;
}

long long parse_int(const std::string& tok) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw IngestionError("phantom: bad integer '" + tok + "'");
  return v;
}

PhantomDefinition load_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    for (std::string tok; ls >> tok;) tokens.push_back(tok);
  }
  std::size_t pos = 0;
  auto next = [&]() -> const std::string& {
    if (pos >= tokens.size()) throw IngestionError("phantom: unexpected end of file");
    return tokens[pos++];
  };
  if (next() != "dims") throw IngestionError("phantom: expected 'dims'");
  std::vector<std::size_t> ext;
  while (pos < tokens.size() && tokens[pos] != "tissues")
    ext.push_back(static_cast<std::size_t>(parse_int(next())));
  PhantomDefinition ph;
  ph.dims = Dims(ext);
  if (!ph.dims.valid()) throw IngestionError("phantom: bad dims");
  next();  // "tissues"
  const auto count = parse_int(next());
  if (count < 1 || count > 1 << 16) throw IngestionError("phantom: bad tissue count");
  for (long long k = 0; k < count; ++k) {
    TissueSpec t;
    t.label = static_cast<int>(parse_int(next()));
    t.params.t1 = parse_num(next());
    t.params.t2 = parse_num(next());
    t.params.df = parse_num(next());
    t.rho = parse_num(next());
    ph.tissues.push_back(t);
  }
  if (next() != "labels") throw IngestionError("phantom: expected 'labels'");
  ph.labels.reserve(ph.dims.size());
  while (pos < tokens.size()) ph.labels.push_back(static_cast<int>(parse_int(next())));
  if (ph.labels.size() != ph.dims.size())
    throw IngestionError("phantom: expected " + std::to_string(ph.dims.size()) + " labels, got " +
                         std::to_string(ph.labels.size()));
  return ph;
}

PhantomDefinition load_binary(const std::filesystem::path& path) {
  detail::BinaryReader r(path);
  r.expect_magic("BLIPPHN1");
  if (r.u32() != 1) throw IoError("phantom: unsupported version");
  const auto rank = r.u32();
  if (rank < 1 || rank > 2) throw IoError("phantom: bad rank");
  std::vector<std::size_t> ext(rank);
  for (auto& e : ext) {
    e = r.u64();
    detail::check_size(e, 1ull << 20, "extent");
  }
  PhantomDefinition ph;
  ph.dims = Dims(ext);
  const auto count = r.u64();
  detail::check_size(count, 1ull << 16, "tissue count");
  for (std::uint64_t k = 0; k < count; ++k) {
    TissueSpec t;
    t.label = r.i32();
    r.u32();
    t.params.t1 = r.f64();
    t.params.t2 = r.f64();
    t.params.df = r.f64();
    t.rho = r.f64();
    ph.tissues.push_back(t);
  }
  ph.labels.resize(ph.dims.size());
  for (auto& l : ph.labels) l = r.i32();
  r.expect_eof();
  return ph;
}

}  // namespace

void PhantomDefinition::save_text(const std::filesystem::path& path) const {
  validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "# blip phantom v1\ndims";
  for (auto e : dims.extents) out << ' ' << e;
  out << "\ntissues " << tissues.size() << '\n';
  for (const auto& t : tissues)
    out << t.label << ' ' << fmt(t.params.t1) << ' ' << fmt(t.params.t2) << ' '
        << fmt(t.params.df) << ' ' << fmt(t.rho) << '\n';
  out << "labels\n";
  const std::size_t cols = dims.rank() == 2 ? dims[1] : dims[0];
  for (std::size_t i = 0; i < labels.size(); ++i)
    out << labels[i] << ((i + 1) % cols == 0 ? '\n' : ' ');
  if (!out) throw IoError("write failed: " + path.string());
}

void PhantomDefinition::save_binary(const std::filesystem::path& path) const {
  validate();
  detail::BinaryWriter w(path);
  w.magic("BLIPPHN1");
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(dims.rank()));
  for (auto e : dims.extents) w.u64(e);
  w.u64(tissues.size());
  for (const auto& t : tissues) {
    w.i32(t.label);
    w.u32(0);
    w.f64(t.params.t1);
    w.f64(t.params.t2);
    w.f64(t.params.df);
    w.f64(t.rho);
  }
  for (int l : labels) w.i32(l);
}

PhantomDefinition PhantomDefinition::load(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open for reading: " + path.string());
  char head[8] = {};
  probe.read(head, sizeof head);
  probe.close();
  auto ph = std::string(head, 8) == "BLIPPHN1" ? load_binary(path) : load_text(path);
  ph.validate();
  return ph;
}

}  // namespace blip
