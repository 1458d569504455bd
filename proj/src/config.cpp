#include "blip/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "binary_io.hpp"
#include "blip/error.hpp"
#include "blip/seeds.hpp"

namespace blip {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

std::string index(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) fail(join(path, it.key()), "unknown field");
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(path, "must be finite");
  return d;
}

std::uint64_t get_u64(const json& v, const std::string& path) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    fail(path, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::size_t get_positive(const json& v, const std::string& path) {
  const auto n = get_u64(v, path);
  if (n == 0) fail(path, "must be >= 1");
  return static_cast<std::size_t>(n);
}

std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

std::vector<std::size_t> get_positive_list(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_positive(v[i], index(path, i)));
  return out;
}

Dims get_dims(const json& v, const std::string& path) {
  const auto e = get_positive_list(v, path);
  if (e.size() > 2) fail(path, "rank must be 1 or 2");
  return Dims(e);
}

AxisSpec get_axis(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of [start, stop, step]");
  AxisSpec axis;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto p = index(path, i);
    const auto& s = v[i];
    if (!s.is_array() || s.size() != 3) fail(p, "expected [start, stop, step]");
    AxisSegment seg{get_number(s[0], p + "[0]"), get_number(s[1], p + "[1]"),
                    get_number(s[2], p + "[2]")};
    if (seg.step < 0.0) fail(p, "step must be >= 0");
    if (seg.stop < seg.start) fail(p, "stop < start");
    if (seg.step == 0.0 && seg.start != seg.stop) fail(p, "step 0 requires start == stop");
    axis.segments.push_back(seg);
  }
  return axis;
}

json axis_json(const AxisSpec& a) {
  json out = json::array();
  for (const auto& s : a.segments) out.push_back({s.start, s.stop, s.step});
  return out;
}

void parse_phantom(const json& j, const std::string& path, PhantomSpec& ph) {
  check_keys(j, path, {"kind", "dims", "tissues", "file", "seed"});
  if (j.contains("kind")) {
    try {
      ph.kind = parse_phantom_kind(get_string(j["kind"], join(path, "kind")));
    } catch (const ConfigError& e) {
      fail(join(path, "kind"), e.what());
    }
  }
  if (j.contains("dims")) ph.dims = get_dims(j["dims"], join(path, "dims"));
  if (j.contains("file")) ph.file = get_string(j["file"], join(path, "file"));
  if (ph.kind == PhantomKind::file && ph.file.empty()) fail(join(path, "file"), "required for kind \"file\"");
  if (j.contains("seed")) ph.seed = get_u64(j["seed"], join(path, "seed"));
  if (j.contains("tissues")) {
    const auto tp = join(path, "tissues");
    const auto& arr = j["tissues"];
    if (!arr.is_array() || arr.empty()) fail(tp, "expected a non-empty array");
    ph.tissues.clear();
    std::set<int> seen;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto p = index(tp, i);
      check_keys(arr[i], p, {"label", "t1", "t2", "df", "rho"});
      for (const char* k : {"label", "t1", "t2", "rho"})
        if (!arr[i].contains(k)) fail(join(p, k), "missing");
      const auto& lv = arr[i]["label"];
      if (!lv.is_number_integer()) fail(join(p, "label"), "expected an integer");
      TissueSpec t;
      t.label = lv.get<int>();
      t.params.t1 = get_number(arr[i]["t1"], join(p, "t1"));
      t.params.t2 = get_number(arr[i]["t2"], join(p, "t2"));
      t.params.df = arr[i].contains("df") ? get_number(arr[i]["df"], join(p, "df")) : 0.0;
      t.rho = get_number(arr[i]["rho"], join(p, "rho"));
      try {
        t.validate();
      } catch (const Error& e) {
        fail(p, e.what());
      }
      if (!seen.insert(t.label).second) fail(join(p, "label"), "duplicate label " + std::to_string(t.label));
      ph.tissues.push_back(t);
    }
  }
}

void parse_excitation(const json& j, const std::string& path, ExcitationSpec& ex) {
  check_keys(j, path, {"length", "flip_std_deg", "tr_ms", "seed"});
  if (j.contains("length")) ex.length = get_positive(j["length"], join(path, "length"));
  if (j.contains("flip_std_deg")) {
    ex.flip_std_deg = get_number(j["flip_std_deg"], join(path, "flip_std_deg"));
    if (!(ex.flip_std_deg > 0.0)) fail(join(path, "flip_std_deg"), "must be > 0");
  }
  if (j.contains("tr_ms")) {
    ex.tr_ms = get_number(j["tr_ms"], join(path, "tr_ms"));
    if (!(ex.tr_ms > 0.0)) fail(join(path, "tr_ms"), "must be > 0");
  }
  if (j.contains("seed")) ex.seed = get_u64(j["seed"], join(path, "seed"));
}

void parse_grid(const json& j, const std::string& path, ParameterGrid& g) {
  check_keys(j, path, {"t1", "t2", "df"});
  if (j.contains("t1")) g.t1 = get_axis(j["t1"], join(path, "t1"));
  if (j.contains("t2")) g.t2 = get_axis(j["t2"], join(path, "t2"));
  if (j.contains("df")) g.df = get_axis(j["df"], join(path, "df"));
  for (auto v : g.t1.values())
    if (!(v > 0.0)) fail(join(path, "t1"), "values must be > 0");
  for (auto v : g.t2.values())
    if (!(v > 0.0)) fail(join(path, "t2"), "values must be > 0");
}

void parse_sampling(const json& j, const std::string& path, SamplingSpec& s) {
  check_keys(j, path, {"p", "axis", "seed"});
  if (j.contains("p")) s.p = get_positive(j["p"], join(path, "p"));
  if (j.contains("axis")) s.axis = static_cast<std::size_t>(get_u64(j["axis"], join(path, "axis")));
  if (j.contains("seed")) s.seed = get_u64(j["seed"], join(path, "seed"));
}

void parse_recon(const json& j, const std::string& path, ReconConfig& r) {
  check_keys(j, path, {"max_iters", "stepsize", "mu", "halt_tol"});
  if (j.contains("max_iters")) r.max_iters = get_positive(j["max_iters"], join(path, "max_iters"));
  if (j.contains("stepsize")) {
    const auto s = get_string(j["stepsize"], join(path, "stepsize"));
    if (s == "adaptive") r.mode = StepsizeMode::adaptive;
    else if (s == "fixed") r.mode = StepsizeMode::fixed;
    else fail(join(path, "stepsize"), "expected \"adaptive\" or \"fixed\", got \"" + s + "\"");
  }
  if (j.contains("mu")) {
    r.mu = get_number(j["mu"], join(path, "mu"));
    if (r.mu < 0.0) fail(join(path, "mu"), "must be >= 0 (0 selects N/M)");
    if (r.mode != StepsizeMode::fixed) fail(join(path, "mu"), "only valid with stepsize \"fixed\"");
  }
  if (j.contains("halt_tol")) {
    r.halt_tol = get_number(j["halt_tol"], join(path, "halt_tol"));
    if (r.halt_tol < 0.0) fail(join(path, "halt_tol"), "must be >= 0");
  }
}

void parse_study(const json& j, const std::string& path, StudySpec& s) {
  check_keys(j, path, {"lengths", "factors", "trials", "threshold_db"});
  if (!j.contains("lengths")) fail(join(path, "lengths"), "missing");
  if (!j.contains("factors")) fail(join(path, "factors"), "missing");
  s.lengths = get_positive_list(j["lengths"], join(path, "lengths"));
  s.factors = get_positive_list(j["factors"], join(path, "factors"));
  if (j.contains("trials")) s.trials = get_positive(j["trials"], join(path, "trials"));
  if (j.contains("threshold_db")) s.threshold_db = get_number(j["threshold_db"], join(path, "threshold_db"));
}

void parse_flatness(const json& j, const std::string& path, FlatnessSpec& f) {
  check_keys(j, path, {"lengths", "num_chords"});
  if (j.contains("lengths")) f.lengths = get_positive_list(j["lengths"], join(path, "lengths"));
  if (j.contains("num_chords")) f.num_chords = get_positive(j["num_chords"], join(path, "num_chords"));
}

void check_factor(std::size_t p, std::size_t axis, const Dims& dims, const std::string& path) {
  if (axis >= dims.rank())
    fail("sampling.axis", std::to_string(axis) + " exceeds phantom rank " + std::to_string(dims.rank()));
  if (dims[axis] % p != 0)
    fail(path, std::to_string(p) + " does not divide phantom.dims[" + std::to_string(axis) +
                   "] = " + std::to_string(dims[axis]));
}

const char* mode_name(StepsizeMode m) { return m == StepsizeMode::fixed ? "fixed" : "adaptive"; }

const char* kind_name(PhantomKind k) {
  switch (k) {
    case PhantomKind::concentric: return "concentric";
    case PhantomKind::blocks: return "blocks";
    case PhantomKind::file: return "file";
  }
  return "?";
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::single_run: return "single_run";
    case ExperimentKind::scaling_study: return "scaling_study";
    case ExperimentKind::flatness: return "flatness";
  }
  return "?";
}

std::string ExperimentConfig::canonical_json() const {
  json j;
  j["experiment"] = to_string(kind);
  j["seed"] = seed;
  json tissues = json::array();
  for (const auto& t : phantom.tissues)
    tissues.push_back({{"label", t.label}, {"t1", t.params.t1}, {"t2", t.params.t2},
                       {"df", t.params.df}, {"rho", t.rho}});
  j["phantom"] = {{"kind", kind_name(phantom.kind)},
                  {"dims", phantom.dims.extents},
                  {"tissues", tissues},
                  {"seed", phantom.seed}};
  if (phantom.kind == PhantomKind::file) j["phantom"]["file"] = phantom.file.string();
  j["excitation"] = {{"length", excitation.length},
                     {"flip_std_deg", excitation.flip_std_deg},
                     {"tr_ms", excitation.tr_ms},
                     {"seed", excitation.seed}};
  j["dictionary"] = {{"t1", axis_json(grid.t1)}, {"t2", axis_json(grid.t2)}, {"df", axis_json(grid.df)}};
  j["sampling"] = {{"p", sampling.p}, {"axis", sampling.axis}, {"seed", sampling.seed}};
  j["recon"] = {{"max_iters", recon.max_iters},
                {"stepsize", mode_name(recon.mode)},
                {"halt_tol", recon.halt_tol}};
  if (recon.mode == StepsizeMode::fixed) j["recon"]["mu"] = recon.mu;
  if (kind == ExperimentKind::scaling_study)
    j["study"] = {{"lengths", study.lengths},
                  {"factors", study.factors},
                  {"trials", study.trials},
                  {"threshold_db", study.threshold_db}};
  if (kind == ExperimentKind::flatness)
    j["flatness"] = {{"lengths", flatness.lengths}, {"num_chords", flatness.num_chords}};
  return j.dump();
}

std::uint64_t ExperimentConfig::hash() const {
  const auto s = canonical_json();
  return detail::fnv1a(s.data(), s.size());
}

ExperimentConfig parse_config(const std::string& text, const ConfigOverrides& overrides) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  check_keys(j, "", {"experiment", "seed", "output_dir", "phantom", "excitation", "dictionary",
                     "sampling", "recon", "study", "flatness"});

  ExperimentConfig c;
  if (!j.contains("experiment")) fail("experiment", "missing");
  const auto kind = get_string(j["experiment"], "experiment");
  if (kind == "single_run") c.kind = ExperimentKind::single_run;
  else if (kind == "scaling_study") c.kind = ExperimentKind::scaling_study;
  else if (kind == "flatness") c.kind = ExperimentKind::flatness;
  else fail("experiment", "expected single_run, scaling_study or flatness, got \"" + kind + "\"");

  if (j.contains("seed")) c.seed = get_u64(j["seed"], "seed");
  if (overrides.seed) c.seed = *overrides.seed;
  if (j.contains("output_dir")) c.output_dir = get_string(j["output_dir"], "output_dir");
  if (overrides.output_dir) c.output_dir = *overrides.output_dir;

  // Sub-seeds derive from the master unless given explicitly.
  c.phantom.seed = derive_seed(c.seed, {1});
  c.excitation.seed = derive_seed(c.seed, {2});
  c.sampling.seed = derive_seed(c.seed, {3});

  if (j.contains("phantom")) parse_phantom(j["phantom"], "phantom", c.phantom);
  if (j.contains("excitation")) parse_excitation(j["excitation"], "excitation", c.excitation);
  if (j.contains("dictionary")) parse_grid(j["dictionary"], "dictionary", c.grid);
  if (j.contains("sampling")) parse_sampling(j["sampling"], "sampling", c.sampling);
  if (j.contains("recon")) parse_recon(j["recon"], "recon", c.recon);

  if (c.kind == ExperimentKind::scaling_study) {
    if (!j.contains("study")) fail("study", "required for scaling_study");
    parse_study(j["study"], "study", c.study);
  } else if (j.contains("study")) {
    fail("study", "only valid for scaling_study");
  }
  if (j.contains("flatness")) {
    if (c.kind != ExperimentKind::flatness) fail("flatness", "only valid for flatness");
    parse_flatness(j["flatness"], "flatness", c.flatness);
  }

  if (c.phantom.kind == PhantomKind::file) {
    if (!std::filesystem::exists(c.phantom.file))
      fail("phantom.file", "not found: " + c.phantom.file.string());
    if (!j["phantom"].contains("dims")) c.phantom.dims = Dims{};
  }
  if (c.phantom.kind != PhantomKind::file || c.phantom.dims.rank() > 0) {
    if (c.kind == ExperimentKind::scaling_study) {
      for (std::size_t i = 0; i < c.study.factors.size(); ++i)
        check_factor(c.study.factors[i], c.sampling.axis, c.phantom.dims, index("study.factors", i));
    } else if (c.kind == ExperimentKind::single_run) {
      check_factor(c.sampling.p, c.sampling.axis, c.phantom.dims, "sampling.p");
    }
  }

  std::size_t feasible = 0;
  const auto t1 = c.grid.t1.values();
  const auto t2 = c.grid.t2.values();
  for (double a : t1)
    for (double b : t2)
      if (b <= a) ++feasible;
  if (feasible == 0) fail("dictionary", "no (t1, t2) pair with t2 <= t1");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

}  // namespace blip
