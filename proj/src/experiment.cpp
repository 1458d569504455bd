#include "blip/experiment.hpp"

#include <cstdio>
#include <fstream>

#include "blip/recon.hpp"
#include "blip/sampling.hpp"
#include "blip/seeds.hpp"

namespace blip {

namespace fs = std::filesystem;

namespace {

void prepare_dir(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  f << text;
  if (!f) throw IoError("write failed: " + path.string());
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void put_errors(std::string& s, const std::string& prefix, const MapErrors& e) {
  const std::pair<const char*, const ParamError*> rows[] = {
      {"rho", &e.rho}, {"t1", &e.t1}, {"t2", &e.t2}, {"df", &e.df}};
  for (const auto& [name, p] : rows) {
    s += prefix + "." + name + ".median = " + num(p->median) + "\n";
    s += prefix + "." + name + ".mean = " + num(p->mean) + "\n";
    s += prefix + "." + name + ".max = " + num(p->max) + "\n";
  }
}

void write_maps(const fs::path& out, const std::string& stem, const ParameterMaps& m,
                std::uint64_t hash, bool rasters) {
  m.save(out / (stem + "_maps.bin"), hash);
  m.save_text(out / (stem + "_maps.txt"), hash);
  if (!rasters) return;
  const std::pair<const char*, const std::vector<double>*> params[] = {
      {"rho", &m.rho}, {"t1", &m.t1}, {"t2", &m.t2}};
  for (const auto& [name, values] : params) {
    const auto w = raster_window(name);
    write_pgm(out / (stem + "_" + name + ".pgm"), m.dims, *values, w.lo, w.hi);
  }
}

}  // namespace

PhantomDefinition make_phantom(const ExperimentConfig& cfg) {
  return synth_phantom(cfg.phantom.kind, cfg.phantom.dims, cfg.phantom.tissues, cfg.phantom.seed,
                       cfg.phantom.file);
}

ExcitationSequence make_excitation(const ExperimentConfig& cfg) {
  return random_excitation(cfg.excitation.length, cfg.excitation.flip_std_deg,
                           cfg.excitation.tr_ms, cfg.excitation.seed);
}

SingleRunSummary run_single(const ExperimentConfig& cfg, const fs::path& out, bool rasters) {
  const auto hash = cfg.hash();
  const auto phantom = make_phantom(cfg);
  if (cfg.sampling.axis >= phantom.dims.rank() || phantom.dims[cfg.sampling.axis] % cfg.sampling.p)
    throw ConfigError("sampling.p: does not divide the phantom extent along sampling.axis");
  const auto exc = make_excitation(cfg);
  const auto dict = build_dictionary(cfg.grid, exc);
  const MatchedFilter filter(dict);
  const auto gt = ground_truth_sequence(phantom, exc);
  const auto plan = make_plan(cfg.sampling.p, exc.length(), phantom.dims, cfg.sampling.seed,
                              cfg.sampling.axis);
  const auto y = forward(gt.x, plan);
  const auto rec = blip(y, filter, plan, cfg.recon, &gt.x);
  const auto base = mrf_baseline(y, filter, plan);

  SingleRunSummary s;
  s.config_hash = hash;
  s.iterations = rec.trace.records.size();
  s.ser_blip_db = ser_db(gt.x, rec.x);
  s.ser_mrf_db = ser_db(gt.x, base.projected);
  s.blip_errors = map_errors(gt.maps, rec.maps);
  s.mrf_errors = map_errors(gt.maps, base.maps);

  prepare_dir(out);
  write_text(out / "config.json", cfg.canonical_json() + "\n");
  plan.save_text(out / "plan.txt");
  rec.trace.save_csv(out / "trace.csv", hash);
  write_maps(out, "truth", gt.maps, hash, rasters);
  write_maps(out, "blip", rec.maps, hash, rasters);
  write_maps(out, "mrf", base.maps, hash, rasters);

  std::string text;
  text += "config_hash = " + hex(hash) + "\n";
  text += "voxels = " + std::to_string(phantom.dims.size()) + "\n";
  text += "frames = " + std::to_string(exc.length()) + "\n";
  text += "p = " + std::to_string(cfg.sampling.p) + "\n";
  text += "atoms = " + std::to_string(dict.size()) + "\n";
  text += "iterations = " + std::to_string(s.iterations) + "\n";
  text += "ser_blip_db = " + num(s.ser_blip_db) + "\n";
  text += "ser_mrf_db = " + num(s.ser_mrf_db) + "\n";
  put_errors(text, "blip", s.blip_errors);
  put_errors(text, "mrf", s.mrf_errors);
  write_text(out / "summary.txt", text);
  return s;
}

StudyResult run_study(const ExperimentConfig& cfg, const fs::path& out) {
  StudySettings st;
  st.lengths = cfg.study.lengths;
  st.factors = cfg.study.factors;
  st.trials = cfg.study.trials;
  st.seed = cfg.seed;
  st.flip_std_deg = cfg.excitation.flip_std_deg;
  st.tr_ms = cfg.excitation.tr_ms;
  st.grid = cfg.grid;
  st.recon = cfg.recon;
  st.axis = cfg.sampling.axis;
  st.threshold_db = cfg.study.threshold_db;
  const auto phantom = make_phantom(cfg);
  auto result = scaling_study(st, phantom);
  prepare_dir(out);
  write_text(out / "config.json", cfg.canonical_json() + "\n");
  result.save_csv(out / "study.csv", cfg.hash());
  return result;
}

std::vector<FlatnessReport> run_flatness(const ExperimentConfig& cfg, const fs::path& out) {
  std::vector<FlatnessReport> reports;
  for (auto length : cfg.flatness.lengths) {
    const auto exc = random_excitation(length, cfg.excitation.flip_std_deg, cfg.excitation.tr_ms,
                                       derive_seed(cfg.excitation.seed, {length}));
    const auto dict = build_dictionary(cfg.grid, exc);
    reports.push_back(flatness(dict, cfg.flatness.num_chords, derive_seed(cfg.seed, {length, 4})));
  }
  prepare_dir(out);
  write_text(out / "config.json", cfg.canonical_json() + "\n");
  std::string text = "# config_hash " + hex(cfg.hash()) + "\n";
  text += "L,lambda,lambda_inv_sq_over_L,num_chords,seed\n";
  for (const auto& r : reports)
    text += std::to_string(r.length) + "," + num(r.lambda) + "," + num(r.lambda_inv_sq_over_L) +
            "," + std::to_string(r.num_chords) + "," + std::to_string(r.seed) + "\n";
  write_text(out / "flatness.csv", text);
  return reports;
}

BlochDictionary run_dict_build(const ExperimentConfig& cfg, const fs::path& out) {
  auto dict = build_dictionary(cfg.grid, make_excitation(cfg));
  prepare_dir(out);
  write_text(out / "config.json", cfg.canonical_json() + "\n");
  dict.save(out / "dictionary.bin");
  return dict;
}

PhantomDefinition run_phantom_gen(const ExperimentConfig& cfg, const fs::path& out) {
  auto phantom = make_phantom(cfg);
  const auto gt = ground_truth_sequence(phantom, make_excitation(cfg));
  const auto hash = cfg.hash();
  prepare_dir(out);
  write_text(out / "config.json", cfg.canonical_json() + "\n");
  phantom.save_text(out / "phantom.txt");
  phantom.save_binary(out / "phantom.bin");
  write_maps(out, "truth", gt.maps, hash, true);
  return phantom;
}

}  // namespace blip
