#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "blip/experiment.hpp"
#include "blip/parallel.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  bool no_rasters = false;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "experiment config (JSON)")->required();
  cmd->add_option("--out", o.out, "output directory (overrides output_dir)");
  cmd->add_option("--seed", o.seed, "master seed (overrides seed)");
  cmd->add_option("--threads", o.threads, "worker threads, 0 = all cores");
}

blip::ExperimentConfig load(const Options& o) {
  blip::ConfigOverrides ov;
  ov.seed = o.seed;
  if (!o.out.empty()) ov.output_dir = o.out;
  auto cfg = blip::load_config(o.config, ov);
  if (cfg.output_dir.empty()) throw blip::ConfigError("output_dir: missing (set it or pass --out)");
  return cfg;
}

void expect_kind(const blip::ExperimentConfig& cfg, blip::ExperimentKind kind, const char* verb) {
  if (cfg.kind != kind)
    throw blip::ConfigError(std::string("experiment: verb '") + verb + "' needs \"" +
                            blip::to_string(kind) + "\", config has \"" + blip::to_string(cfg.kind) + "\"");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blip: Bloch-response recovery via iterated projection"};
  app.require_subcommand(1);
  Options o;
  auto* run = app.add_subcommand("run", "single reconstruction (BLIP and matched-filter baseline)");
  add_common(run, o);
  run->add_flag("--no-rasters", o.no_rasters, "skip PGM exports");
  auto* study = app.add_subcommand("study", "(L, p) phase-transition sweep");
  add_common(study, o);
  auto* flat = app.add_subcommand("flatness", "dictionary flatness versus sequence length");
  add_common(flat, o);
  auto* dict = app.add_subcommand("dict-build", "build and save the dictionary");
  add_common(dict, o);
  auto* phan = app.add_subcommand("phantom-gen", "write the phantom and its ground-truth maps");
  add_common(phan, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    blip::set_num_threads(o.threads);
    const auto cfg = load(o);
    if (run->parsed()) {
      expect_kind(cfg, blip::ExperimentKind::single_run, "run");
      const auto s = blip::run_single(cfg, cfg.output_dir, !o.no_rasters);
      std::printf("iterations %zu  SER blip %.2f dB  SER mrf %.2f dB\n", s.iterations, s.ser_blip_db,
                  s.ser_mrf_db);
    } else if (study->parsed()) {
      expect_kind(cfg, blip::ExperimentKind::scaling_study, "study");
      const auto r = blip::run_study(cfg, cfg.output_dir);
      for (const auto& row : r.rows)
        std::printf("L=%zu p=%zu L/p^2=%.3f SER=%.2f dB\n", row.length, row.p, row.ratio, row.mean_ser_db);
    } else if (flat->parsed()) {
      expect_kind(cfg, blip::ExperimentKind::flatness, "flatness");
      for (const auto& r : blip::run_flatness(cfg, cfg.output_dir))
        std::printf("L=%zu lambda=%.4f lambda^-2/L=%.4f\n", r.length, r.lambda, r.lambda_inv_sq_over_L);
    } else if (dict->parsed()) {
      const auto d = blip::run_dict_build(cfg, cfg.output_dir);
      std::printf("atoms %zu  length %zu\n", d.size(), d.length());
    } else if (phan->parsed()) {
      const auto p = blip::run_phantom_gen(cfg, cfg.output_dir);
      std::printf("voxels %zu  tissues %zu\n", p.dims.size(), p.tissues.size());
    }
  } catch (const blip::ConfigError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
