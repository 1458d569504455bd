#include "blip/recon.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "blip/analysis.hpp"
#include "blip/parallel.hpp"

namespace blip {

void ReconConfig::validate() const {
  if (max_iters == 0) throw ConfigError("recon: max_iters must be >= 1");
  if (mode == StepsizeMode::fixed && !(mu >= 0.0 && std::isfinite(mu)))
    throw ConfigError("recon: fixed stepsize must be > 0 (or 0 for N/M)");
  if (!(halt_tol >= 0.0)) throw ConfigError("recon: halt_tol must be >= 0");
}

namespace {

double undersampling_ratio(const SamplingPlan& plan) {
  return static_cast<double>(plan.voxels()) / static_cast<double>(plan.measurements());
}

void check_shapes(const KSpaceData& y, const BlochDictionary& dict, const SamplingPlan& plan) {
  y.validate();
  if (!(y.plan == plan)) throw DimensionError("recon: k-space data was produced by another plan");
  if (plan.frames() != dict.length())
    throw DimensionError("recon: plan has " + std::to_string(plan.frames()) +
                         " frames, dictionary length is " + std::to_string(dict.length()));
}

std::vector<Complex> residual(const KSpaceData& y, const KSpaceData& hx) {
  std::vector<Complex> r(y.samples.size());
  for (std::size_t j = 0; j < r.size(); ++j) r[j] = y.samples[j] - hx.samples[j];
  return r;
}

bool all_finite(const MagnetizationSequence& x) {
  for (const auto& z : x.data())
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

// One iterate: returns the projection and its k-space residual.
struct Candidate {
  ImageProjection proj;
  KSpaceData r;
  double residual_norm = 0.0;
};

Candidate evaluate(const MagnetizationSequence& x, const MagnetizationSequence& g, double mu,
                   const KSpaceData& y, const MatchedFilter& filter, const SamplingPlan& plan) {
  Candidate c;
  c.proj = project_image(landweber_update(x, g, mu), filter);
  c.r.plan = plan;
  c.r.samples = residual(y, forward(c.proj.projected, plan));
  c.residual_norm = frobenius_norm(c.r.samples);
  return c;
}

}  // namespace

MagnetizationSequence landweber_update(const MagnetizationSequence& x,
                                       const MagnetizationSequence& g, double mu) {
  if (!x.same_shape(g)) throw DimensionError("landweber_update: shape mismatch");
  MagnetizationSequence out(x.dims(), x.frames());
  auto& o = out.data();
  const auto& a = x.data();
  const auto& b = g.data();
  for (std::size_t j = 0; j < o.size(); ++j) o[j] = a[j] + mu * b[j];
  return out;
}

double adaptive_step(const MagnetizationSequence& x_current, const MagnetizationSequence& g,
                     const SamplingPlan& plan) {
  if (!x_current.same_shape(g)) throw DimensionError("adaptive_step: shape mismatch");
  const double fallback = undersampling_ratio(plan);
  MagnetizationSequence restricted(g.dims(), g.frames());
  parallel_for(g.voxels(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto xi = x_current.row(i);
      const auto gi = g.row(i);
      auto out = restricted.row(i);
      double xx = 0.0;
      double xg = 0.0;
      for (std::size_t t = 0; t < xi.size(); ++t) {
        xx += std::norm(xi[t]);
        xg += xi[t].real() * gi[t].real() + xi[t].imag() * gi[t].imag();
      }
      if (xx > 0.0) {
        const double c = xg / xx;
        for (std::size_t t = 0; t < xi.size(); ++t) out[t] = c * xi[t];
      } else {
        std::copy(gi.begin(), gi.end(), out.begin());
      }
    }
  });
  const double num = frobenius_norm(restricted.data());
  if (num == 0.0) return fallback;
  const double den = frobenius_norm(forward(restricted, plan).samples);
  if (den == 0.0) return fallback;
  const double mu = (num * num) / (den * den);
  return std::isfinite(mu) ? mu : fallback;
}

ReconResult blip(const KSpaceData& y, const MatchedFilter& filter, const SamplingPlan& plan,
                 const ReconConfig& cfg, const MagnetizationSequence* ground_truth) {
  cfg.validate();
  const auto& dict = filter.dictionary();
  check_shapes(y, dict, plan);
  if (ground_truth && (ground_truth->dims() != plan.dims || ground_truth->frames() != plan.frames()))
    throw DimensionError("blip: ground truth shape mismatch");

  const double ratio = undersampling_ratio(plan);
  const double mu_min = 1e-8 * ratio;
  // Residuals this small are rounding noise: the data are matched exactly.
  const double floor = 1e-12 * frobenius_norm(y.samples);

  ReconResult out;
  out.x = MagnetizationSequence(plan.dims, plan.frames());
  out.maps = ParameterMaps(plan.dims);
  out.atom_index.assign(plan.voxels(), 0);

  KSpaceData r;
  r.plan = plan;
  r.samples = residual(y, forward(out.x, plan));
  double r_norm = frobenius_norm(r.samples);

  for (std::size_t n = 1; n <= cfg.max_iters; ++n) {
    const MagnetizationSequence g = adjoint(r);

    double mu = 0.0;
    std::size_t backtracks = 0;
    Candidate c;
    if (cfg.mode == StepsizeMode::fixed) {
      mu = cfg.mu > 0.0 ? cfg.mu : ratio;
      c = evaluate(out.x, g, mu, y, filter, plan);
    } else {
      mu = adaptive_step(out.x, g, plan);
      while (true) {
        c = evaluate(out.x, g, mu, y, filter, plan);
        if (!std::isfinite(c.residual_norm)) break;
        if (c.residual_norm <= r_norm) break;
        mu *= 0.5;
        ++backtracks;
        if (mu < mu_min)
          throw StagnationError("blip: stepsize underflow at iteration " + std::to_string(n));
      }
    }
    if (!std::isfinite(c.residual_norm) || !all_finite(c.proj.projected))
      throw DivergenceError("blip: non-finite iterate at iteration " + std::to_string(n), n);

    ReconRecord rec;
    rec.iteration = n;
    rec.residual = c.residual_norm;
    rec.stepsize = mu;
    rec.backtracks = backtracks;
    if (ground_truth) rec.ser_db = ser_db(*ground_truth, c.proj.projected);
    out.trace.records.push_back(rec);

    const double change = r_norm > 0.0 ? std::abs(r_norm - c.residual_norm) / r_norm : 0.0;
    out.x = std::move(c.proj.projected);
    out.maps = std::move(c.proj.maps);
    out.atom_index = std::move(c.proj.atom_index);
    r = std::move(c.r);
    r_norm = c.residual_norm;
    if (r_norm <= floor || change < cfg.halt_tol) break;
  }
  return out;
}

ReconResult blip(const KSpaceData& y, const BlochDictionary& dict, const SamplingPlan& plan,
                 const ReconConfig& cfg, const MagnetizationSequence* ground_truth) {
  const MatchedFilter filter(dict);
  return blip(y, filter, plan, cfg, ground_truth);
}

ImageProjection mrf_baseline(const KSpaceData& y, const MatchedFilter& filter,
                             const SamplingPlan& plan) {
  check_shapes(y, filter.dictionary(), plan);
  const MagnetizationSequence zero(plan.dims, plan.frames());
  KSpaceData r;
  r.plan = plan;
  r.samples = residual(y, forward(zero, plan));
  return project_image(landweber_update(zero, adjoint(r), undersampling_ratio(plan)), filter);
}

ImageProjection mrf_baseline(const KSpaceData& y, const BlochDictionary& dict,
                             const SamplingPlan& plan) {
  const MatchedFilter filter(dict);
  return mrf_baseline(y, filter, plan);
}

void ReconTrace::save_csv(const std::filesystem::path& path, std::uint64_t config_hash) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open for writing: " + path.string());
  std::fprintf(f, "# config_hash %016llx\n", static_cast<unsigned long long>(config_hash));
  std::fprintf(f, "iteration,residual,stepsize,ser_db,backtracks\n");
  for (const auto& r : records) {
    std::fprintf(f, "%zu,%.17g,%.17g,", r.iteration, r.residual, r.stepsize);
    if (r.ser_db) std::fprintf(f, "%.17g", *r.ser_db);
    std::fprintf(f, ",%zu\n", r.backtracks);
  }
  if (std::fclose(f) != 0) throw IoError("write failed: " + path.string());
}

}  // namespace blip
