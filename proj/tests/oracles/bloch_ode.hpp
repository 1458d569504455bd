#pragma once

// Independent reference: RK4 integration of the Bloch equations in the
// rotating frame between instantaneous RF pulses. Units ms and Hz.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

struct Vec3 {
  double x, y, z;
};

inline Vec3 bloch_rhs(const Vec3& m, double t1, double t2, double omega) {
  return {omega * -m.y - m.x / t2, omega * m.x - m.y / t2, (1.0 - m.z) / t1};
}

inline Vec3 axpy(const Vec3& a, double h, const Vec3& k) {
  return {a.x + h * k.x, a.y + h * k.y, a.z + h * k.z};
}

inline Vec3 integrate(Vec3 m, double duration, double step, double t1, double t2, double omega) {
  const auto n = static_cast<long>(std::ceil(duration / step));
  const double h = duration / static_cast<double>(n);
  for (long i = 0; i < n; ++i) {
    const Vec3 k1 = bloch_rhs(m, t1, t2, omega);
    const Vec3 k2 = bloch_rhs(axpy(m, 0.5 * h, k1), t1, t2, omega);
    const Vec3 k3 = bloch_rhs(axpy(m, 0.5 * h, k2), t1, t2, omega);
    const Vec3 k4 = bloch_rhs(axpy(m, h, k3), t1, t2, omega);
    m.x += h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    m.y += h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
    m.z += h / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z);
  }
  return m;
}

// Inversion, then per repetition: pulse about +x, free evolution to TR/2,
// sample, free evolution to TR.
inline std::vector<std::complex<double>> ir_ssfp(double t1, double t2, double df,
                                                 const std::vector<double>& flips,
                                                 const std::vector<double>& trs,
                                                 double step_ms = 1e-3) {
  const double omega = 2.0 * std::numbers::pi * df * 1e-3;  // rad / ms
  Vec3 m{0.0, 0.0, -1.0};
  std::vector<std::complex<double>> out;
  for (std::size_t t = 0; t < flips.size(); ++t) {
    const double c = std::cos(flips[t]), s = std::sin(flips[t]);
    m = {m.x, c * m.y - s * m.z, s * m.y + c * m.z};
    m = integrate(m, 0.5 * trs[t], step_ms, t1, t2, omega);
    out.emplace_back(m.x, m.y);
    m = integrate(m, 0.5 * trs[t], step_ms, t1, t2, omega);
  }
  return out;
}

}  // namespace oracle
