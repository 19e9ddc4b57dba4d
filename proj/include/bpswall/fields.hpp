#pragma once

// Gauge fields of the wall under the ansatz A1 = 0, A2 = a(x), phi = f(x) real:
// f = e^(u/2), a = -u'/2 (upper branch), F12 = a'. Residuals of the BPS and
// Euler-Lagrange equations and of the pointwise energy identity.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "bpswall/model.hpp"
#include "bpswall/profile.hpp"

namespace bpswall {

struct FieldProfile {
  double spacing = 0.01;
  SignBranch branch = SignBranch::Upper;
  std::vector<double> x;
  std::vector<double> f;       // Higgs amplitude
  std::vector<double> df;      // f' from the state, f u'/2
  std::vector<double> a;       // A2
  std::vector<double> F12;     // a', finite differences
  std::vector<double> F12_ode; // -rhs(u)/2 (sign follows the branch)
  std::vector<double> H;       // energy density
  double flux_window = 0.0;    // integral of F12 = a(x_max) - a(x_min)

  [[nodiscard]] std::size_t size() const { return x.size(); }
};

/// Fourth-order finite differences on a uniform grid; one-sided stencils at
/// the two nodes nearest each end.
inline std::vector<double> derivative(std::span<const double> v, double h) {
  const std::size_t n = v.size();
  std::vector<double> d(n, 0.0);
  if (n < 5) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i == 0 ? 0 : i - 1;
      const std::size_t hi = std::min(n - 1, i + 1);
      d[i] = hi > lo ? (v[hi] - v[lo]) / ((hi - lo) * h) : 0.0;
    }
    return d;
  }
  for (std::size_t i = 2; i + 2 < n; ++i) d[i] = (-v[i + 2] + 8 * v[i + 1] - 8 * v[i - 1] + v[i - 2]) / (12 * h);
  d[0] = (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) / (12 * h);
  d[1] = (-3 * v[0] - 10 * v[1] + 18 * v[2] - 6 * v[3] + v[4]) / (12 * h);
  d[n - 1] = (25 * v[n - 1] - 48 * v[n - 2] + 36 * v[n - 3] - 16 * v[n - 4] + 3 * v[n - 5]) / (12 * h);
  d[n - 2] = (3 * v[n - 1] + 10 * v[n - 2] - 18 * v[n - 3] + 6 * v[n - 4] - v[n - 5]) / (12 * h);
  return d;
}

inline std::vector<double> second_derivative(std::span<const double> v, double h) {
  const std::size_t n = v.size();
  std::vector<double> d(n, 0.0);
  if (n < 6) {
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - 2 * v[i] + v[i - 1]) / (h * h);
    if (n >= 3) d[0] = d[1], d[n - 1] = d[n - 2];
    return d;
  }
  const double h2 = 12 * h * h;
  for (std::size_t i = 2; i + 2 < n; ++i)
    d[i] = (-v[i + 2] + 16 * v[i + 1] - 30 * v[i] + 16 * v[i - 1] - v[i - 2]) / h2;
  d[0] = (45 * v[0] - 154 * v[1] + 214 * v[2] - 156 * v[3] + 61 * v[4] - 10 * v[5]) / h2;
  d[1] = (10 * v[0] - 15 * v[1] - 4 * v[2] + 14 * v[3] - 6 * v[4] + v[5]) / h2;
  d[n - 1] = (45 * v[n - 1] - 154 * v[n - 2] + 214 * v[n - 3] - 156 * v[n - 4] + 61 * v[n - 5] - 10 * v[n - 6]) / h2;
  d[n - 2] = (10 * v[n - 1] - 15 * v[n - 2] - 4 * v[n - 3] + 14 * v[n - 4] - 6 * v[n - 5] + v[n - 6]) / h2;
  return d;
}

/// Energy density (1/beta)(sqrt(1 + beta F12^2) - 1) + (f'^2 + a^2 f^2)/2 + V(f^2).
inline double energy_density(double f, double df, double a, double f12, const ModelParams& params) {
  return born_infeld_energy(f12, params.beta) + 0.5 * (df * df + a * a * f * f) + potential(f * f, params);
}

/// Right-hand side of the compressed BPS equation,
/// F12 = (1 - f^2) / (2 sqrt(1 - (beta/4)(f^2 - 1)^2)), upper branch.
inline double bps_field(double f, const ModelParams& params) {
  const double w = 1.0 - f * f;
  return w / (2.0 * std::sqrt(1.0 - 0.25 * params.beta * w * w));
}

inline FieldProfile reconstruct(const WallProfile& prof) {
  const ModelParams& params = prof.params;
  const double sign = params.branch == SignBranch::Upper ? 1.0 : -1.0;
  const std::size_t n = prof.size();
  FieldProfile fp;
  fp.spacing = prof.spacing;
  fp.branch = params.branch;
  fp.x = prof.x;
  fp.f.resize(n);
  fp.df.resize(n);
  fp.a.resize(n);
  fp.F12_ode.resize(n);
  fp.H.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fp.f[i] = std::exp(0.5 * prof.u[i]);
    fp.df[i] = 0.5 * fp.f[i] * prof.du[i];
    fp.a[i] = -sign * 0.5 * prof.du[i];
    fp.F12_ode[i] = -sign * 0.5 * rhs(prof.u[i], params);
  }
  fp.F12 = derivative(fp.a, fp.spacing);
  for (std::size_t i = 0; i < n; ++i) fp.H[i] = energy_density(fp.f[i], fp.df[i], fp.a[i], fp.F12[i], params);
  if (n > 0) fp.flux_window = fp.a.back() - fp.a.front();
  return fp;
}

/// The lower-branch image (a, F12) -> (-a, -F12) of a field profile.
inline FieldProfile to_lower_branch(FieldProfile fp) {
  fp.branch = fp.branch == SignBranch::Upper ? SignBranch::Lower : SignBranch::Upper;
  for (auto* v : {&fp.a, &fp.F12, &fp.F12_ode})
    for (double& e : *v) e = -e;
  fp.flux_window = -fp.flux_window;
  return fp;
}

struct BpsResidual {
  double r1 = 0.0;  // max |f' +- a f|, f' by finite differences
  double r2 = 0.0;  // max |F12 -+ (1 - f^2) / (2 sqrt(.))|
  double r1_x = 0.0;  // where the maxima occur
  double r2_x = 0.0;
};

inline BpsResidual bps_residual(const FieldProfile& fp, const ModelParams& params) {
  const double sign = fp.branch == SignBranch::Upper ? 1.0 : -1.0;
  const auto dfd = derivative(fp.f, fp.spacing);
  BpsResidual r;
  for (std::size_t i = 0; i < fp.size(); ++i) {
    const double e1 = std::abs(dfd[i] + sign * fp.a[i] * fp.f[i]);
    const double e2 = std::abs(fp.F12[i] - sign * bps_field(fp.f[i], params));
    if (e1 > r.r1) r.r1 = e1, r.r1_x = fp.x[i];
    if (e2 > r.r2) r.r2 = e2, r.r2_x = fp.x[i];
  }
  return r;
}

struct ElResidual {
  double r3 = 0.0;  // f'' - a^2 f - (f^2 - 1) f / (2 sqrt(.))
  double r4 = 0.0;  // (F12 / sqrt(1 + beta F12^2))' - a f^2
};

/// Euler-Lagrange equations reduced by the ansatz:
///   f'' - a^2 f = (f^2 - 1) f / (2 sqrt(1 - (beta/4)(f^2 - 1)^2)),
///   (a' / sqrt(1 + beta a'^2))' = a f^2.
inline ElResidual el_residual(const FieldProfile& fp, const ModelParams& params) {
  const double beta = params.beta;
  const auto d2f = second_derivative(fp.f, fp.spacing);
  std::vector<double> flux_density(fp.size());
  for (std::size_t i = 0; i < fp.size(); ++i)
    flux_density[i] = fp.F12[i] / std::sqrt(1.0 + beta * fp.F12[i] * fp.F12[i]);
  const auto dflux = derivative(flux_density, fp.spacing);
  ElResidual r;
  for (std::size_t i = 0; i < fp.size(); ++i) {
    const double f = fp.f[i], a = fp.a[i];
    const double w = f * f - 1.0;
    const double source = w * f / (2.0 * std::sqrt(1.0 - 0.25 * beta * w * w));
    r.r3 = std::max(r.r3, std::abs(d2f[i] - a * a * f - source));
    r.r4 = std::max(r.r4, std::abs(dflux[i] - a * f * f));
  }
  return r;
}

/// max |H - (F12 (1 - f^2) / 2 + a^2 f^2)|. On a BPS configuration the
/// potential cancels the Born-Infeld surplus and the gradient cross term
/// equals a^2 f^2, leaving this identity. The F12 term flips sign on the
/// lower branch together with F12 itself.
inline double energy_identity(const FieldProfile& fp, const ModelParams&) {
  const double sign = fp.branch == SignBranch::Upper ? 1.0 : -1.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < fp.size(); ++i) {
    const double f2 = fp.f[i] * fp.f[i];
    const double target = sign * 0.5 * fp.F12[i] * (1.0 - f2) + fp.a[i] * fp.a[i] * f2;
    worst = std::max(worst, std::abs(fp.H[i] - target));
  }
  return worst;
}

/// max |F12 (finite differences) - F12 (from the wall equation)|.
inline double f12_consistency(const FieldProfile& fp) {
  double worst = 0.0;
  for (std::size_t i = 0; i < fp.size(); ++i) worst = std::max(worst, std::abs(fp.F12[i] - fp.F12_ode[i]));
  return worst;
}

/// Energy density of the normal phase, f = 0 and F12 = 1/sqrt(4 - beta).
inline double far_field_energy_density(double beta) { return 0.5 / std::sqrt(4.0 - beta); }

}  // namespace bpswall
