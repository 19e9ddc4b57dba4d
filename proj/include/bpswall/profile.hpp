#pragma once

// Full-line wall profiles for both phase-transition boundary conditions, the
// quadrature-built x(u) oracle, tail fits and the closed-form bracket checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bpswall/errors.hpp"
#include "bpswall/integrate.hpp"
#include "bpswall/model.hpp"
#include "bpswall/quadrature.hpp"
#include "bpswall/shoot.hpp"

namespace bpswall {

enum class BoundaryCondition {
  HiggsToMagnetic,     // u(-inf) = 0, u(+inf) = -inf
  MagneticToMagnetic,  // u(-inf) = u(+inf) = -inf
};

inline const char* to_string(BoundaryCondition bc) {
  return bc == BoundaryCondition::HiggsToMagnetic ? "higgs-magnetic" : "magnetic-magnetic";
}

struct Window {
  double x_min = -20.0;
  double x_max = 12.0;
};

struct ProfileOptions {
  double spacing = 0.01;
  /// The left tail is shot in segments; each segment hands over to a freshly
  /// shot one once |u| has shrunk by this factor.
  double join_ratio = 1e-2;
  /// The outward halves (toward u -> -inf) are integrated with abs_tol and
  /// rel_tol multiplied by this factor; (u')^2 reaches ~100 there.
  double outward_tolerance_factor = 1e-2;
  ShootingLimits limits{};
};

/// A wall sampled on the uniform grid x_k = k * spacing, k in [k_begin, k_begin + size).
struct WallProfile {
  BoundaryCondition bc = BoundaryCondition::HiggsToMagnetic;
  ModelParams params{};
  double anchor = 0.0;  // u(0): -a or u0
  std::optional<double> b_star;
  double spacing = 0.01;
  long k_begin = 0;
  std::vector<double> x, u, du;
  bool truncated = false;  // right end stopped at the u floor before x_max
  int shooting_segments = 0;

  [[nodiscard]] std::size_t size() const { return x.size(); }
  [[nodiscard]] std::size_t origin() const { return static_cast<std::size_t>(-k_begin); }
};

namespace detail {

inline ModelParams tightened(ModelParams p, double factor) {
  p.tol.abs_tol *= factor;
  p.tol.rel_tol *= factor;
  return p;
}

inline long grid_index_floor(double x, double h) { return static_cast<long>(std::floor(x / h + 1e-9)); }
inline long grid_index_ceil(double x, double h) { return static_cast<long>(std::ceil(x / h - 1e-9)); }

}  // namespace detail

/// Higgs-to-magnetic wall anchored at u(0) = -a.
inline WallProfile solve_higgs_to_magnetic(double a, const ModelParams& params, const Window& window = {},
                                           const ProfileOptions& opts = {}) {
  const ModelParams p = validate(params);
  if (!(a > 0.0)) throw ParamError("anchor a must be positive (u(0) = -a)");
  if (!(window.x_min < 0.0 && window.x_max > 0.0)) throw ParamError("window must satisfy x_min < 0 < x_max");
  const double h = opts.spacing;

  WallProfile prof;
  prof.bc = BoundaryCondition::HiggsToMagnetic;
  prof.params = p;
  prof.anchor = -a;
  prof.spacing = h;

  const ShootingOutcome shot = find_critical_slope(a, p, opts.limits);
  prof.b_star = shot.b_star;

  // Left half, in t = -x. Each segment is valid until its unstable mode wakes
  // up; re-shooting from the hand-over point restarts the clock.
  const long k_min = detail::grid_index_ceil(window.x_min, h);
  const double t_total = -static_cast<double>(k_min) * h;
  std::vector<State> left;  // in t, ascending
  double t_start = 0.0;
  double anchor_k = a;
  double slope_k = shot.b_star;
  ModelParams seg_params = scaled_for_anchor(p, a);
  long j = 0;
  while (true) {
    ++prof.shooting_segments;
    IvpSpec spec;
    spec.params = seg_params;
    spec.initial = {t_start, -anchor_k, slope_k};
    spec.horizon = t_total - t_start + 0.5 * h;
    spec.u_floor = std::min(opts.limits.u_floor, -2.0 * anchor_k);
    spec.events.level = -anchor_k * opts.join_ratio;
    spec.events.derivative_turned_negative = true;
    spec.events.crossed_zero_upward = true;
    const Trajectory traj = integrate(spec);
    const EventRecord& ev = traj.terminal_event();
    const long j_end = std::min(detail::grid_index_floor(ev.x_event, h), -k_min);
    for (; j <= j_end; ++j) left.push_back(traj.at(static_cast<double>(j) * h));
    if (ev.kind == EventKind::HorizonReached || j > -k_min) break;
    if (ev.kind != EventKind::ReachedLevel) {
      throw BracketInconsistency(std::string("left tail segment ended with ") + to_string(ev.kind) + " at t = " +
                                 std::to_string(ev.x_event));
    }
    t_start = ev.x_event;
    anchor_k = -ev.state_at_event.u;
    seg_params = scaled_for_anchor(p, anchor_k);
    slope_k = find_critical_slope(anchor_k, p, opts.limits).b_star;
  }

  // Right half, forward in x; the solution runs off to -inf quadratically.
  IvpSpec right_spec;
  right_spec.params = detail::tightened(p, opts.outward_tolerance_factor);
  right_spec.initial = {0.0, -a, -shot.b_star};
  right_spec.horizon = window.x_max;
  right_spec.u_floor = std::min(opts.limits.u_floor, -2.0 * a);
  const Trajectory right = integrate(right_spec);
  prof.truncated = right.terminal_event().kind == EventKind::HitFloor;
  const long k_max = detail::grid_index_floor(right.x_end(), h);

  prof.k_begin = k_min;
  const auto n = static_cast<std::size_t>(k_max - k_min + 1);
  prof.x.resize(n);
  prof.u.resize(n);
  prof.du.resize(n);
  for (long k = k_min; k <= k_max; ++k) {
    const auto i = static_cast<std::size_t>(k - k_min);
    const double x = static_cast<double>(k) * h;
    prof.x[i] = x;
    if (k <= 0) {
      const State& s = left[static_cast<std::size_t>(-k)];
      prof.u[i] = s.u;
      prof.du[i] = -s.du;
    } else {
      const State s = right.at(x);
      prof.u[i] = s.u;
      prof.du[i] = s.du;
    }
  }
  prof.u[prof.origin()] = -a;
  return prof;
}

/// Magnetic-to-magnetic wall with its maximum u0 < 0 at x = 0, built on x >= 0
/// and reflected.
inline WallProfile solve_magnetic_to_magnetic(double u0, const ModelParams& params, double half_window = 12.0,
                                              const ProfileOptions& opts = {}) {
  const ModelParams p = validate(params);
  if (u0 == 0.0) throw DegenerateProfile("u0 = 0 is the vacuum u = 0, not a wall");
  if (!(u0 < 0.0)) throw ParamError("the maximum u0 must be negative");
  if (!(half_window > 0.0)) throw ParamError("half_window must be positive");
  const double h = opts.spacing;

  IvpSpec spec;
  spec.params = detail::tightened(p, opts.outward_tolerance_factor);
  spec.initial = {0.0, u0, 0.0};
  spec.horizon = half_window;
  spec.u_floor = std::min(opts.limits.u_floor, 2.0 * u0);
  const Trajectory traj = integrate(spec);

  WallProfile prof;
  prof.bc = BoundaryCondition::MagneticToMagnetic;
  prof.params = p;
  prof.anchor = u0;
  prof.spacing = h;
  prof.truncated = traj.terminal_event().kind == EventKind::HitFloor;
  const long k_max = detail::grid_index_floor(traj.x_end(), h);
  prof.k_begin = -k_max;
  const auto n = static_cast<std::size_t>(2 * k_max + 1);
  prof.x.resize(n);
  prof.u.resize(n);
  prof.du.resize(n);
  for (long k = 0; k <= k_max; ++k) {
    const double x = static_cast<double>(k) * h;
    const State s = k == 0 ? State{0.0, u0, 0.0} : traj.at(x);
    const auto ip = static_cast<std::size_t>(k_max + k);
    const auto im = static_cast<std::size_t>(k_max - k);
    prof.x[ip] = x;
    prof.x[im] = -x;
    prof.u[ip] = prof.u[im] = s.u;
    prof.du[ip] = s.du;
    prof.du[im] = -s.du;
  }
  return prof;
}

struct QuadraturePoint {
  double x;
  double u;
};

/// Builds x(u) = x0 + integral of du / u' directly from the first integral,
/// independently of any initial-value integration. anchor is u(0).
///
/// HiggsToMagnetic: u' = -sqrt(G(u)); samples on either side of the anchor.
/// MagneticToMagnetic: u' = -sqrt(G(u) - G(u0)) on x >= 0, samples u <= u0;
/// the endpoint singularity is removed with u = u0 - s^2.
inline std::vector<QuadraturePoint> profile_by_quadrature(double anchor, const ModelParams& params,
                                                          BoundaryCondition bc, std::span<const double> u_samples) {
  const ModelParams p = validate(params);
  if (!(anchor < 0.0)) throw ParamError("anchor must be negative");
  for (std::size_t i = 1; i < u_samples.size(); ++i) {
    if (!(u_samples[i] < u_samples[i - 1])) throw ParamError("u_samples must be strictly decreasing");
  }
  const quad::Options qopts{1e-13, 1e-12, 4000};
  std::vector<QuadraturePoint> out;
  out.reserve(u_samples.size());
  for (double u : u_samples) {
    if (!(u < 0.0)) throw ParamError("u samples must be negative");
    double x = 0.0;
    if (bc == BoundaryCondition::HiggsToMagnetic) {
      if (u < anchor) {
        x = quad::integrate([&](double v) { return 1.0 / std::sqrt(first_integral(v, p)); }, u, anchor, qopts).value;
      } else if (u > anchor) {
        // v = -e^w turns the logarithmic approach to 0 into a bounded integrand.
        auto integrand = [&](double w) {
          const double v = -std::exp(w);
          return std::exp(w) / std::sqrt(first_integral(v, p));
        };
        x = quad::integrate(integrand, std::log(-anchor), std::log(-u), qopts).value;
      }
    } else {
      if (u > anchor) throw ParamError("magnetic-to-magnetic samples must satisfy u <= u0");
      if (u < anchor) {
        auto integrand = [&](double s) {
          return 2.0 * s / std::sqrt(first_integral_drop(anchor, s * s, p));
        };
        x = quad::integrate(integrand, 0.0, std::sqrt(anchor - u), qopts).value;
      }
    }
    out.push_back({x, u});
  }
  return out;
}

/// max |x_profile - x_quadrature| over every stride-th node of the half of
/// the profile described by a single x(u) branch.
inline double quadrature_equivalence(const WallProfile& prof, std::size_t stride = 10) {
  std::vector<double> us;
  std::vector<double> xs;
  const std::size_t start = prof.bc == BoundaryCondition::HiggsToMagnetic ? 0 : prof.origin();
  for (std::size_t i = start; i < prof.size(); i += stride) {
    if (prof.u[i] < 0.0) {
      us.push_back(prof.u[i]);
      xs.push_back(prof.x[i]);
    }
  }
  const auto pts = profile_by_quadrature(prof.anchor, prof.params, prof.bc, us);
  double worst = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) worst = std::max(worst, std::abs(pts[i].x - xs[i]));
  return worst;
}

/// max |(u')^2 - (G(u) - G(ref))| / (1 + |G(u)|), ref = 0 or u0.
inline double first_integral_residual(const WallProfile& prof) {
  const double ref = prof.bc == BoundaryCondition::HiggsToMagnetic ? 0.0 : prof.anchor;
  double worst = 0.0;
  for (std::size_t i = 0; i < prof.size(); ++i) {
    const double u = prof.u[i];
    if (u > 0.0) return std::numeric_limits<double>::infinity();
    const double g = first_integral(u, prof.params);
    const double target = ref == 0.0 ? g : first_integral_difference(std::min(u, ref), ref, prof.params);
    worst = std::max(worst, std::abs(prof.du[i] * prof.du[i] - target) / (1.0 + std::abs(g)));
  }
  return worst;
}

struct TailFit {
  std::optional<double> lambda_left;  // decay rate of u -> 0^- (Higgs side only)
  double c_right = 0.0;               // u ~ -c x^2 / 2 on the magnetic side
  double predicted_c_right = 0.0;     // 2 / sqrt(4 - beta)
  std::pair<double, double> left_window{0.0, 0.0};
  std::pair<double, double> right_window{0.0, 0.0};
  double left_residual = 0.0;   // RMS of the ln|u| fit
  double right_residual = 0.0;  // RMS of -u'' - c, relative to c
};

inline TailFit fit_tails(const WallProfile& prof, double left_cutoff = 1e-3, double right_cutoff = -25.0) {
  TailFit fit;
  fit.predicted_c_right = 2.0 / std::sqrt(4.0 - prof.params.beta);
  const double h = prof.spacing;

  if (prof.bc == BoundaryCondition::HiggsToMagnetic) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < prof.origin(); ++i) {
      if (prof.u[i] < 0.0 && -prof.u[i] <= left_cutoff) idx.push_back(i);
    }
    if (idx.size() < 20) throw InsufficientTail("left tail never reaches |u| <= " + std::to_string(left_cutoff));
    double mx = 0, my = 0;
    for (auto i : idx) mx += prof.x[i], my += std::log(-prof.u[i]);
    mx /= idx.size(), my /= idx.size();
    double sxy = 0, sxx = 0;
    for (auto i : idx) {
      sxy += (prof.x[i] - mx) * (std::log(-prof.u[i]) - my);
      sxx += (prof.x[i] - mx) * (prof.x[i] - mx);
    }
    const double slope = sxy / sxx;
    double ss = 0;
    for (auto i : idx) {
      const double r = std::log(-prof.u[i]) - (my + slope * (prof.x[i] - mx));
      ss += r * r;
    }
    fit.lambda_left = slope;
    fit.left_residual = std::sqrt(ss / idx.size());
    fit.left_window = {prof.x[idx.front()], prof.x[idx.back()]};
  }

  std::vector<double> curv;
  std::vector<double> xs;
  for (std::size_t i = std::max<std::size_t>(prof.origin(), 1); i + 1 < prof.size(); ++i) {
    if (prof.u[i] < right_cutoff) {
      curv.push_back(-(prof.u[i + 1] - 2.0 * prof.u[i] + prof.u[i - 1]) / (h * h));
      xs.push_back(prof.x[i]);
    }
  }
  if (curv.size() < 5) throw InsufficientTail("right tail never drops below u = " + std::to_string(right_cutoff));
  const double c = std::accumulate(curv.begin(), curv.end(), 0.0) / static_cast<double>(curv.size());
  double ss = 0;
  for (double v : curv) ss += (v - c) * (v - c);
  fit.c_right = c;
  fit.right_residual = std::sqrt(ss / curv.size()) / c;
  fit.right_window = {xs.front(), xs.back()};
  return fit;
}

/// Pointwise and integrated consequences of the bracket
/// 2(e^s - 1)/sqrt(4 - beta) < rhs(s) < e^s - 1 for s < 0.
struct BracketReport {
  // (u')^2 between Phi(u) - Phi(ref) and 2 (Phi(u) - Phi(ref)) / sqrt(4 - beta),
  // Phi(u) = 2 (e^u - u - 1).
  double min_lower_margin = std::numeric_limits<double>::infinity();
  double min_upper_margin = std::numeric_limits<double>::infinity();
  double max_lower_gap = 0.0;  // max |(u')^2 - lower|; the bounds coincide at beta = 0
  double strict_min_margin = std::numeric_limits<double>::infinity();  // over u < -0.01
  std::size_t violations = 0;
  std::optional<double> first_violation_x;

  // x-bounds from integrating du / sqrt(e^u - u - 1) from a reference node.
  double x_lower_margin = std::numeric_limits<double>::infinity();
  double x_upper_margin = std::numeric_limits<double>::infinity();
  std::size_t x_violations = 0;
  // Consequences with e^u - u - 1 replaced by -u and -u - 1 (Higgs side only).
  double sqrt_bound_margin = std::numeric_limits<double>::infinity();
  double linear_bound_margin = std::numeric_limits<double>::infinity();
  // Magnetic-to-magnetic: -sqrt(2) x as an upper bound on the integral does
  // not hold near the maximum, where u' = 0. Counted, not gated.
  std::size_t uncorrected_upper_violations = 0;

  [[nodiscard]] bool pass() const { return violations == 0 && x_violations == 0; }
};

inline BracketReport check_brackets(const WallProfile& prof) {
  BracketReport rep;
  const double beta = prof.params.beta;
  const double root = std::sqrt(4.0 - beta);
  const double quarter = std::sqrt(root);  // (4 - beta)^(1/4)
  const bool higgs = prof.bc == BoundaryCondition::HiggsToMagnetic;
  const double ref = higgs ? 0.0 : prof.anchor;
  auto phi_diff = [&](double u) {
    if (ref == 0.0) return 2.0 * expm1_minus_x(u);
    const double d = u - ref;
    return 2.0 * (std::expm1(ref) * d + std::exp(ref) * expm1_minus_x(d));
  };

  for (std::size_t i = 0; i < prof.size(); ++i) {
    const double u = std::min(prof.u[i], ref);
    const double y = prof.du[i] * prof.du[i];
    const double lower = phi_diff(u);
    const double upper = 2.0 * lower / root;
    const double slack = 1e-8 * (1.0 + upper);
    rep.min_lower_margin = std::min(rep.min_lower_margin, y - lower);
    rep.min_upper_margin = std::min(rep.min_upper_margin, upper - y);
    rep.max_lower_gap = std::max(rep.max_lower_gap, std::abs(y - lower));
    if (prof.u[i] < -0.01) rep.strict_min_margin = std::min({rep.strict_min_margin, y - lower, upper - y});
    if (y < lower - slack || y > upper + slack) {
      ++rep.violations;
      if (!rep.first_violation_x) rep.first_violation_x = prof.x[i];
    }
  }

  // Integrated bounds on the x > 0 side.
  std::size_t i0 = prof.origin();
  if (higgs) {
    while (i0 < prof.size() && !(prof.u[i0] < -1.0)) ++i0;
  }
  if (i0 + 1 >= prof.size()) return rep;
  const double x0 = prof.x[i0];
  const double u0 = prof.u[i0];
  auto integrand = [](double v) { return 1.0 / std::sqrt(expm1_minus_x(v)); };
  double integral = 0.0;
  for (std::size_t i = i0 + 1; i < prof.size(); ++i) {
    integral += quad::integrate(integrand, prof.u[i - 1], prof.u[i], {1e-14, 1e-13, 4000}).value;
    const double dx = prof.x[i] - x0;
    const double lower = -2.0 * dx / quarter;
    const double upper = -std::sqrt(2.0) * dx;
    const double slack = 1e-8 * (1.0 + std::abs(lower));
    rep.x_lower_margin = std::min(rep.x_lower_margin, integral - lower);
    if (integral < lower - slack) ++rep.x_violations;
    if (higgs) {
      rep.x_upper_margin = std::min(rep.x_upper_margin, upper - integral);
      if (integral > upper + slack) ++rep.x_violations;
      const double u = prof.u[i];
      const double m_sqrt = dx / quarter - (std::sqrt(-u) - std::sqrt(-u0));
      const double m_linear = 2.0 * (std::sqrt(-u - 1.0) - std::sqrt(-u0 - 1.0)) - std::sqrt(2.0) * dx;
      rep.sqrt_bound_margin = std::min(rep.sqrt_bound_margin, m_sqrt);
      rep.linear_bound_margin = std::min(rep.linear_bound_margin, m_linear);
      if (m_sqrt < -slack || m_linear < -slack) ++rep.x_violations;
    } else {
      rep.x_upper_margin = std::min(rep.x_upper_margin, upper - integral);
      if (integral > upper + slack) ++rep.uncorrected_upper_violations;
    }
  }
  return rep;
}

}  // namespace bpswall
