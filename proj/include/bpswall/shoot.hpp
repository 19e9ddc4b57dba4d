#pragma once

// Dynamical shooting for the Higgs-to-magnetic wall.
//
// Work in t = -x with u(0) = -a < 0 and u'(0) = b >= 0. Every slope b falls in
// exactly one class: B- (u' turns negative), B+ (u' stays positive and u
// crosses 0) or B0 (u' > 0, u < 0 for all t, hence u -> 0). B0 is a single
// point b*, found by bisection between a B- and a B+ slope.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bpswall/errors.hpp"
#include "bpswall/integrate.hpp"
#include "bpswall/model.hpp"

namespace bpswall {

enum class SlopeClassKind { BMinus, BPlus, UndeterminedWithinHorizon };

inline const char* to_string(SlopeClassKind kind) {
  switch (kind) {
    case SlopeClassKind::BMinus: return "BMinus";
    case SlopeClassKind::BPlus: return "BPlus";
    case SlopeClassKind::UndeterminedWithinHorizon: return "UndeterminedWithinHorizon";
  }
  return "?";
}

struct SlopeClass {
  SlopeClassKind value = SlopeClassKind::UndeterminedWithinHorizon;
  EventRecord witness{};  // the terminal event that decided the class
};

struct ShootingLimits {
  double horizon = 40.0;
  double u_floor = -40.0;
};

struct ShootingOutcome {
  double b_star = 0.0;
  double b_lo = 0.0;  // classified BMinus
  double b_hi = 0.0;  // classified BPlus
  int iterations = 0;
  double oracle_slope = 0.0;
  double agreement = 0.0;  // |b_star - oracle| / oracle
};

inline SlopeClass classify_slope(double b, double a, const ModelParams& params, const ShootingLimits& limits = {}) {
  if (!(a > 0.0)) throw ParamError("anchor a must be positive (u(0) = -a)");
  if (!(b >= 0.0)) throw ParamError("trial slope b must be non-negative");
  IvpSpec spec;
  spec.params = params;
  spec.initial = {0.0, -a, b};
  spec.horizon = limits.horizon;
  spec.u_floor = std::min(limits.u_floor, -2.0 * a);
  spec.events.derivative_turned_negative = true;
  spec.events.crossed_zero_upward = true;
  const Trajectory traj = integrate(spec);
  const EventRecord& ev = traj.terminal_event();
  switch (ev.kind) {
    case EventKind::DerivativeTurnedNegative:
    case EventKind::HitFloor:
      return {SlopeClassKind::BMinus, ev};
    case EventKind::CrossedZeroUpward:
    case EventKind::DomainError:  // radicand only fails for u > 0
      return {SlopeClassKind::BPlus, ev};
    case EventKind::HorizonReached:
    case EventKind::ReachedLevel:
      break;
  }
  if (ev.state_at_event.du < 0.0) return {SlopeClassKind::BMinus, ev};
  if (ev.state_at_event.u > 0.0) return {SlopeClassKind::BPlus, ev};
  return {SlopeClassKind::UndeterminedWithinHorizon, ev};
}

/// Absolute and slope tolerances shrink with the anchor, so that small walls
/// keep their relative accuracy.
inline ModelParams scaled_for_anchor(ModelParams p, double a) {
  const double scale = std::min(1.0, a);
  p.tol.abs_tol *= scale;
  p.tol.slope_tol *= scale;
  return p;
}

/// sqrt(G(-a)): the slope forced on the B0 solution by the first integral.
inline double critical_slope_oracle(double a, const ModelParams& params) {
  if (a < 0.0) throw ParamError("anchor a must be non-negative");
  if (a == 0.0) return 0.0;
  return std::sqrt(first_integral(-a, validate(params)));
}

/// Bisection for the unique critical slope. The bracket starts at b = 0 (B-)
/// and an upper slope doubled from 1 until it overshoots.
inline ShootingOutcome find_critical_slope(double a, const ModelParams& params, const ShootingLimits& limits = {}) {
  if (!(a > 0.0)) throw ParamError("anchor a must be positive (u(0) = -a)");
  const ModelParams p = scaled_for_anchor(validate(params), a);

  auto classify = [&](double b) { return classify_slope(b, a, p, limits).value; };

  ShootingOutcome out;
  if (classify(0.0) != SlopeClassKind::BMinus) {
    throw BracketInconsistency("b = 0 did not classify as B- for a = " + std::to_string(a));
  }
  double lo = 0.0;
  double hi = 1.0;
  while (true) {
    const auto c = classify(hi);
    if (c == SlopeClassKind::BPlus) break;
    if (c == SlopeClassKind::UndeterminedWithinHorizon) {
      out.b_star = hi;
      out.b_lo = lo;
      out.b_hi = hi;
      break;
    }
    lo = hi;
    hi *= 2.0;
    if (hi >= 18446744073709551616.0) {
      throw NoUpperBracket("no overshooting slope found below 2^64 for a = " + std::to_string(a));
    }
  }

  bool landed = out.b_star != 0.0;
  while (!landed && hi - lo > p.tol.slope_tol) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    ++out.iterations;
    switch (classify(mid)) {
      case SlopeClassKind::BMinus: lo = mid; break;
      case SlopeClassKind::BPlus: hi = mid; break;
      case SlopeClassKind::UndeterminedWithinHorizon:
        out.b_star = mid;
        landed = true;
        break;
    }
  }
  out.b_lo = lo;
  out.b_hi = hi;
  if (!landed) out.b_star = 0.5 * (lo + hi);

  out.oracle_slope = critical_slope_oracle(a, p);
  out.agreement = std::abs(out.b_star - out.oracle_slope) / out.oracle_slope;
  return out;
}

/// Classifies every slope of a sorted grid and checks that no B+ slope lies
/// below a B- slope. Throws BracketInconsistency on an inversion.
inline std::vector<SlopeClass> scan_slopes(double a, std::span<const double> slopes, const ModelParams& params,
                                           const ShootingLimits& limits = {}) {
  std::vector<SlopeClass> classes;
  classes.reserve(slopes.size());
  double highest_minus = -1.0;
  double lowest_plus = std::numeric_limits<double>::infinity();
  for (double b : slopes) {
    classes.push_back(classify_slope(b, a, params, limits));
    if (classes.back().value == SlopeClassKind::BMinus) highest_minus = std::max(highest_minus, b);
    if (classes.back().value == SlopeClassKind::BPlus) lowest_plus = std::min(lowest_plus, b);
    if (lowest_plus < highest_minus) {
      throw BracketInconsistency("B+ slope " + std::to_string(lowest_plus) + " lies below B- slope " +
                                 std::to_string(highest_minus));
    }
  }
  return classes;
}

}  // namespace bpswall
