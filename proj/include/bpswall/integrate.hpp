#pragma once

// Adaptive Dormand-Prince 5(4) integration of u'' = rhs(u) as the first-order
// system (u, p), with dense output and event location.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bpswall/errors.hpp"
#include "bpswall/model.hpp"

namespace bpswall {

enum class Direction { Forward, Backward };

enum class EventKind {
  DerivativeTurnedNegative,
  CrossedZeroUpward,
  HitFloor,
  ReachedLevel,
  HorizonReached,
  DomainError,
};

inline const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::DerivativeTurnedNegative: return "DerivativeTurnedNegative";
    case EventKind::CrossedZeroUpward: return "CrossedZeroUpward";
    case EventKind::HitFloor: return "HitFloor";
    case EventKind::ReachedLevel: return "ReachedLevel";
    case EventKind::HorizonReached: return "HorizonReached";
    case EventKind::DomainError: return "DomainError";
  }
  return "?";
}

/// Optional stopping events. The floor event (u falling through u_floor) and
/// the horizon are always active. Derivative-based events refer to du/ds, the
/// derivative along the direction of integration.
struct EventSet {
  bool derivative_turned_negative = false;
  bool crossed_zero_upward = false;
  std::optional<double> level;  // stop when u rises through this value
};

struct IvpSpec {
  ModelParams params{};
  State initial{};
  Direction direction = Direction::Forward;
  double horizon = 40.0;   // max |x - x0|
  double u_floor = -40.0;
  EventSet events{};
  double max_step = 0.25;
};

struct EventRecord {
  EventKind kind = EventKind::HorizonReached;
  double x_event = 0.0;
  State state_at_event{};
};

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  double min_step = std::numeric_limits<double>::infinity();
  double max_step = 0.0;
};

namespace detail {

// Dormand-Prince 5(4) tableau (Hairer, Norsett & Wanner).
struct Dopri5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

using Vec2 = std::array<double, 2>;

}  // namespace detail

/// Continuous extension of one accepted step, in the integration variable s.
struct DenseStep {
  double s0 = 0.0;
  double h = 0.0;
  std::array<std::array<double, 5>, 2> r{};

  [[nodiscard]] detail::Vec2 eval(double s) const {
    const double theta = (s - s0) / h;
    const double theta1 = 1.0 - theta;
    detail::Vec2 y{};
    for (std::size_t c = 0; c < 2; ++c) {
      const auto& k = r[c];
      y[c] = k[0] + theta * (k[1] + theta1 * (k[2] + theta * (k[3] + theta1 * k[4])));
    }
    return y;
  }
};

/// Result of one integration. Samples are the accepted step ends, ordered in
/// the integration direction and closed by the terminal event state.
class Trajectory {
 public:
  Trajectory(Direction direction, double x0) : direction_(direction), x0_(x0) {}

  [[nodiscard]] Direction direction() const { return direction_; }
  [[nodiscard]] std::span<const State> samples() const { return samples_; }
  [[nodiscard]] const EventRecord& terminal_event() const { return terminal_; }
  [[nodiscard]] const StepStats& step_stats() const { return stats_; }
  [[nodiscard]] double x_begin() const { return x0_; }
  [[nodiscard]] double x_end() const { return terminal_.x_event; }
  /// Distance covered along the integration direction.
  [[nodiscard]] double length() const { return std::abs(x_end() - x0_); }

  /// Dense-output state at x within [x_begin, x_end].
  [[nodiscard]] State at(double x) const {
    const double s = sign() * (x - x0_);
    if (dense_.empty() || s <= 0.0) return samples_.front();
    if (s >= s_end_) {
      State end = terminal_.state_at_event;
      end.x = x;
      return end;
    }
    auto it = std::upper_bound(dense_.begin(), dense_.end(), s,
                               [](double v, const DenseStep& d) { return v < d.s0; });
    const DenseStep& step = *std::prev(it);
    const auto y = step.eval(s);
    return {x, y[0], sign() * y[1]};
  }

  [[nodiscard]] double sign() const { return direction_ == Direction::Forward ? 1.0 : -1.0; }

 private:
  friend Trajectory integrate(const IvpSpec& spec);

  Direction direction_;
  double x0_;
  double s_end_ = 0.0;
  std::vector<State> samples_;
  std::vector<DenseStep> dense_;
  EventRecord terminal_{};
  StepStats stats_{};
};

namespace detail {

inline double error_norm(const Vec2& y0, const Vec2& y1, const Vec2& err, const Tolerances& tol) {
  double sum = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    const double sc = tol.abs_tol + tol.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    sum += (err[i] / sc) * (err[i] / sc);
  }
  return std::sqrt(sum / 2.0);
}

/// Bisection on a dense step for the first root of g in (s_lo, s_hi].
template <typename G>
double polish_root(const DenseStep& step, double s_lo, double s_hi, G&& g) {
  double g_lo = g(step.eval(s_lo));
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (s_lo + s_hi);
    if (!(mid > s_lo && mid < s_hi) || s_hi - s_lo <= 1e-13 * std::max(1.0, std::abs(s_hi))) break;
    const double g_mid = g(step.eval(mid));
    if ((g_mid < 0) == (g_lo < 0) && g_mid != 0.0) {
      s_lo = mid;
      g_lo = g_mid;
    } else {
      s_hi = mid;
    }
  }
  return s_hi;
}

}  // namespace detail

/// Integrates spec.initial along spec.direction until the first enabled event,
/// the floor, or the horizon. A DomainError inside a step shrinks the step;
/// only when the step underflows is it recorded as the terminal event.
inline Trajectory integrate(const IvpSpec& spec) {
  using detail::Dopri5;
  using detail::Vec2;
  const ModelParams params = validate(spec.params);
  if (!(spec.horizon > 0.0)) throw ParamError("horizon must be positive");
  if (!(spec.u_floor < spec.initial.u)) throw ParamError("u_floor must lie below the initial u");

  Trajectory traj(spec.direction, spec.initial.x);
  const double sgn = traj.sign();
  const auto& tol = params.tol;
  const double h_min = 1e-14 * spec.horizon;

  auto to_state = [&](double s, const Vec2& y) { return State{spec.initial.x + sgn * s, y[0], sgn * y[1]}; };
  auto finish = [&](EventKind kind, double s, const Vec2& y) {
    const State st = to_state(s, y);
    if (!traj.samples_.empty() && traj.samples_.back().x == st.x) traj.samples_.pop_back();
    traj.samples_.push_back(st);
    traj.terminal_ = {kind, st.x, st};
    traj.s_end_ = s;
    return traj;
  };

  double s = 0.0;
  Vec2 y{spec.initial.u, sgn * spec.initial.du};
  traj.samples_.push_back(to_state(s, y));

  auto f = [&](const Vec2& v) { return Vec2{v[1], rhs(v[0], params)}; };
  Vec2 k1;
  try {
    k1 = f(y);
  } catch (const DomainError&) {
    return finish(EventKind::DomainError, 0.0, y);
  }

  // Initial step guess (Hairer's heuristic, order 5).
  double h;
  {
    auto sc = [&](std::size_t i) { return tol.abs_tol + tol.rel_tol * std::abs(y[i]); };
    double d0 = 0, d1 = 0;
    for (std::size_t i = 0; i < 2; ++i) {
      d0 += (y[i] / sc(i)) * (y[i] / sc(i));
      d1 += (k1[i] / sc(i)) * (k1[i] / sc(i));
    }
    d0 = std::sqrt(d0 / 2), d1 = std::sqrt(d1 / 2);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, spec.max_step);
    double d2 = 0;
    try {
      const Vec2 y1{y[0] + h0 * k1[0], y[1] + h0 * k1[1]};
      const Vec2 k2 = f(y1);
      for (std::size_t i = 0; i < 2; ++i) d2 += ((k2[i] - k1[i]) / sc(i)) * ((k2[i] - k1[i]) / sc(i));
      d2 = std::sqrt(d2 / 2) / h0;
    } catch (const DomainError&) {
      d2 = 0;
    }
    const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                : std::pow(0.01 / std::max(d1, d2), 0.2);
    h = std::min({100 * h0, h1, spec.max_step, spec.horizon});
  }

  const auto& ev = spec.events;
  while (true) {
    const double remaining = spec.horizon - s;
    if (remaining <= 1e-14 * spec.horizon) return finish(EventKind::HorizonReached, spec.horizon, y);
    h = std::min({h, remaining, spec.max_step});
    if (h < h_min) {
      throw StepFailure("step size underflow at x = " + std::to_string(spec.initial.x + sgn * s));
    }

    Vec2 k2, k3, k4, k5, k6, k7, y_new;
    bool domain_failed = false;
    try {
      auto stage = [&](double b1, const Vec2& a, double b2, const Vec2& b, double b3, const Vec2& c, double b4,
                       const Vec2& d, double b5, const Vec2& e) {
        Vec2 out;
        for (std::size_t i = 0; i < 2; ++i)
          out[i] = y[i] + h * (b1 * a[i] + b2 * b[i] + b3 * c[i] + b4 * d[i] + b5 * e[i]);
        return out;
      };
      const Vec2 zero{0, 0};
      k2 = f(stage(Dopri5::a21, k1, 0, zero, 0, zero, 0, zero, 0, zero));
      k3 = f(stage(Dopri5::a31, k1, Dopri5::a32, k2, 0, zero, 0, zero, 0, zero));
      k4 = f(stage(Dopri5::a41, k1, Dopri5::a42, k2, Dopri5::a43, k3, 0, zero, 0, zero));
      k5 = f(stage(Dopri5::a51, k1, Dopri5::a52, k2, Dopri5::a53, k3, Dopri5::a54, k4, 0, zero));
      Vec2 y6;
      for (std::size_t i = 0; i < 2; ++i)
        y6[i] = y[i] + h * (Dopri5::a61 * k1[i] + Dopri5::a62 * k2[i] + Dopri5::a63 * k3[i] +
                            Dopri5::a64 * k4[i] + Dopri5::a65 * k5[i]);
      k6 = f(y6);
      for (std::size_t i = 0; i < 2; ++i)
        y_new[i] = y[i] + h * (Dopri5::a71 * k1[i] + Dopri5::a73 * k3[i] + Dopri5::a74 * k4[i] +
                               Dopri5::a75 * k5[i] + Dopri5::a76 * k6[i]);
      k7 = f(y_new);
    } catch (const DomainError&) {
      domain_failed = true;
    }

    if (domain_failed || !std::isfinite(y_new[0]) || !std::isfinite(y_new[1])) {
      ++traj.stats_.rejected;
      h *= 0.25;
      if (h < h_min) {
        if (domain_failed) return finish(EventKind::DomainError, s, y);
        throw StepFailure("non-finite state at x = " + std::to_string(spec.initial.x + sgn * s));
      }
      continue;
    }

    Vec2 err;
    for (std::size_t i = 0; i < 2; ++i)
      err[i] = h * (Dopri5::e1 * k1[i] + Dopri5::e3 * k3[i] + Dopri5::e4 * k4[i] + Dopri5::e5 * k5[i] +
                    Dopri5::e6 * k6[i] + Dopri5::e7 * k7[i]);
    const double en = detail::error_norm(y, y_new, err, tol);
    if (en > 1.0) {
      ++traj.stats_.rejected;
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
      continue;
    }

    DenseStep dense;
    dense.s0 = s;
    dense.h = h;
    for (std::size_t i = 0; i < 2; ++i) {
      const double ydiff = y_new[i] - y[i];
      const double bspl = h * k1[i] - ydiff;
      dense.r[i] = {y[i], ydiff, bspl, ydiff - h * k7[i] - bspl,
                    h * (Dopri5::d1 * k1[i] + Dopri5::d3 * k3[i] + Dopri5::d4 * k4[i] + Dopri5::d5 * k5[i] +
                         Dopri5::d6 * k6[i] + Dopri5::d7 * k7[i])};
    }
    traj.dense_.push_back(dense);
    ++traj.stats_.accepted;
    traj.stats_.min_step = std::min(traj.stats_.min_step, h);
    traj.stats_.max_step = std::max(traj.stats_.max_step, h);

    // Events, in priority order.
    const double s_new = s + h;
    std::optional<std::pair<EventKind, double>> hit;
    auto consider = [&](EventKind kind, auto&& g) {
      if (hit) return;
      hit = {kind, detail::polish_root(dense, s, s_new, g)};
    };
    if (ev.crossed_zero_upward && y[0] < 0.0 && y_new[0] >= 0.0)
      consider(EventKind::CrossedZeroUpward, [](const Vec2& v) { return v[0]; });
    if (ev.derivative_turned_negative && y[1] > 0.0 && y_new[1] < 0.0)
      consider(EventKind::DerivativeTurnedNegative, [](const Vec2& v) { return -v[1]; });
    if (ev.level && y[0] < *ev.level && y_new[0] >= *ev.level) {
      const double level = *ev.level;
      consider(EventKind::ReachedLevel, [level](const Vec2& v) { return v[0] - level; });
    }
    if (y[0] >= spec.u_floor && y_new[0] < spec.u_floor) {
      const double floor = spec.u_floor;
      consider(EventKind::HitFloor, [floor](const Vec2& v) { return floor - v[0]; });
    }
    if (hit) {
      return finish(hit->first, hit->second, dense.eval(hit->second));
    }

    s = s_new;
    y = y_new;
    k1 = k7;
    traj.samples_.push_back(to_state(s, y));
    h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(en, 1e-10), -0.2)));
  }
}

/// Dense-output samples of a trajectory on a uniform grid of the given spacing.
inline std::vector<State> resample(const Trajectory& traj, double spacing) {
  std::vector<State> out;
  const auto n = static_cast<std::size_t>(std::floor(traj.length() / spacing + 1e-9));
  out.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k) out.push_back(traj.at(traj.x_begin() + traj.sign() * spacing * k));
  return out;
}

/// max over interior nodes of |centered second difference of u - rhs(u)| on a
/// uniform resampling of the trajectory.
inline double ode_residual(std::span<const State> uniform, double spacing, const ModelParams& params) {
  if (uniform.size() < 3) throw ParamError("ode_residual needs at least 3 samples");
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < uniform.size(); ++k) {
    const double upp = (uniform[k + 1].u - 2.0 * uniform[k].u + uniform[k - 1].u) / (spacing * spacing);
    worst = std::max(worst, std::abs(upp - rhs(uniform[k].u, params)));
  }
  return worst;
}

inline double ode_residual(const Trajectory& traj, const ModelParams& params, double spacing = 1e-2) {
  return ode_residual(resample(traj, spacing), spacing, params);
}

}  // namespace bpswall
