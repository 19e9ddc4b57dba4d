#pragma once

// The Born-Infeld domain-wall equation u'' = (e^u - 1) / sqrt(1 - (beta/4)(e^u - 1)^2),
// its potential, and its first integral.
//
// u = 2 ln f is the log of the squared Higgs amplitude. All formulas are
// written for the upper sign branch (f' + a f = 0); the lower branch follows
// from (a, F12) -> (-a, -F12) and shares every code path.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "bpswall/errors.hpp"
#include "bpswall/quadrature.hpp"

namespace bpswall {

enum class SignBranch { Upper, Lower };

struct Tolerances {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  double slope_tol = 1e-12;
};

struct ModelParams {
  double beta = 0.0;  // Born parameter, 1 / b^2
  SignBranch branch = SignBranch::Upper;
  Tolerances tol{};
};

/// A point on a trajectory: position, u and du/dx.
struct State {
  double x = 0.0;
  double u = 0.0;
  double du = 0.0;
};

/// Smallest admissible radicand 1 - (beta/4)(e^u - 1)^2.
inline constexpr double kRadicandGuard = 1e-14;

/// Returns params unchanged if valid; throws ParamError otherwise.
inline ModelParams validate(const ModelParams& params) {
  const double beta = params.beta;
  if (!std::isfinite(beta) || beta < 0.0 || beta >= 4.0) {
    throw ParamError("Born parameter must satisfy 0 <= beta < 4 (solutions exist only when beta < 4); got beta = " +
                     std::to_string(beta));
  }
  const auto& t = params.tol;
  if (!(t.abs_tol > 0.0) || !(t.rel_tol > 0.0) || !(t.slope_tol > 0.0)) {
    throw ParamError("tolerances must be strictly positive");
  }
  return params;
}

/// e^x - 1 - x without cancellation near 0.
inline double expm1_minus_x(double x) {
  if (std::abs(x) < 0.5) {
    double term = x * x / 2.0;
    double sum = term;
    for (int k = 3; k < 40; ++k) {
      term *= x / k;
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return std::expm1(x) - x;
}

/// Right-hand side of the wall equation. Throws DomainError when the
/// Born-Infeld radicand drops below kRadicandGuard (only possible for u > 0).
inline double rhs(double u, const ModelParams& params) {
  const double w = std::expm1(u);
  const double radicand = 1.0 - 0.25 * params.beta * w * w;
  if (!(radicand > kRadicandGuard)) {
    throw DomainError("Born-Infeld radicand " + std::to_string(radicand) + " at u = " + std::to_string(u));
  }
  return w / std::sqrt(radicand);
}

/// d(rhs)/du = e^u / (1 - (beta/4)(e^u - 1)^2)^(3/2); strictly positive.
inline double rhs_derivative(double u, const ModelParams& params) {
  const double w = std::expm1(u);
  const double radicand = 1.0 - 0.25 * params.beta * w * w;
  if (!(radicand > kRadicandGuard)) {
    throw DomainError("Born-Infeld radicand " + std::to_string(radicand) + " at u = " + std::to_string(u));
  }
  return std::exp(u) / (radicand * std::sqrt(radicand));
}

/// Born-Infeld Higgs potential V(|phi|^2) = (1/beta)(1 - sqrt(1 - (beta/4)(|phi|^2 - 1)^2)).
/// Evaluated as ((s-1)^2/4) / (1 + sqrt(.)), which is exact algebra and
/// reduces to (s-1)^2/8 at beta = 0.
inline double potential(double phi_sq, const ModelParams& params) {
  const double d = phi_sq - 1.0;
  const double radicand = 1.0 - 0.25 * params.beta * d * d;
  if (radicand < 0.0) {
    throw DomainError("potential radicand negative at |phi|^2 = " + std::to_string(phi_sq));
  }
  return 0.25 * d * d / (1.0 + std::sqrt(radicand));
}

/// Born-Infeld field energy (1/beta)(sqrt(1 + beta z) - 1) for z = F12^2;
/// z/2 at beta = 0.
inline double born_infeld_energy(double f12, double beta) {
  const double z = f12 * f12;
  return z / (std::sqrt(1.0 + beta * z) + 1.0);
}

inline quad::Options first_integral_quadrature(const ModelParams& params) {
  return {params.tol.abs_tol, 1e-13, 4000};
}

/// G(v) - G(ref) = integral over [v, ref] of -2 rhs, for v <= ref <= 0.
/// Integrating the short interval directly avoids cancellation.
inline double first_integral_difference(double v, double ref, const ModelParams& params) {
  if (v > 0.0 || ref > 0.0) {
    throw DomainError("first integral is defined for u <= 0");
  }
  if (v == ref) return 0.0;
  if (params.beta == 0.0) {
    const double d = v - ref;
    return 2.0 * (std::expm1(ref) * d + std::exp(ref) * expm1_minus_x(d));
  }
  auto integrand = [&](double s) { return -2.0 * rhs(s, params); };
  return quad::integrate(integrand, v, ref, first_integral_quadrature(params)).value;
}

/// G(ref - depth) - G(ref) for depth >= 0, parametrized by the depth so that
/// depths far below ulp(ref) keep full relative accuracy.
inline double first_integral_drop(double ref, double depth, const ModelParams& params) {
  if (ref > 0.0 || depth < 0.0) throw DomainError("first integral drop needs ref <= 0 and depth >= 0");
  if (depth == 0.0) return 0.0;
  if (params.beta == 0.0) {
    return 2.0 * (-std::expm1(ref) * depth + std::exp(ref) * expm1_minus_x(-depth));
  }
  auto integrand = [&](double tau) { return -2.0 * rhs(ref - tau, params); };
  return quad::integrate(integrand, 0.0, depth, first_integral_quadrature(params)).value;
}

/// G(u) = integral over [0, u] of 2 (e^s - 1) / sqrt(1 - (beta/4)(e^s - 1)^2) ds.
/// (u')^2 = G(u) along any solution with u, u' -> 0 at one end.
inline double first_integral(double u, const ModelParams& params) {
  if (u > 0.0) throw DomainError("first integral is defined for u <= 0");
  if (params.beta == 0.0) return 2.0 * expm1_minus_x(u);
  return first_integral_difference(u, 0.0, params);
}

/// Closed-form bounds 2(e^u - u - 1) <= G(u) <= 4(e^u - u - 1)/sqrt(4 - beta).
struct FirstIntegralBounds {
  double lower;
  double upper;
};

inline FirstIntegralBounds first_integral_bounds(double u, double beta) {
  const double base = 2.0 * expm1_minus_x(u);
  return {base, 2.0 * base / std::sqrt(4.0 - beta)};
}

/// Monotone table of G on [u_min, 0] with quintic Hermite interpolation.
/// Node derivatives are exact (G' = 2 rhs, G'' = 2 rhs'), so only the node
/// values come from quadrature. Immutable after construction.
class FirstIntegralTable {
 public:
  static constexpr int kInterpolationOrder = 5;

  FirstIntegralTable(const ModelParams& params, double u_min, double spacing = 0.01)
      : params_(validate(params)), spacing_(spacing) {
    if (!(u_min < 0.0) || !(spacing > 0.0)) throw ParamError("table needs u_min < 0 and spacing > 0");
    const auto n = static_cast<std::size_t>(std::ceil(-u_min / spacing));
    nodes_.resize(n + 1);
    double g = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
      const double u = -static_cast<double>(k) * spacing;
      if (k > 0) g += first_integral_difference(u, nodes_[k - 1].u, params_);
      nodes_[k] = {u, g, 2.0 * rhs(u, params_), 2.0 * rhs_derivative(u, params_)};
    }
  }

  struct Node {
    double u, g, dg, d2g;
  };

  [[nodiscard]] double beta() const { return params_.beta; }
  [[nodiscard]] double u_min() const { return nodes_.back().u; }
  [[nodiscard]] std::span<const Node> nodes() const { return nodes_; }

  [[nodiscard]] double operator()(double u) const {
    if (u > 0.0 || u < u_min()) throw DomainError("table query outside [u_min, 0]");
    auto k = static_cast<std::size_t>(-u / spacing_);
    if (k >= nodes_.size() - 1) k = nodes_.size() - 2;
    const Node& hi = nodes_[k];
    const Node& lo = nodes_[k + 1];
    const double h = hi.u - lo.u;
    const double t = (u - lo.u) / h;
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    const double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
    const double h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
    const double h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
    const double h3 = 0.5 * t3 - t4 + 0.5 * t5;
    const double h4 = -4 * t3 + 7 * t4 - 3 * t5;
    const double h5 = 10 * t3 - 15 * t4 + 6 * t5;
    return lo.g * h0 + h * lo.dg * h1 + h * h * lo.d2g * h2 + h * h * hi.d2g * h3 + h * hi.dg * h4 + hi.g * h5;
  }

 private:
  ModelParams params_;
  double spacing_;
  std::vector<Node> nodes_;
};

}  // namespace bpswall
