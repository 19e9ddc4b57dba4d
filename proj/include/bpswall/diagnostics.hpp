#pragma once

// Every residual, fit and bracket check of a wall profile, gated against
// fixed thresholds. Computed from the sampled profile alone, so a profile
// read back from disk yields the same report.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bpswall/fields.hpp"
#include "bpswall/integrate.hpp"
#include "bpswall/model.hpp"
#include "bpswall/profile.hpp"
#include "bpswall/shoot.hpp"

namespace bpswall {

namespace thresholds {
inline constexpr double kFirstIntegral = 1e-9;  // relative to 1 + |G|
inline constexpr double kOdeResidual = 1e-5;
inline constexpr double kBps = 1e-6;
inline constexpr double kEulerLagrange = 1e-4;
inline constexpr double kEnergyIdentity = 1e-6;
inline constexpr double kF12Consistency = 1e-6;
inline constexpr double kQuadratureEquivalence = 1e-6;
inline constexpr double kSlopeAgreement = 1e-8;
inline constexpr double kBeta0Coincidence = 1e-9;
inline constexpr double kSymmetry = 1e-8;
inline constexpr double kSlopeAtMaximum = 1e-10;
inline constexpr double kLambdaLeft = 0.05;
inline constexpr double kCRight = 1e-3;
}  // namespace thresholds

struct Gate {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct DiagnosticsReport {
  BoundaryCondition bc = BoundaryCondition::HiggsToMagnetic;
  double beta = 0.0;
  double anchor = 0.0;
  std::size_t nodes = 0;
  double x_min = 0.0, x_max = 0.0;
  bool truncated = false;

  // Slope at the anchor: -u'(0) for the Higgs-to-magnetic wall.
  double anchor_slope = 0.0;
  std::optional<double> oracle_slope;
  std::optional<double> agreement;
  std::optional<double> b_star;  // shooting details, present only after a solve
  std::optional<double> b_lo, b_hi;
  std::optional<int> iterations;
  std::optional<int> shooting_segments;

  double first_integral = 0.0;
  double ode = 0.0;
  BpsResidual bps{};
  ElResidual el{};
  double energy_identity = 0.0;
  double f12_consistency = 0.0;
  double quadrature_equivalence = 0.0;
  double max_u = 0.0;
  std::size_t non_decreasing_nodes = 0;  // Higgs-to-magnetic: nodes with u' >= 0
  std::optional<double> symmetry;
  std::optional<double> slope_at_maximum;
  std::size_t nodes_above_maximum = 0;

  std::optional<TailFit> tails;
  double theorem_c_right = 1.0;  // the x^2/2 coefficient of the stated asymptotics
  bool c_right_deviates_from_theorem = false;
  BracketReport brackets{};

  double flux_window = 0.0;
  double far_field_energy_density = 0.0;           // 1 / (2 sqrt(4 - beta))
  double far_field_energy_density_measured = 0.0;  // H at the right end

  std::vector<Gate> gates;
  std::vector<std::string> warnings;
  bool pass = false;
};

inline DiagnosticsReport diagnose(const WallProfile& prof, const std::optional<ShootingOutcome>& shot = std::nullopt) {
  using namespace thresholds;
  DiagnosticsReport rep;
  const ModelParams& params = prof.params;
  const bool higgs = prof.bc == BoundaryCondition::HiggsToMagnetic;
  rep.bc = prof.bc;
  rep.beta = params.beta;
  rep.anchor = prof.anchor;
  rep.nodes = prof.size();
  rep.x_min = prof.x.front();
  rep.x_max = prof.x.back();
  rep.truncated = prof.truncated;
  if (prof.truncated) {
    rep.warnings.push_back("profile ends at the u floor, x = " + std::to_string(prof.x.back()));
  }

  auto gate = [&](std::string name, double value, double threshold) {
    rep.gates.push_back({std::move(name), value, threshold, value <= threshold});
  };

  const std::size_t o = prof.origin();
  if (higgs) {
    rep.anchor_slope = -prof.du[o];
    rep.oracle_slope = critical_slope_oracle(-prof.anchor, params);
    rep.agreement = std::abs(rep.anchor_slope - *rep.oracle_slope) / *rep.oracle_slope;
    gate("slope_agreement", *rep.agreement, kSlopeAgreement);
  }
  if (shot) {
    rep.b_star = shot->b_star;
    rep.b_lo = shot->b_lo;
    rep.b_hi = shot->b_hi;
    rep.iterations = shot->iterations;
  }
  if (prof.shooting_segments > 0) rep.shooting_segments = prof.shooting_segments;

  rep.first_integral = first_integral_residual(prof);
  gate("first_integral", rep.first_integral, kFirstIntegral);

  {
    std::vector<State> states(prof.size());
    for (std::size_t i = 0; i < prof.size(); ++i) states[i] = {prof.x[i], prof.u[i], prof.du[i]};
    rep.ode = ode_residual(states, prof.spacing, params);
    gate("ode_residual", rep.ode, kOdeResidual);
  }

  const FieldProfile fp = reconstruct(prof);
  rep.bps = bps_residual(fp, params);
  rep.el = el_residual(fp, params);
  rep.energy_identity = energy_identity(fp, params);
  rep.f12_consistency = f12_consistency(fp);
  gate("bps_r1", rep.bps.r1, kBps);
  gate("bps_r2", rep.bps.r2, kBps);
  gate("el_r3", rep.el.r3, kEulerLagrange);
  gate("el_r4", rep.el.r4, kEulerLagrange);
  gate("energy_identity", rep.energy_identity, kEnergyIdentity);
  gate("f12_consistency", rep.f12_consistency, kF12Consistency);
  rep.flux_window = fp.flux_window;
  rep.far_field_energy_density = far_field_energy_density(params.beta);
  rep.far_field_energy_density_measured = fp.H.back();

  rep.quadrature_equivalence = quadrature_equivalence(prof);
  gate("quadrature_equivalence", rep.quadrature_equivalence, kQuadratureEquivalence);

  rep.max_u = *std::max_element(prof.u.begin(), prof.u.end());
  if (higgs) {
    for (double d : prof.du) rep.non_decreasing_nodes += d >= 0.0 ? 1 : 0;
    gate("non_decreasing_nodes", static_cast<double>(rep.non_decreasing_nodes), 0.0);
    gate("max_u_negative", rep.max_u < 0.0 ? 0.0 : 1.0, 0.0);
  } else {
    double sym = 0.0;
    const std::size_t n = prof.size();
    for (std::size_t i = 0; i < n; ++i) sym = std::max(sym, std::abs(prof.u[i] - prof.u[n - 1 - i]));
    rep.symmetry = sym;
    rep.slope_at_maximum = std::abs(prof.du[o]);
    for (double u : prof.u) rep.nodes_above_maximum += u > prof.u[o] ? 1 : 0;
    gate("symmetry", sym, kSymmetry);
    gate("slope_at_maximum", *rep.slope_at_maximum, kSlopeAtMaximum);
    gate("nodes_above_maximum", static_cast<double>(rep.nodes_above_maximum), 0.0);
    gate("max_u_nonpositive", rep.max_u <= 0.0 ? 0.0 : 1.0, 0.0);
  }

  try {
    rep.tails = fit_tails(prof);
    if (rep.tails->lambda_left) gate("lambda_left", std::abs(*rep.tails->lambda_left - 1.0), kLambdaLeft);
    gate("c_right", std::abs(rep.tails->c_right - rep.tails->predicted_c_right), kCRight);
    rep.c_right_deviates_from_theorem = std::abs(rep.tails->c_right - rep.theorem_c_right) > kCRight;
    if (rep.c_right_deviates_from_theorem) {
      rep.warnings.push_back("right-tail coefficient follows 2/sqrt(4 - beta), not the beta = 0 value 1");
    }
  } catch (const InsufficientTail& e) {
    rep.warnings.push_back(std::string("tail fit skipped: ") + e.what());
  }

  rep.brackets = check_brackets(prof);
  gate("bracket_violations", static_cast<double>(rep.brackets.violations), 0.0);
  gate("x_bound_violations", static_cast<double>(rep.brackets.x_violations), 0.0);
  if (higgs && params.beta == 0.0) gate("beta0_coincidence", rep.brackets.max_lower_gap, kBeta0Coincidence);

  rep.pass = std::all_of(rep.gates.begin(), rep.gates.end(), [](const Gate& g) { return g.pass; });
  return rep;
}

}  // namespace bpswall
