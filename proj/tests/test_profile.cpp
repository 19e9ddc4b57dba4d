#include <cmath>
#include <map>
#include <span>
#include <vector>

#include <gtest/gtest.h>

#include "bpswall/profile.hpp"
#include "oracles.hpp"

using namespace bpswall;

namespace {

ModelParams with_beta(double beta) {
  ModelParams p;
  p.beta = beta;
  return p;
}

// Solving is the expensive part; each (bc, beta) pair is built once.
const WallProfile& higgs(double beta) {
  static std::map<double, WallProfile> cache;
  auto it = cache.find(beta);
  if (it == cache.end()) it = cache.emplace(beta, solve_higgs_to_magnetic(1.0, with_beta(beta))).first;
  return it->second;
}

const WallProfile& magnetic(double beta) {
  static std::map<double, WallProfile> cache;
  auto it = cache.find(beta);
  if (it == cache.end()) it = cache.emplace(beta, solve_magnetic_to_magnetic(-1.0, with_beta(beta))).first;
  return it->second;
}

double value_at(const WallProfile& p, double x) {
  const auto i = static_cast<std::size_t>(std::lround(x / p.spacing) - p.k_begin);
  return p.u[i];
}

}  // namespace

TEST(HiggsToMagnetic, LeftTailAndAnchor) {
  const WallProfile prof = solve_higgs_to_magnetic(1.0, with_beta(0.0), Window{-20.0, 8.0});
  EXPECT_DOUBLE_EQ(prof.x.front(), -20.0);
  EXPECT_GT(prof.u.front(), -1e-7);
  EXPECT_LT(prof.u.front(), 0.0);
  EXPECT_EQ(prof.u[prof.origin()], -1.0);
  EXPECT_EQ(prof.x[prof.origin()], 0.0);
  EXPECT_NEAR(prof.du[prof.origin()], -oracle::kSqrtTwoOverE, 1e-8);
  EXPECT_LE(prof.x.back(), 8.0 + 1e-12);
  EXPECT_GT(prof.shooting_segments, 1);
}

TEST(HiggsToMagnetic, StrictlyDecreasingAndNegative) {
  for (double beta : {0.0, 2.0, 3.9}) {
    const WallProfile& prof = higgs(beta);
    for (std::size_t i = 0; i < prof.size(); ++i) {
      ASSERT_LT(prof.du[i], 0.0) << beta << " x=" << prof.x[i];
      ASSERT_LT(prof.u[i], 0.0);
      if (i > 0) ASSERT_LT(prof.u[i], prof.u[i - 1]);
    }
  }
}

TEST(HiggsToMagnetic, RightHalfIsConcave) {
  const WallProfile& prof = higgs(2.0);
  for (std::size_t i = prof.origin() + 1; i + 1 < prof.size(); ++i) {
    ASSERT_LT(prof.u[i + 1] - 2 * prof.u[i] + prof.u[i - 1], 0.0);
  }
}

TEST(HiggsToMagnetic, UniformGrid) {
  const WallProfile& prof = higgs(0.0);
  for (std::size_t i = 0; i < prof.size(); ++i) {
    EXPECT_DOUBLE_EQ(prof.x[i], static_cast<double>(prof.k_begin + static_cast<long>(i)) * prof.spacing);
  }
  EXPECT_TRUE(prof.truncated);  // reaches u = -40 before x = 12
}

TEST(HiggsToMagnetic, FirstIntegral) {
  for (double beta : {0.0, 1.0, 3.9}) EXPECT_LE(first_integral_residual(higgs(beta)), 1e-9) << beta;
}

TEST(HiggsToMagnetic, RejectsBadInput) {
  EXPECT_THROW(solve_higgs_to_magnetic(0.0, with_beta(0.0)), ParamError);
  EXPECT_THROW(solve_higgs_to_magnetic(1.0, with_beta(4.0)), ParamError);
  EXPECT_THROW(solve_higgs_to_magnetic(1.0, with_beta(0.0), Window{1.0, 2.0}), ParamError);
}

TEST(MagneticToMagnetic, SymmetryAndMaximum) {
  for (double beta : {0.0, 2.0}) {
    const WallProfile& prof = magnetic(beta);
    const std::size_t n = prof.size();
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(prof.u[i], prof.u[n - 1 - i], 1e-10);
    EXPECT_EQ(prof.u[prof.origin()], -1.0);
    EXPECT_LE(std::abs(prof.du[prof.origin()]), 1e-10);
    for (double u : prof.u) EXPECT_LE(u, -1.0);
  }
}

TEST(MagneticToMagnetic, SlopeAtMinusTwo) {
  const WallProfile& prof = magnetic(0.0);
  // locate u = -2 on the right half and interpolate (u')^2 linearly
  for (std::size_t i = prof.origin(); i + 1 < prof.size(); ++i) {
    if (prof.u[i + 1] <= -2.0) {
      const double t = (-2.0 - prof.u[i]) / (prof.u[i + 1] - prof.u[i]);
      const double du = prof.du[i] + t * (prof.du[i + 1] - prof.du[i]);
      EXPECT_NEAR(du * du, oracle::kMagneticSlopeSq_m2, 1e-4);
      break;
    }
  }
  EXPECT_NEAR(2.0 * (std::exp(-2.0) + 1.0 - std::exp(-1.0)), oracle::kMagneticSlopeSq_m2, 1e-15);
}

TEST(MagneticToMagnetic, FirstIntegral) {
  for (double beta : {0.0, 2.0}) EXPECT_LE(first_integral_residual(magnetic(beta)), 1e-9) << beta;
}

TEST(MagneticToMagnetic, RejectsBadInput) {
  EXPECT_THROW(solve_magnetic_to_magnetic(0.0, with_beta(0.0)), DegenerateProfile);
  EXPECT_THROW(solve_magnetic_to_magnetic(0.5, with_beta(0.0)), ParamError);
}

namespace {
void expect_frozen(BoundaryCondition bc, double beta, std::span<const oracle::XOfU> table) {
  for (const auto& ref : table) {
    const double u[] = {ref.u};
    const auto pts = profile_by_quadrature(-1.0, with_beta(beta), bc, u);
    EXPECT_NEAR(pts[0].x, ref.x, 1e-10) << beta << " " << ref.u;
  }
}
}  // namespace

TEST(Quadrature, FrozenHiggsValues) {
  expect_frozen(BoundaryCondition::HiggsToMagnetic, 0.0, oracle::kHiggsBeta0);
  expect_frozen(BoundaryCondition::HiggsToMagnetic, 2.0, oracle::kHiggsBeta2);
}

TEST(Quadrature, FrozenMagneticValues) {
  expect_frozen(BoundaryCondition::MagneticToMagnetic, 0.0, oracle::kMagneticBeta0);
  expect_frozen(BoundaryCondition::MagneticToMagnetic, 2.0, oracle::kMagneticBeta2);
}

TEST(Quadrature, AnchorNormalization) {
  const double u[] = {-1.0};
  EXPECT_EQ(profile_by_quadrature(-1.0, with_beta(0.0), BoundaryCondition::HiggsToMagnetic, u)[0].x, 0.0);
  EXPECT_EQ(profile_by_quadrature(-1.0, with_beta(0.0), BoundaryCondition::MagneticToMagnetic, u)[0].x, 0.0);
}

TEST(Quadrature, RejectsUnsortedSamples) {
  const double u[] = {-2.0, -1.0};
  EXPECT_THROW(profile_by_quadrature(-1.0, with_beta(0.0), BoundaryCondition::HiggsToMagnetic, u), ParamError);
}

TEST(Quadrature, EquivalenceWithIvp) {
  for (double beta : {0.0, 2.0}) {
    EXPECT_LE(quadrature_equivalence(higgs(beta)), 1e-6) << beta;
    EXPECT_LE(quadrature_equivalence(magnetic(beta)), 1e-6) << beta;
  }
}

TEST(Quadrature, DetectsShiftedProfile) {
  WallProfile shifted = higgs(0.0);
  for (double& u : shifted.u) u *= 1.0 + 1e-4;
  shifted.u[shifted.origin()] = -1.0;
  EXPECT_GT(quadrature_equivalence(shifted), 1e-6);
}

TEST(Tails, BetaZero) {
  const TailFit t = fit_tails(higgs(0.0));
  ASSERT_TRUE(t.lambda_left.has_value());
  EXPECT_NEAR(*t.lambda_left, 1.0, 0.05);
  EXPECT_NEAR(t.c_right, 1.0, 1e-3);
  EXPECT_DOUBLE_EQ(t.predicted_c_right, 1.0);
}

TEST(Tails, BetaThree) {
  const TailFit t = fit_tails(higgs(3.0));
  EXPECT_NEAR(*t.lambda_left, 1.0, 0.05);
  EXPECT_NEAR(t.c_right, 2.0, 1e-3);
}

TEST(Tails, MagneticHasNoLeftRate) {
  const TailFit t = fit_tails(magnetic(2.0));
  EXPECT_FALSE(t.lambda_left.has_value());
  EXPECT_NEAR(t.c_right, std::sqrt(2.0), 1e-3);
}

TEST(Tails, ShortWindowIsInsufficient) {
  const WallProfile prof = solve_higgs_to_magnetic(1.0, with_beta(0.0), Window{-2.0, 2.0});
  EXPECT_THROW(fit_tails(prof), InsufficientTail);
}

TEST(Brackets, BetaZeroCoincide) {
  const BracketReport r = check_brackets(higgs(0.0));
  EXPECT_TRUE(r.pass());
  EXPECT_LE(r.max_lower_gap, 1e-9);
}

TEST(Brackets, StrictForPositiveBeta) {
  for (double beta : {1.0, 2.0, 3.0}) {
    const BracketReport r = check_brackets(higgs(beta));
    EXPECT_TRUE(r.pass()) << beta;
    EXPECT_EQ(r.violations, 0u);
    EXPECT_GT(r.strict_min_margin, 0.0) << beta;
  }
}

TEST(Brackets, MagneticWall) {
  const BracketReport r = check_brackets(magnetic(2.0));
  EXPECT_TRUE(r.pass());
  // The uncorrected -sqrt(2) x bound fails near the maximum, where u' = 0.
  EXPECT_GT(r.uncorrected_upper_violations, 0u);
}

TEST(Brackets, ViolationIsReported) {
  WallProfile bad = higgs(2.0);
  bad.du[bad.origin() + 100] *= 1.2;
  const BracketReport r = check_brackets(bad);
  EXPECT_FALSE(r.pass());
  ASSERT_TRUE(r.first_violation_x.has_value());
  EXPECT_NEAR(*r.first_violation_x, 1.0, 1e-12);
}

TEST(Brackets, VacuumInput) {
  WallProfile zero;
  zero.params = with_beta(2.0);
  zero.k_begin = -5;
  for (long k = -5; k <= 5; ++k) {
    zero.x.push_back(k * zero.spacing);
    zero.u.push_back(0.0);
    zero.du.push_back(0.0);
  }
  const BracketReport r = check_brackets(zero);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_EQ(r.min_lower_margin, 0.0);
  EXPECT_EQ(r.min_upper_margin, 0.0);
}

TEST(Profile, GridValueLookup) { EXPECT_EQ(value_at(higgs(0.0), 0.0), -1.0); }
