#include <cmath>

#include <gtest/gtest.h>

#include "bpswall/model.hpp"
#include "oracles.hpp"

using namespace bpswall;

namespace {
ModelParams with_beta(double beta) {
  ModelParams p;
  p.beta = beta;
  return p;
}
}  // namespace

TEST(Validate, BetaRange) {
  EXPECT_NO_THROW(validate(with_beta(0.0)));
  EXPECT_NO_THROW(validate(with_beta(3.999)));
  EXPECT_THROW(validate(with_beta(4.0)), ParamError);
  EXPECT_THROW(validate(with_beta(4.5)), ParamError);
  EXPECT_THROW(validate(with_beta(-0.1)), ParamError);
  EXPECT_THROW(validate(with_beta(std::nan(""))), ParamError);
}

TEST(Validate, MessageQuotesBound) {
  try {
    validate(with_beta(4.0));
    FAIL();
  } catch (const ParamError& e) {
    EXPECT_NE(std::string(e.what()).find("beta < 4"), std::string::npos);
  }
}

TEST(Validate, Tolerances) {
  ModelParams p;
  p.tol.rel_tol = 0.0;
  EXPECT_THROW(validate(p), ParamError);
  p = {};
  p.tol.slope_tol = -1.0;
  EXPECT_THROW(validate(p), ParamError);
}

TEST(Rhs, Values) {
  EXPECT_EQ(rhs(0.0, with_beta(2.0)), 0.0);
  EXPECT_NEAR(rhs(-50.0, with_beta(0.0)), -1.0, 1e-15);
  EXPECT_NEAR(rhs(-50.0, with_beta(2.0)), -std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(rhs(-1.0, with_beta(0.0)), oracle::kRhs_m1_beta0, 1e-16);
}

TEST(Rhs, RadicandGuard) {
  // (e^u - 1)^2 reaches 4/beta = 1.0256 at u = ln(2.0127)
  EXPECT_THROW(rhs(0.8, with_beta(3.9)), DomainError);
  EXPECT_NO_THROW(rhs(0.5, with_beta(3.9)));
}

TEST(Rhs, DerivativeMatchesDifference) {
  const auto p = with_beta(2.5);
  for (double u : {-3.0, -1.0, -0.2, 0.0, 0.3}) {
    const double h = 1e-5;
    const double fd = (rhs(u + h, p) - rhs(u - h, p)) / (2 * h);
    EXPECT_NEAR(rhs_derivative(u, p), fd, 1e-8) << u;
  }
}

TEST(Potential, Values) {
  EXPECT_EQ(potential(1.0, with_beta(2.0)), 0.0);
  EXPECT_NEAR(potential(0.0, with_beta(2.0)), oracle::kV_0_beta2, 1e-16);
  EXPECT_NEAR(potential(0.0, with_beta(0.0)), 0.125, 1e-16);
  EXPECT_NEAR(potential(0.0, with_beta(1e-8)), 0.125, 1e-9);
}

TEST(BornInfeld, SmallBetaLimit) {
  EXPECT_DOUBLE_EQ(born_infeld_energy(0.7, 0.0), 0.245);
  EXPECT_NEAR(born_infeld_energy(0.7, 2.0), (std::sqrt(1 + 2 * 0.49) - 1) / 2, 1e-15);
}

TEST(ExpmMinusX, SeriesAndDirect) {
  for (double x : {-1e-9, -1e-4, -0.3, 0.49, -0.51, -5.0, 2.0}) {
    const long double xl = x;
    const double ref = std::abs(x) < 1e-3
                           ? static_cast<double>(xl * xl * (0.5L + xl / 6.0L + xl * xl / 24.0L + xl * xl * xl / 120.0L))
                           : static_cast<double>(std::expm1(xl) - xl);
    EXPECT_NEAR(expm1_minus_x(x), ref, 1e-15 * std::abs(ref) + 1e-300) << x;
  }
}

TEST(FirstIntegral, FrozenValues) {
  EXPECT_EQ(first_integral(0.0, with_beta(1.0)), 0.0);
  EXPECT_NEAR(first_integral(-1.0, with_beta(0.0)), oracle::kG_m1_beta0, 1e-15);
  EXPECT_NEAR(first_integral(-1.0, with_beta(2.0)), oracle::kG_m1_beta2, 1e-13);
}

TEST(FirstIntegral, AgreesWithSimpsonOracle) {
  for (double beta : {0.0, 1.0, 2.0, 3.0, 3.9}) {
    for (double u : {-0.1, -1.0, -4.0, -12.0}) {
      const double ref = oracle::first_integral_simpson(u, beta);
      EXPECT_NEAR(first_integral(u, with_beta(beta)), ref, 1e-11 * (1 + ref)) << beta << " " << u;
    }
  }
}

TEST(FirstIntegral, Bracket) {
  for (double beta : {1.0, 2.0, 3.0}) {
    for (double u : {-0.05, -1.0, -6.0}) {
      const auto b = first_integral_bounds(u, beta);
      const double g = first_integral(u, with_beta(beta));
      EXPECT_LT(b.lower, g);
      EXPECT_LT(g, b.upper);
    }
  }
  const auto b = first_integral_bounds(-1.0, 2.0);
  EXPECT_NEAR(b.lower, 0.73575888234288464, 1e-15);
  EXPECT_NEAR(std::sqrt(b.upper), 1.020058914987648, 1e-14);
}

TEST(FirstIntegral, DifferenceAndDrop) {
  for (double beta : {0.0, 2.0}) {
    const auto p = with_beta(beta);
    const double d = first_integral_difference(-3.0, -1.0, p);
    EXPECT_NEAR(d, first_integral(-3.0, p) - first_integral(-1.0, p), 1e-13);
    EXPECT_NEAR(first_integral_drop(-1.0, 2.0, p), d, 1e-13);
    // a depth below ulp(ref): G'(ref) * depth to leading order
    const double tiny = 1e-20;
    EXPECT_NEAR(first_integral_drop(-1.0, tiny, p) / tiny, -2.0 * rhs(-1.0, p), 1e-9);
  }
  EXPECT_THROW(first_integral(0.1, with_beta(0.0)), DomainError);
}

TEST(FirstIntegral, SmallAnchorLinearization) {
  EXPECT_NEAR(std::sqrt(first_integral(-1e-6, with_beta(0.0))), 9.99999833333361e-7, 1e-19);
}

TEST(FirstIntegralTable, MatchesClosedFormAtBetaZero) {
  FirstIntegralTable table(with_beta(0.0), -30.0);
  for (const auto& n : table.nodes()) EXPECT_NEAR(n.g, 2.0 * expm1_minus_x(n.u), 1e-12) << n.u;
  for (double u : {-0.003, -0.777, -5.4321, -29.99}) {
    EXPECT_NEAR(table(u), 2.0 * expm1_minus_x(u), 1e-12) << u;
  }
}

TEST(FirstIntegralTable, MonotoneAndInterpolates) {
  const auto p = with_beta(3.0);
  FirstIntegralTable table(p, -10.0);
  EXPECT_EQ(FirstIntegralTable::kInterpolationOrder, 5);
  auto nodes = table.nodes();
  for (std::size_t k = 1; k < nodes.size(); ++k) EXPECT_GT(nodes[k].g, nodes[k - 1].g);
  for (double u : {-0.0049, -2.345, -9.995}) EXPECT_NEAR(table(u), first_integral(u, p), 1e-12) << u;
  EXPECT_THROW((void)table(-10.5), DomainError);
  EXPECT_THROW((void)table(0.1), DomainError);
}
