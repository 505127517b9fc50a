#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "enachi/lambert_w.hpp"

using namespace enachi;

TEST(LambertW, FixedPoints) {
  EXPECT_EQ(lambert_w0(0.0), 0.0);
  EXPECT_NEAR(lambert_w0(std::numbers::e), 1.0, 1e-12);
  EXPECT_NEAR(lambert_w0(1.0), 0.5671432904097838, 1e-15);  // omega constant
  EXPECT_NEAR(lambert_w0(-1.0 / std::numbers::e), -1.0, 1e-7);
  EXPECT_NEAR(lambert_w0(10.0), 1.7455280027406994, 1e-14);
}

TEST(LambertW, DomainErrors) {
  EXPECT_THROW((void)lambert_w0(-0.5), std::domain_error);
  EXPECT_THROW((void)lambert_w0(std::nan("")), std::domain_error);
}

TEST(LambertW, ResidualAcrossDecades) {
  for (int i = 0; i <= 1400; ++i) {
    const double x = std::pow(10.0, -8.0 + i * 0.01);
    const double w = lambert_w0(x);
    EXPECT_LE(std::abs(w * std::exp(w) - x), 1e-14 * std::max(1.0, x)) << x;
    const long double wl = lambert_w0l(x);
    EXPECT_LE(std::fabs(wl * std::exp(wl) - static_cast<long double>(x)), 1e-10L) << x;
  }
}

TEST(LambertW, NegativeBranchResidual) {
  for (int i = 1; i < 100; ++i) {
    const double x = -i / (100.0 * std::numbers::e);
    const double w = lambert_w0(x);
    EXPECT_GE(w, -1.0);
    EXPECT_NEAR(w * std::exp(w), x, 1e-12) << x;
  }
}
